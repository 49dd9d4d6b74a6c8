#pragma once

#include <stdexcept>
#include <string>

namespace graphot {

// Error categories map onto CLI exit codes: parameter -> 2, numerical -> 3, io -> 4.
struct param_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace graphot
