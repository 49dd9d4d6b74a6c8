#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "graphot/graph.hpp"
#include "graphot/measure.hpp"

namespace graphot {

/// Distance between two measures; must be pure and safe to call concurrently.
using PairSolver = std::function<double(const DiscreteMeasure&, const DiscreteMeasure&)>;

struct PairFailure {
    std::size_t i = 0;
    std::size_t j = 0;
    std::string message;
};

struct PairwiseOptions {
    int threads = 1;
    bool symmetric = true;       // compute the upper triangle and mirror it
    bool zero_diagonal = true;   // skip diagonal solves and write zeros
};

struct PairwiseResult {
    Eigen::MatrixXd distances;        // failed entries hold NaN
    std::vector<PairFailure> failures;
};

// D[i][j] = solver(measures[i], measures[j]). A failing pair never aborts the
// batch; it is recorded and its entry set to NaN. Results are gathered by
// index, so parallel and serial runs produce identical matrices.
PairwiseResult pairwise_matrix(const std::vector<DiscreteMeasure>& measures,
                               const PairSolver& solver, const PairwiseOptions& opts = {});

// K = exp(-t_bar * D) entrywise, with an optional added diagonal term.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& distances, double t_bar,
                              double diag_add = 0.0);

struct BenchReport {
    std::vector<double> ost_seconds;  // per pair, preprocessing amortized in
    std::vector<double> ept_seconds;
    double median_ost = 0.0;
    double median_ept = 0.0;
    double speedup = 0.0;  // median_ept / median_ost
};

// Times the two solvers on the same measure pairs. preprocessing_seconds is
// spread evenly over the pairs of each method it applies to.
BenchReport bench_pairs(const std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>>& pairs,
                        const PairSolver& ost_solver, const PairSolver& ept_solver,
                        double ost_preprocessing_seconds = 0.0,
                        double ept_preprocessing_seconds = 0.0);

std::string bench_csv(const BenchReport& report);

// Matrix formats: CSV, or little-endian float64 with a one-line JSON header.
void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
void save_matrix_binary(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_matrix_csv(const std::string& path);
Eigen::MatrixXd load_matrix_binary(const std::string& path);
Eigen::MatrixXd load_matrix_auto(const std::string& path);

// JSON sidecar listing the failed pairs; written only when failures exist.
void save_failures(const std::string& path, const std::vector<PairFailure>& failures);

// All measure files of a directory in filename order.
std::vector<DiscreteMeasure> load_measure_dir(const std::string& dir,
                                              std::vector<std::string>* names = nullptr);

}  // namespace graphot
