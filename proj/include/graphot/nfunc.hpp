#pragma once

#include <functional>
#include <memory>
#include <string>

namespace graphot {

/// Convex N-function Phi on [0, inf) together with the limit case Phi(t) = t.
/// Stateless value object; safe to copy and share across threads.
///
/// Built-in kinds:
///   Linear    Phi(t) = t                               (limit case)
///   ExpMinus  Phi(t) = exp(t) - t - 1
///   ExpSquare Phi(t) = exp(t^2) - 1
///   Power     Phi(t) = ((p-1)^(p-1)/p^p) t^p,  p > 1
///   RawPower  Phi(t) = t^p,                    p > 1
/// Custom entries supply their own value/derivative closures.
class NFunction {
public:
    enum class Kind { Linear, ExpMinus, ExpSquare, Power, RawPower, Custom };

    static NFunction linear();
    static NFunction exp_minus();
    static NFunction exp_square();
    static NFunction power(double p);
    static NFunction raw_power(double p);

    struct CustomSpec {
        std::string name;
        std::function<double(double)> value;       // required
        std::function<double(double)> deriv;       // required
        std::function<double(double)> deriv2;      // required
        std::function<double(double)> inverse;     // optional; Newton fallback
    };
    static NFunction custom(CustomSpec spec);

    // Parses a CLI name: linear, exp1, exp2, power:<p>, rawpower:<p>.
    static NFunction parse(const std::string& name);

    Kind kind() const { return kind_; }
    double exponent() const { return p_; }
    const std::string& name() const { return name_; }
    bool is_linear() const { return kind_ == Kind::Linear; }

    // Overflow returns +inf, never NaN. t < 0 throws param_error.
    double eval(double t) const;
    double deriv(double t) const;
    double deriv2(double t) const;

    // Phi(inverse(y)) = y; closed form where available, otherwise safeguarded
    // Newton with bisection fallback. y < 0 throws param_error.
    double inverse(double y) const;

private:
    NFunction(Kind kind, double p, std::string name);

    Kind kind_;
    double p_ = 0.0;
    std::string name_;
    std::shared_ptr<const CustomSpec> custom_;
};

}  // namespace graphot
