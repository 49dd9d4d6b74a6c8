#include "graphot/nfunc.hpp"

#include <cmath>
#include <limits>

#include "graphot/errors.hpp"

namespace graphot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_domain(double t, const char* what) {
    if (t < 0.0 || std::isnan(t))
        throw param_error(std::string(what) + " requires a nonnegative argument");
}

// Power normalization constant (p-1)^(p-1) / p^p, for p > 1.
double power_coeff(double p) {
    return std::exp((p - 1.0) * std::log(p - 1.0) - p * std::log(p));
}

}  // namespace

NFunction::NFunction(Kind kind, double p, std::string name)
    : kind_(kind), p_(p), name_(std::move(name)) {}

NFunction NFunction::linear() { return NFunction(Kind::Linear, 1.0, "linear"); }
NFunction NFunction::exp_minus() { return NFunction(Kind::ExpMinus, 0.0, "exp1"); }
NFunction NFunction::exp_square() { return NFunction(Kind::ExpSquare, 0.0, "exp2"); }

NFunction NFunction::power(double p) {
    if (!(p > 1.0)) throw param_error("power N-function requires p > 1");
    return NFunction(Kind::Power, p, "power:" + std::to_string(p));
}

NFunction NFunction::raw_power(double p) {
    if (!(p > 1.0)) throw param_error("rawpower N-function requires p > 1");
    return NFunction(Kind::RawPower, p, "rawpower:" + std::to_string(p));
}

NFunction NFunction::custom(CustomSpec spec) {
    if (!spec.value || !spec.deriv || !spec.deriv2)
        throw param_error("custom N-function needs value, deriv and deriv2");
    NFunction f(Kind::Custom, 0.0, spec.name.empty() ? "custom" : spec.name);
    f.custom_ = std::make_shared<const CustomSpec>(std::move(spec));
    if (f.eval(0.0) != 0.0) throw param_error("custom N-function must satisfy value(0) = 0");
    // Spot-check monotonicity and convexity on a coarse grid.
    double prev = 0.0;
    for (double t = 0.25; t <= 8.0; t *= 2.0) {
        const double v = f.eval(t);
        if (!(v > prev)) throw param_error("custom N-function must be strictly increasing");
        if (f.deriv2(t) < 0.0) throw param_error("custom N-function must be convex");
        prev = v;
    }
    return f;
}

NFunction NFunction::parse(const std::string& name) {
    if (name == "linear") return linear();
    if (name == "exp1") return exp_minus();
    if (name == "exp2") return exp_square();
    const auto colon = name.find(':');
    if (colon != std::string::npos) {
        const std::string head = name.substr(0, colon);
        double p = 0.0;
        try {
            p = std::stod(name.substr(colon + 1));
        } catch (const std::exception&) {
            throw param_error("cannot parse exponent in N-function name: " + name);
        }
        if (head == "power") return power(p);
        if (head == "rawpower") return raw_power(p);
    }
    throw param_error("unknown N-function: " + name +
                      " (expected linear, exp1, exp2, power:<p>, rawpower:<p>)");
}

double NFunction::eval(double t) const {
    check_domain(t, "N-function eval");
    switch (kind_) {
        case Kind::Linear:
            return t;
        case Kind::ExpMinus:
            return std::expm1(t) - t;
        case Kind::ExpSquare:
            return std::expm1(t * t);
        case Kind::Power:
            return power_coeff(p_) * std::pow(t, p_);
        case Kind::RawPower:
            return std::pow(t, p_);
        case Kind::Custom:
            return custom_->value(t);
    }
    return kInf;
}

double NFunction::deriv(double t) const {
    check_domain(t, "N-function deriv");
    switch (kind_) {
        case Kind::Linear:
            return 1.0;
        case Kind::ExpMinus:
            return std::expm1(t);
        case Kind::ExpSquare:
            return 2.0 * t * (std::expm1(t * t) + 1.0);
        case Kind::Power:
            return power_coeff(p_) * p_ * std::pow(t, p_ - 1.0);
        case Kind::RawPower:
            return p_ * std::pow(t, p_ - 1.0);
        case Kind::Custom:
            return custom_->deriv(t);
    }
    return kInf;
}

double NFunction::deriv2(double t) const {
    check_domain(t, "N-function deriv2");
    switch (kind_) {
        case Kind::Linear:
            return 0.0;
        case Kind::ExpMinus:
            return std::expm1(t) + 1.0;
        case Kind::ExpSquare: {
            const double et = std::expm1(t * t) + 1.0;
            return (2.0 + 4.0 * t * t) * et;
        }
        case Kind::Power:
            return power_coeff(p_) * p_ * (p_ - 1.0) * std::pow(t, p_ - 2.0);
        case Kind::RawPower:
            return p_ * (p_ - 1.0) * std::pow(t, p_ - 2.0);
        case Kind::Custom:
            return custom_->deriv2(t);
    }
    return kInf;
}

double NFunction::inverse(double y) const {
    check_domain(y, "N-function inverse");
    if (y == 0.0) return 0.0;
    switch (kind_) {
        case Kind::Linear:
            return y;
        case Kind::ExpSquare:
            return std::sqrt(std::log1p(y));
        case Kind::Power:
            return std::pow(y / power_coeff(p_), 1.0 / p_);
        case Kind::RawPower:
            return std::pow(y, 1.0 / p_);
        case Kind::Custom:
            if (custom_->inverse) return custom_->inverse(y);
            break;
        case Kind::ExpMinus:
            break;
    }

    // Bisection to a small bracket, then a Newton polish. The exp-like kinds
    // get a tight upper end from the log of the target.
    double lo = 0.0;
    double hi = kind_ == Kind::ExpMinus ? std::min(y + 2.0, std::log1p(y) + 2.0) : 1.0;
    while (eval(hi) < y) {
        hi *= 2.0;
        if (hi > 1e300) throw numeric_error("N-function inverse bracket overflow");
    }
    while (hi - lo > 1e-2 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (eval(mid) < y)
            lo = mid;
        else
            hi = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        const double fx = eval(x) - y;
        if (fx > 0.0)
            hi = x;
        else
            lo = x;
        if (std::abs(fx) <= 1e-14 * std::max(1.0, y)) break;
        const double dfx = deriv(x);
        double next = dfx > 0.0 ? x - fx / dfx : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x) break;
        x = next;
    }
    return x;
}

}  // namespace graphot
