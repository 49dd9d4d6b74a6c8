#include "graphot/ost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "graphot/errors.hpp"

namespace graphot {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

WeightFunction WeightFunction::affine(double a1, double a0) {
    if (a0 < 0.0) throw param_error("affine weight offset must be nonnegative");
    WeightFunction w;
    w.a1_ = a1;
    w.a0_ = a0;
    return w;
}

WeightFunction WeightFunction::table(std::vector<double> values, NodeId root) {
    for (double v : values)
        if (v < 0.0) throw param_error("weight table entries must be nonnegative");
    if (root < 0 || static_cast<std::size_t>(root) >= values.size())
        throw param_error("weight table has no entry for the root node");
    WeightFunction w;
    w.root_value_ = values[static_cast<std::size_t>(root)];
    w.table_ = std::move(values);
    return w;
}

double WeightFunction::operator()(NodeId x, const ShortestPathTree& spt) const {
    if (!table_.empty()) {
        if (x < 0 || static_cast<std::size_t>(x) >= table_.size())
            throw param_error("weight table has no entry for node " + std::to_string(x));
        return table_[static_cast<std::size_t>(x)];
    }
    const double w = a1_ * spt.dist_from_root[static_cast<std::size_t>(x)] + a0_;
    if (w < 0.0) throw param_error("weight function is negative at node " + std::to_string(x));
    return w;
}

double WeightFunction::at_root() const { return table_.empty() ? a0_ : root_value_; }

bool WeightFunction::same_as(const WeightFunction& other) const {
    if (is_affine() != other.is_affine()) return false;
    if (is_affine()) return a1_ == other.a1_ && a0_ == other.a0_;
    return table_ == other.table_;
}

void OstParams::validate() const {
    if (!(b > 0.0)) throw param_error("b must be positive");
    if (lambda < 0.0) throw param_error("lambda must be nonnegative");
    const double hi = 0.5 * (b * lambda + w1.at_root() + w2.at_root());
    if (alpha < 0.0 || alpha > hi + 1e-15)
        throw param_error("alpha outside the admissible interval [0, " + std::to_string(hi) + "]");
}

double theta(const OstParams& params, double total_mu, double total_nu) {
    const double root_w = total_mu >= total_nu ? params.w1.at_root() : params.w2.at_root();
    return root_w + 0.5 * params.b * params.lambda - params.alpha;
}

double ost_objective(double k, const std::vector<WeightedDelta>& items, const NFunction& phi,
                     double b) {
    if (!(k > 0.0)) throw param_error("ost objective requires k > 0");
    double sum = 1.0;
    for (const auto& it : items) {
        sum += it.weight * phi.eval(k * b * it.delta);
        if (std::isinf(sum)) return kInf;
    }
    return sum / k;
}

namespace {

// d/dk and d2/dk2 of T(k); zero-delta terms are skipped (their contribution
// vanishes but Phi'' can be unbounded at 0).
struct ObjectiveDerivs {
    double first;
    double second;
};

ObjectiveDerivs ost_objective_derivs(double k, const std::vector<WeightedDelta>& items,
                                     const NFunction& phi, double b) {
    double s0 = 1.0;   // 1 + sum w Phi
    double s1 = 0.0;   // sum w (b d) Phi'
    double s2 = 0.0;   // sum w (b d)^2 Phi''
    for (const auto& it : items) {
        if (it.delta == 0.0) continue;
        const double a = b * it.delta;
        s0 += it.weight * phi.eval(k * a);
        s1 += it.weight * a * phi.deriv(k * a);
        s2 += it.weight * a * a * phi.deriv2(k * a);
    }
    const double inv_k = 1.0 / k;
    const double first = -inv_k * inv_k * s0 + inv_k * s1;
    const double second = 2.0 * inv_k * inv_k * inv_k * s0 - 2.0 * inv_k * inv_k * s1 + inv_k * s2;
    return {first, second};
}

struct MinimizeResult {
    double k;
    int evals;
};

// Bracket the minimizer by doubling/halving from k_init (overflowed
// objectives count as "too large k"), golden-section on log k, then a
// safeguarded Newton polish on T'.
MinimizeResult minimize_objective(const std::vector<WeightedDelta>& items, const NFunction& phi,
                                  double b, double k_init, const OstOptions& opts) {
    int evals = 0;
    auto T = [&](double k) {
        ++evals;
        return ost_objective(k, items, phi, b);
    };

    double m = k_init;
    double tm = T(m);
    for (int guard = 0; std::isinf(tm); ++guard) {
        if (guard > 4000)
            throw numeric_error("ost objective overflows at every probed scale down to k = " +
                                std::to_string(m));
        m *= 0.5;
        tm = T(m);
    }
    double a = 0.5 * m, c = 2.0 * m;
    double ta = T(a), tc = T(c);
    for (int guard = 0; ta < tm; ++guard) {
        if (guard > 4000)
            throw numeric_error("failed to bracket the ost minimizer (k -> 0 descent)");
        c = m;
        tc = tm;
        m = a;
        tm = ta;
        a *= 0.5;
        ta = T(a);
    }
    for (int guard = 0; tc < tm; ++guard) {
        if (guard > 4000)
            throw numeric_error("failed to bracket the ost minimizer (k -> inf descent)");
        a = m;
        ta = tm;
        m = c;
        tm = tc;
        c *= 2.0;
        tc = T(c);
    }

    // Golden section on x = log k.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double xl = std::log(a), xr = std::log(c);
    double x1 = xr - gr * (xr - xl);
    double x2 = xl + gr * (xr - xl);
    double f1 = T(std::exp(x1)), f2 = T(std::exp(x2));
    while (xr - xl > opts.golden_log_width) {
        if (f1 <= f2) {
            xr = x2;
            x2 = x1;
            f2 = f1;
            x1 = xr - gr * (xr - xl);
            f1 = T(std::exp(x1));
        } else {
            xl = x1;
            x1 = x2;
            f1 = f2;
            x2 = xl + gr * (xr - xl);
            f2 = T(std::exp(x2));
        }
    }
    double k = std::exp(0.5 * (xl + xr));

    // Newton on T' with the golden bracket as a safeguard.
    double lo = a, hi = c;
    for (int it = 0; it < opts.max_newton_iters; ++it) {
        const auto d = ost_objective_derivs(k, items, phi, b);
        ++evals;
        const double tk = ost_objective(k, items, phi, b);
        if (std::abs(d.first) * k <= 1e-10 * tk) break;
        if (d.first > 0.0)
            hi = k;
        else
            lo = k;
        double next = k;
        if (std::isfinite(d.second) && d.second > 0.0) next = k - d.first / d.second;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == k) break;
        k = next;
    }
    return {k, evals};
}

}  // namespace

OstResult solve_ost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Graph& g,
                    const ShortestPathTree& spt, const NFunction& phi, const OstParams& params,
                    const OstOptions& opts) {
    params.validate();
    mu.check_supports(g);
    nu.check_supports(g);

    // Signed aggregate differences by per-support root-path accumulation.
    std::vector<double> delta(static_cast<std::size_t>(g.edge_count()), 0.0);
    auto walk = [&](const DiscreteMeasure& m, double sign) {
        for (const auto& [node, mass] : m.entries()) {
            NodeId cur = node;
            while (spt.parent_edge[static_cast<std::size_t>(cur)] != kNoEdge) {
                const auto ci = static_cast<std::size_t>(cur);
                delta[static_cast<std::size_t>(spt.parent_edge[ci])] += sign * mass;
                cur = spt.parent_node[ci];
            }
        }
    };
    walk(mu, 1.0);
    walk(nu, -1.0);

    const ActiveEdgeSet active = active_edges(mu, nu, spt);

    std::vector<WeightedDelta> items;
    if (opts.screen_edges) {
        items.reserve(active.edges.size());
        for (EdgeId e : active.edges)
            items.push_back({g.edge(e).weight, std::abs(delta[static_cast<std::size_t>(e)])});
    } else {
        items.reserve(static_cast<std::size_t>(g.edge_count()));
        for (EdgeId e = 0; e < g.edge_count(); ++e)
            items.push_back({g.edge(e).weight, std::abs(delta[static_cast<std::size_t>(e)])});
    }

    OstResult res;
    res.theta = theta(params, mu.total_mass(), nu.total_mass());
    res.active_edge_count = active.size();
    const double mass_term = res.theta * std::abs(mu.total_mass() - nu.total_mass());

    double max_delta = 0.0;
    for (const auto& it : items) max_delta = std::max(max_delta, it.delta);

    if (max_delta == 0.0) {
        // The infimum of 1/k is 0 and is not attained.
        res.value = mass_term;
        return res;
    }

    double inf_term = 0.0;
    switch (phi.kind()) {
        case NFunction::Kind::Linear: {
            double s = 0.0;
            for (const auto& it : items) s += it.weight * it.delta;
            inf_term = params.b * s;
            break;
        }
        case NFunction::Kind::Power: {
            const double p = phi.exponent();
            double s = 0.0;
            for (const auto& it : items) s += it.weight * std::pow(it.delta, p);
            const double root = std::pow(s, 1.0 / p);
            inf_term = params.b * root;
            res.k_opt = 1.0 / ((p - 1.0) / p * params.b * root);
            res.iterations = 0;
            break;
        }
        default: {
            const double k_init = 1.0 / (params.b * max_delta);
            const auto min_res = minimize_objective(items, phi, params.b, k_init, opts);
            inf_term = ost_objective(min_res.k, items, phi, params.b);
            res.k_opt = min_res.k;
            res.iterations = min_res.evals;
            break;
        }
    }
    res.value = mass_term + inf_term;
    return res;
}

}  // namespace graphot
