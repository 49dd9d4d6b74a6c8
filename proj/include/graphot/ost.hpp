#pragma once

#include <optional>
#include <vector>

#include "graphot/graph.hpp"
#include "graphot/measure.hpp"
#include "graphot/nfunc.hpp"

namespace graphot {

/// Nonnegative weight function on graph nodes, either affine in the distance
/// to the root, x -> a1 * d(z0, x) + a0, or an explicit per-node table.
class WeightFunction {
public:
    static WeightFunction affine(double a1, double a0);
    static WeightFunction table(std::vector<double> values, NodeId root);

    double operator()(NodeId x, const ShortestPathTree& spt) const;
    double at_root() const;
    bool is_affine() const { return table_.empty(); }
    double affine_slope() const { return a1_; }
    double affine_offset() const { return a0_; }
    const std::vector<double>& table_values() const { return table_; }

    // Upper bound on the Lipschitz constant w.r.t. the graph metric, when known.
    std::optional<double> lipschitz_hint;

    bool same_as(const WeightFunction& other) const;

private:
    WeightFunction() = default;
    double a1_ = 0.0;
    double a0_ = 0.0;        // affine weights: value at the root
    double root_value_ = 0.0;  // table weights: value at the root
    std::vector<double> table_;
};

struct OstParams {
    double b = 1.0;
    double lambda = 1.0;
    double alpha = 0.0;
    WeightFunction w1 = WeightFunction::affine(1.0, 1.0);
    WeightFunction w2 = WeightFunction::affine(1.0, 1.0);

    // Throws param_error unless b > 0, lambda >= 0 and alpha lies in
    // [0, (b lambda + w1(z0) + w2(z0)) / 2].
    void validate() const;
};

struct OstResult {
    double value = 0.0;
    double theta = 0.0;
    std::optional<double> k_opt;  // absent for the linear closed form
    int iterations = 0;
    std::size_t active_edge_count = 0;
};

// Root-weight coefficient of the mass-difference term: equal masses take the
// w1 branch.
double theta(const OstParams& params, double total_mu, double total_nu);

struct WeightedDelta {
    double weight;  // edge length w_e
    double delta;   // |mu(gamma_e) - nu(gamma_e)|
};

// T(k) = (1/k) (1 + sum_e w_e Phi(k b delta_e)); +inf on overflow.
double ost_objective(double k, const std::vector<WeightedDelta>& items, const NFunction& phi,
                     double b);

struct OstOptions {
    bool screen_edges = true;       // restrict the sum to E_{mu,nu}
    double golden_log_width = 1e-3; // golden-section width on the log-k axis
    int max_newton_iters = 30;
};

OstResult solve_ost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Graph& g,
                    const ShortestPathTree& spt, const NFunction& phi, const OstParams& params,
                    const OstOptions& opts = {});

}  // namespace graphot
