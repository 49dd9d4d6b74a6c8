#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "graphot/graph.hpp"
#include "graphot/measure.hpp"
#include "graphot/nfunc.hpp"
#include "graphot/ost.hpp"

namespace graphot {

/// Calibrated transport problem on the augmented node set: graph supports plus
/// the dummy point. All cost entries are nonnegative by construction.
struct AugmentedProblem {
    std::vector<NodeId> support_rows;  // supp(mu) then -1 for the dummy
    std::vector<NodeId> support_cols;  // supp(nu) then -1 for the dummy
    Eigen::MatrixXd cost;              // c_hat over rows x cols
    AugmentedMeasure mu_hat;           // restricted to support_rows
    AugmentedMeasure nu_hat;           // restricted to support_cols
    double mass_scale = 0.0;           // mu(G) + nu(G)
    double b_lambda = 0.0;
};

struct SinkhornReport {
    Eigen::MatrixXd plan;
    double transport_cost = 0.0;
    double entropy = 0.0;    // H(plan) = -sum p (log p - 1)
    double objective = 0.0;  // transport_cost - eps * entropy
    double dual_lower = 0.0; // certified lower bound on the optimum, any iterate
    int iterations = 0;
    double marginal_violation = 0.0;
    bool converged = false;
    bool feasible = true;  // false when forbidden (+inf cost) cells block all mass
};

struct BisectionTrace {
    double t_lower = 0.0;
    double t_upper = 0.0;
    std::vector<std::pair<double, double>> midpoints;  // (t, A_eps(t))
    double final_t = 0.0;
    double value = 0.0;
    int total_inner_iterations = 0;
    bool used_entropic_bracket = false;
};

enum class BracketMode { Exact, Entropic };
enum class InnerSolver { Sinkhorn, Exact };

struct EptParams {
    OstParams base;
    double eps = 0.1;
    double tol_t_rel = 1e-4;  // bisection width relative to t_upper
    double sinkhorn_tol = 1e-7;
    int sinkhorn_max_iter = 10000;
    BracketMode bracket = BracketMode::Exact;
    InnerSolver inner = InnerSolver::Sinkhorn;
};

AugmentedProblem build_augmented(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                 const Graph& g, const ShortestPathTree& spt,
                                 const OstParams& params);

struct ExactOtResult {
    Eigen::MatrixXd plan;
    double value = 0.0;
    int pivots = 0;
};

// Exact transportation LP min <plan, cost> s.t. marginals, solved with the
// transportation simplex. Marginal sums must agree to 1e-9 relative.
ExactOtResult exact_ot(const Eigen::MatrixXd& cost, const Eigen::VectorXd& row_marginal,
                       const Eigen::VectorXd& col_marginal);

// Entropic OT value of cost matrix `cost` at regularization eps, log-domain.
// When the certified dual bound exceeds stop_when_dual_above the solve stops
// early (the caller only needed a one-sided comparison).
SinkhornReport sinkhorn(const Eigen::MatrixXd& cost, const Eigen::VectorXd& row_marginal,
                        const Eigen::VectorXd& col_marginal, double eps, double tol,
                        int max_iter,
                        double stop_when_dual_above = std::numeric_limits<double>::infinity());

// Objective of the best feasible plan obtainable from a report's plan by
// marginal rounding; a certified upper bound on the entropic optimum.
double rounded_upper_bound(const SinkhornReport& report, const Eigen::MatrixXd& cost,
                           const Eigen::VectorXd& row_marginal,
                           const Eigen::VectorXd& col_marginal, double eps);

// A_eps(t): Sinkhorn on the kernel exp(-Phi(c_hat/t)/eps).
SinkhornReport sinkhorn_objective(const AugmentedProblem& ap, const NFunction& phi, double t,
                                  double eps, double tol = 1e-7, int max_iter = 10000);

struct Brackets {
    double t_lower = 0.0;
    double t_upper = 0.0;
    double w_hat_c = 0.0;  // exact OT value when the exact bracket was used
    bool used_entropic = false;
};

// Bisection brackets: t_upper = L / Phi^{-1}(1 + eps) and t_lower from the
// exact OT value (or, opt-in, from entropic OT verified post-hoc).
Brackets compute_brackets(const AugmentedProblem& ap, const NFunction& phi, double eps,
                          BracketMode mode = BracketMode::Exact, double sinkhorn_tol = 1e-7,
                          int sinkhorn_max_iter = 10000);

struct EptResult {
    double value = 0.0;
    BisectionTrace trace;
};

EptResult orlicz_ept(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Graph& g,
                     const ShortestPathTree& spt, const NFunction& phi, const EptParams& params);

}  // namespace graphot
