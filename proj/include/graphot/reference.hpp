#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "graphot/ept.hpp"
#include "graphot/graph.hpp"
#include "graphot/measure.hpp"
#include "graphot/nfunc.hpp"
#include "graphot/ost.hpp"

namespace graphot {

/// Independent closed forms and brute-force solvers used only to validate the
/// main code paths. None of these share code with the solvers they check.
namespace reference {

// b (sum_e w_e |mu(gamma_e) - nu(gamma_e)|^p)^(1/p) + Theta |mass difference|,
// evaluated by direct summation over all edges from dense subtree aggregates.
double ust_closed_form(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Graph& g,
                       const ShortestPathTree& spt, double p, const OstParams& params);

// Analytic minimizer of the univariate objective for the normalized power
// N-function.
double power_k_opt(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Graph& g,
                   const ShortestPathTree& spt, double p, double b);

// Tree closed form: b sum_e w_e |delta_e| plus the root-weight mass term.
// Requires the graph to be a tree.
double d_alpha_tree(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Graph& g,
                    const OstParams& params);

// sum_e w_e |mu(gamma_e) - nu(gamma_e)| on a tree for balanced measures.
double tree_wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Graph& g);

// Exact LP transport value by successive shortest paths with potentials.
// Accepts negative costs; independent of the transportation simplex.
double lp_ot(const Eigen::MatrixXd& cost, const Eigen::VectorXd& row_marginal,
             const Eigen::VectorXd& col_marginal);

// Relative error between an analytic derivative and the central difference of
// fn at x with step h.
double fd_check(const std::function<double(double)>& fn, double analytic, double x, double h);

// High-accuracy golden-section minimization of (1/k)(1 + sum w Phi(k b d)),
// used as the oracle for the fast univariate solver.
double orlicz_norm_direct(const std::vector<WeightedDelta>& items, const NFunction& phi,
                          double b);

// Random test instances. Masses are dyadic so that measures built from the
// same mass multiset have bitwise-equal totals.
DiscreteMeasure random_measure(const Graph& g, int max_supports, std::mt19937_64& rng,
                               double mass_scale = 1.0);
std::pair<DiscreteMeasure, DiscreteMeasure> random_balanced_pair(const Graph& g,
                                                                 int max_supports,
                                                                 std::mt19937_64& rng);

struct OracleReport {
    std::string name;
    std::string instance;
    double main_value = 0.0;
    double oracle_value = 0.0;
    double abs_err = 0.0;
    double rel_err = 0.0;
    bool pass = false;
    double tolerance = 0.0;
};

struct VerifySummary {
    std::vector<OracleReport> reports;
    bool all_pass = false;
};

// Names every equivalence the suite must cover; run_verify_suite appends a
// failing report for any name missing from the registry.
const std::vector<std::string>& required_checks();

VerifySummary run_verify_suite(std::uint64_t seed, int instances_per_check = 20);

std::string verify_report_json(const VerifySummary& summary);

}  // namespace reference
}  // namespace graphot
