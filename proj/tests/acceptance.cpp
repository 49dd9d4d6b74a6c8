// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Instance counts, tolerances and time budgets are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "graphot/batch.hpp"
#include "graphot/ept.hpp"
#include "graphot/graph.hpp"
#include "graphot/measure.hpp"
#include "graphot/nfunc.hpp"
#include "graphot/ost.hpp"
#include "graphot/reference.hpp"

using namespace graphot;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;

void verdict(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

OstParams unit_params(double alpha = 0.0) {
    OstParams p;
    p.b = 1.0;
    p.lambda = 1.0;
    p.alpha = alpha;
    p.w1 = WeightFunction::affine(1.0, 1.0);
    p.w2 = WeightFunction::affine(1.0, 1.0);
    return p;
}

NFunction normalized_power_as_custom(double p) {
    const double coeff = std::exp((p - 1.0) * std::log(p - 1.0) - p * std::log(p));
    NFunction::CustomSpec spec;
    spec.name = "custom-power";
    spec.value = [coeff, p](double t) { return coeff * std::pow(t, p); };
    spec.deriv = [coeff, p](double t) { return coeff * p * std::pow(t, p - 1.0); };
    spec.deriv2 = [coeff, p](double t) { return coeff * p * (p - 1.0) * std::pow(t, p - 2.0); };
    return NFunction::custom(std::move(spec));
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

bool measures_equal(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    return a.entries() == b.entries();
}

// Criteria 1 + 2: the univariate minimizer against the closed forms.
void criteria_power_and_linear() {
    std::mt19937_64 rng(101);
    const auto t0 = clock_type::now();
    const double ps[] = {1.5, 2.0, 3.0};
    double worst_value = 0.0, worst_k = 0.0, worst_linear = 0.0;
    for (int inst = 0; inst < 200; ++inst) {
        const Graph g = generate_graph(20 + static_cast<NodeId>(rng() % 181),
                                       inst % 2 ? GraphFlavor::Log : GraphFlavor::Sqrt, rng());
        const auto spt = build_spt(g);
        const auto mu = reference::random_measure(g, 30, rng);
        const auto nu = reference::random_measure(g, 30, rng);
        const auto params = unit_params();
        const double p = ps[inst % 3];

        const double oracle = reference::ust_closed_form(mu, nu, g, spt, p, params);
        const auto general = solve_ost(mu, nu, g, spt, normalized_power_as_custom(p), params);
        worst_value = std::max(worst_value, rel_err(general.value, oracle));
        if (general.k_opt)
            worst_k = std::max(worst_k, rel_err(*general.k_opt,
                                                reference::power_k_opt(mu, nu, g, spt, p,
                                                                       params.b)));

        const double lin = solve_ost(mu, nu, g, spt, NFunction::linear(), params).value;
        worst_linear = std::max(
            worst_linear, rel_err(lin, reference::ust_closed_form(mu, nu, g, spt, 1.0, params)));
    }
    const double elapsed = seconds_since(t0);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "power-kind equivalence: value rel err %.3e (<=1e-8), k rel err %.3e (<=1e-6), "
                  "%.2f s (<=10 s) over 200 instances",
                  worst_value, worst_k, elapsed);
    verdict(1, worst_value <= 1e-8 && worst_k <= 1e-6 && elapsed <= 10.0, buf);
    std::snprintf(buf, sizeof(buf), "linear closed form: rel err %.3e (<=1e-12)", worst_linear);
    verdict(2, worst_linear <= 1e-12, buf);
}

// Criterion 3: metric and divergence axioms on random triples.
void criterion_metric() {
    std::mt19937_64 rng(303);
    double worst_sym = 0.0, worst_tri = 0.0, worst_shift = 0.0;
    bool nonneg_ok = true, identity_ok = true;
    const double alphas[] = {0.0, 0.3, 0.9};
    for (int inst = 0; inst < 200; ++inst) {
        const Graph g = generate_graph(12 + static_cast<NodeId>(rng() % 53), GraphFlavor::Log,
                                       rng());
        const auto spt = build_spt(g);
        const auto mu = reference::random_measure(g, 8, rng);
        const auto nu = reference::random_measure(g, 8, rng);
        const auto sigma = reference::random_measure(g, 8, rng);
        const auto params = unit_params(alphas[inst % 3]);
        const NFunction phis[] = {NFunction::linear(), NFunction::exp_minus(),
                                  NFunction::exp_square(), NFunction::power(2.0)};
        const auto& phi = phis[inst % 4];

        const double d_mn = solve_ost(mu, nu, g, spt, phi, params).value;
        const double d_nm = solve_ost(nu, mu, g, spt, phi, params).value;
        const double d_ms = solve_ost(mu, sigma, g, spt, phi, params).value;
        const double d_sn = solve_ost(sigma, nu, g, spt, phi, params).value;
        nonneg_ok = nonneg_ok && d_mn >= 0.0 && d_ms >= 0.0 && d_sn >= 0.0;
        worst_sym = std::max(worst_sym, rel_err(d_mn, d_nm));
        worst_tri = std::max(worst_tri, d_mn - (d_ms + d_sn));

        const double shifted = solve_ost(mu + sigma, nu + sigma, g, spt, phi, params).value;
        worst_shift = std::max(worst_shift, rel_err(shifted, d_mn));

        // Identity of indiscernibles in both directions; equal measures are
        // built as a permuted copy so the merge has to do the work.
        std::vector<std::pair<NodeId, double>> perm(mu.entries().rbegin(),
                                                    mu.entries().rend());
        const DiscreteMeasure mu_copy(std::move(perm));
        const double self = solve_ost(mu, mu_copy, g, spt, phi, params).value;
        identity_ok = identity_ok && measures_equal(mu, mu_copy) && self <= 1e-10;
        if (!measures_equal(mu, nu)) identity_ok = identity_ok && d_mn > 1e-10;
    }
    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "metric axioms: nonneg %s, symmetry rel %.3e (<=1e-10), triangle slack %.3e "
                  "(<=1e-9), identity %s, translation rel %.3e (<=1e-9)",
                  nonneg_ok ? "ok" : "VIOLATED", worst_sym, worst_tri,
                  identity_ok ? "ok" : "VIOLATED", worst_shift);
    verdict(3, nonneg_ok && worst_sym <= 1e-10 && worst_tri <= 1e-9 && identity_ok &&
                   worst_shift <= 1e-9,
            buf);
}

// Criteria 4 + 6: the exact linear transport identity and the lower bound.
void criteria_ept_linear_and_bound() {
    std::mt19937_64 rng(404);
    double worst_lp = 0.0, worst_bound = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const Graph g = generate_graph(16 + static_cast<NodeId>(rng() % 85), GraphFlavor::Log,
                                       rng());
        const auto spt = build_spt(g);
        const auto mu = reference::random_measure(g, 50, rng);
        const auto nu = reference::random_measure(g, 50, rng);
        EptParams ep;
        ep.base = unit_params();
        ep.inner = InnerSolver::Exact;

        const auto res = orlicz_ept(mu, nu, g, spt, NFunction::linear(), ep);
        const auto ap = build_augmented(mu, nu, g, spt, ep.base);
        Eigen::MatrixXd shifted = ap.cost.array() - ap.b_lambda;
        Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(
                                ap.mu_hat.weights.data(),
                                static_cast<Eigen::Index>(ap.mu_hat.weights.size())) *
                            ap.mass_scale;
        Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(
                                ap.nu_hat.weights.data(),
                                static_cast<Eigen::Index>(ap.nu_hat.weights.size())) *
                            ap.mass_scale;
        worst_lp = std::max(worst_lp, std::abs(res.value - reference::lp_ot(shifted, a, b)));

        const double ost = solve_ost(mu, nu, g, spt, NFunction::linear(), ep.base).value;
        const double bound = res.value + 0.5 * ep.base.b * ep.base.lambda *
                                             (mu.total_mass() + nu.total_mass());
        worst_bound = std::min(worst_bound, ost - bound);
    }
    // The worked instance must come out exactly.
    const Graph p3(3, {{0, 1, 1.0}, {1, 2, 2.0}}, 0);
    const auto spt = build_spt(p3);
    EptParams ep;
    ep.base = unit_params();
    ep.inner = InnerSolver::Exact;
    // mass_scale * (transport value - b lambda) = 1.5 * (2 - 1) = 1.5.
    const double worked =
        orlicz_ept(DiscreteMeasure({{1, 1.0}}), DiscreteMeasure({{2, 0.5}}), p3, spt,
                   NFunction::linear(), ep)
            .value;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "exact linear transport identity: lp abs err %.3e (<=1e-8), worked value "
                  "%.15f (=1.5*(2-1))",
                  worst_lp, worked);
    verdict(4, worst_lp <= 1e-8 && std::abs(worked - 1.5) <= 1e-12, buf);
    std::snprintf(buf, sizeof(buf),
                  "transport lower bound: worst slack %.3e (>=-1e-8) over 50 instances",
                  worst_bound);
    verdict(6, worst_bound >= -1e-8, buf);
}

// Criterion 5: bisection soundness with the entropic inner solver.
void criterion_bisection() {
    std::mt19937_64 rng(505);
    double worst_upper = 0.0, worst_lower = 0.0, worst_mono = 0.0, worst_a4 = 0.0;
    double a4_tol = 0.0;
    for (int inst = 0; inst < 30; ++inst) {
        const Graph g = generate_graph(10 + static_cast<NodeId>(rng() % 19), GraphFlavor::Log,
                                       rng());
        const auto spt = build_spt(g);
        const auto mu = reference::random_measure(g, 6, rng);
        const auto nu = reference::random_measure(g, 6, rng);
        const double eps = inst % 2 ? 1.0 : 0.1;
        const auto phi = NFunction::exp_minus();
        const auto params = unit_params();
        const auto ap = build_augmented(mu, nu, g, spt, params);

        const auto br = compute_brackets(ap, phi, eps);
        worst_upper = std::max(
            worst_upper, sinkhorn_objective(ap, phi, br.t_upper, eps).objective - 1.0);
        if (br.t_lower > 0.0)
            worst_lower = std::max(
                worst_lower, 1.0 - sinkhorn_objective(ap, phi, br.t_lower, eps).objective);

        double prev = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 20; ++k) {
            const double lo = std::max(br.t_lower, 1e-3 * br.t_upper);
            const double t = lo * std::pow(br.t_upper / lo, k / 20.0);
            const auto rep = sinkhorn_objective(ap, phi, t, eps);
            if (!rep.feasible) continue;
            worst_mono = std::max(worst_mono, rep.objective - prev);
            prev = rep.objective;
        }

        // Linear-kind binary search against the direct entropic transport
        // value, as stated.
        EptParams ep;
        ep.base = params;
        ep.eps = eps;
        const auto bis = orlicz_ept(mu, nu, g, spt, NFunction::linear(), ep);
        Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(
            ap.mu_hat.weights.data(), static_cast<Eigen::Index>(ap.mu_hat.weights.size()));
        Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(
            ap.nu_hat.weights.data(), static_cast<Eigen::Index>(ap.nu_hat.weights.size()));
        const double w_eps = sinkhorn(ap.cost, a, b, eps, 1e-9, 20000).objective;
        const double direct = ap.mass_scale * (w_eps - ap.b_lambda);
        worst_a4 = std::max(worst_a4, std::abs(bis.value - direct));
        a4_tol = std::max(a4_tol, ep.tol_t_rel * bis.trace.t_upper * ap.mass_scale);
    }
    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "bisection soundness: upper bracket excess %.3e (<=1e-6), lower bracket "
                  "deficit %.3e (<=1e-6), monotonicity slack %.3e (<=1e-6), linear direct-value "
                  "gap %.3e (tol %.3e)",
                  worst_upper, worst_lower, worst_mono, worst_a4, a4_tol);
    verdict(5, worst_upper <= 1e-6 && worst_lower <= 1e-6 && worst_mono <= 1e-6 &&
                   worst_a4 <= a4_tol,
            buf);
}

// Criterion 7: tree reductions.
void criterion_trees() {
    std::mt19937_64 rng(707);
    double worst_dalpha = 0.0, worst_tw = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const NodeId n = 6 + static_cast<NodeId>(rng() % 45);
        std::uniform_real_distribution<double> wd(0.2, 1.5);
        std::vector<Edge> edges;
        for (NodeId x = 1; x < n; ++x) {
            std::uniform_int_distribution<NodeId> pd(0, x - 1);
            edges.push_back({pd(rng), x, wd(rng)});
        }
        const Graph g(n, std::move(edges), 0);
        const auto spt = build_spt(g);
        const auto params = unit_params();

        const auto mu = reference::random_measure(g, 8, rng);
        const auto nu = reference::random_measure(g, 8, rng);
        const double lin = solve_ost(mu, nu, g, spt, NFunction::linear(), params).value;
        worst_dalpha = std::max(worst_dalpha,
                                rel_err(lin, reference::d_alpha_tree(mu, nu, g, params)));

        const auto [bmu, bnu] = reference::random_balanced_pair(g, 8, rng);
        const double bal = solve_ost(bmu, bnu, g, spt, NFunction::linear(), params).value;
        const auto mu_e = bmu.entries();
        const auto nu_e = bnu.entries();
        Eigen::MatrixXd cost(static_cast<Eigen::Index>(mu_e.size()),
                             static_cast<Eigen::Index>(nu_e.size()));
        Eigen::VectorXd a(static_cast<Eigen::Index>(mu_e.size()));
        Eigen::VectorXd b(static_cast<Eigen::Index>(nu_e.size()));
        for (std::size_t i = 0; i < mu_e.size(); ++i) {
            a(static_cast<Eigen::Index>(i)) = mu_e[i].second;
            const auto dist = dijkstra_distances(g, mu_e[i].first);
            for (std::size_t j = 0; j < nu_e.size(); ++j)
                cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    dist[static_cast<std::size_t>(nu_e[j].first)];
        }
        for (std::size_t j = 0; j < nu_e.size(); ++j)
            b(static_cast<Eigen::Index>(j)) = nu_e[j].second;
        worst_tw = std::max(worst_tw, std::abs(bal - reference::lp_ot(cost, a, b)));
    }
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "tree reductions: closed-form rel err %.3e (<=1e-10), balanced transport abs "
                  "err %.3e (<=1e-8)",
                  worst_dalpha, worst_tw);
    verdict(7, worst_dalpha <= 1e-10 && worst_tw <= 1e-8, buf);
}

// Criterion 9: screened and full-edge evaluations are bitwise equal.
void criterion_sparsity() {
    std::mt19937_64 rng(909);
    bool all_equal = true;
    for (int inst = 0; inst < 100; ++inst) {
        const Graph g = generate_graph(20 + static_cast<NodeId>(rng() % 101),
                                       inst % 2 ? GraphFlavor::Log : GraphFlavor::Sqrt, rng());
        const auto spt = build_spt(g);
        const auto mu = reference::random_measure(g, 10, rng);
        const auto nu = reference::random_measure(g, 10, rng);
        const auto params = unit_params();
        const NFunction phis[] = {NFunction::linear(), NFunction::exp_minus(),
                                  NFunction::power(2.0)};
        const auto& phi = phis[inst % 3];
        OstOptions full;
        full.screen_edges = false;
        const double a = solve_ost(mu, nu, g, spt, phi, params).value;
        const double b = solve_ost(mu, nu, g, spt, phi, params, full).value;
        all_equal = all_equal && a == b;
    }
    verdict(9, all_equal, all_equal ? "sparsity identity: bitwise equal on 100 instances"
                                    : "sparsity identity: VIOLATED");
}

// Criterion 8: the scaled timing gap on a generated graph.
void criterion_timing() {
    const auto t0 = clock_type::now();
    std::mt19937_64 rng(808);
    const Graph g = generate_graph(1000, GraphFlavor::Sqrt, 1808);

    const auto spt_start = clock_type::now();
    const auto spt = build_spt(g);
    const double spt_seconds = seconds_since(spt_start);

    std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> pairs;
    for (int i = 0; i < 100; ++i)
        pairs.emplace_back(reference::random_measure(g, 50, rng),
                           reference::random_measure(g, 50, rng));

    const auto params = unit_params();
    const auto phi = NFunction::exp_minus();
    PairSolver ost_solver = [&](const DiscreteMeasure& a, const DiscreteMeasure& b) {
        return solve_ost(a, b, g, spt, phi, params).value;
    };
    EptParams ep;
    ep.base = params;
    ep.eps = 0.1;
    PairSolver ept_solver = [&](const DiscreteMeasure& a, const DiscreteMeasure& b) {
        return orlicz_ept(a, b, g, spt, phi, ep).value;
    };

    const auto rep = bench_pairs(pairs, ost_solver, ept_solver, spt_seconds, 0.0);
    const double elapsed = seconds_since(t0);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "timing: median ost %.3e s, median ept %.3e s, speedup %.1fx (>=100x), total "
                  "%.1f s (<=1800 s)",
                  rep.median_ost, rep.median_ept, rep.speedup, elapsed);
    verdict(8, rep.speedup >= 100.0 && elapsed <= 1800.0, buf);
}

}  // namespace

int main() {
    criteria_power_and_linear();
    criterion_metric();
    criteria_ept_linear_and_bound();
    criterion_bisection();
    criterion_trees();
    criterion_sparsity();
    criterion_timing();
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
