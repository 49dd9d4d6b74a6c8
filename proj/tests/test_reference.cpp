#include "graphot/reference.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "graphot/errors.hpp"

using namespace graphot;

namespace {

Graph p3() { return Graph(3, {{0, 1, 1.0}, {1, 2, 2.0}}, 0); }

OstParams unit_params() {
    OstParams p;
    p.b = 1.0;
    p.lambda = 1.0;
    p.alpha = 0.0;
    p.w1 = WeightFunction::affine(1.0, 1.0);
    p.w2 = WeightFunction::affine(1.0, 1.0);
    return p;
}

}  // namespace

TEST_CASE("closed forms on the worked instance") {
    const Graph g = p3();
    const auto spt = build_spt(g);
    const DiscreteMeasure mu({{1, 1.0}});
    const DiscreteMeasure nu({{2, 0.5}});
    const auto params = unit_params();
    CHECK(reference::ust_closed_form(mu, nu, g, spt, 2.0, params) ==
          doctest::Approx(std::sqrt(0.75) + 0.75).epsilon(1e-12));
    CHECK(reference::ust_closed_form(mu, nu, g, spt, 1.0, params) ==
          doctest::Approx(2.25).epsilon(1e-12));
    CHECK(reference::ust_closed_form(mu, mu, g, spt, 2.0, params) == 0.0);
    CHECK(reference::power_k_opt(mu, nu, g, spt, 2.0, 1.0) ==
          doctest::Approx(2.0 / std::sqrt(0.75)).epsilon(1e-12));
}

TEST_CASE("tree closed form on the worked instance") {
    const Graph g = p3();
    const DiscreteMeasure mu({{1, 1.0}});
    const DiscreteMeasure nu({{2, 0.5}});
    const auto params = unit_params();
    CHECK(reference::d_alpha_tree(mu, nu, g, params) == doctest::Approx(2.25).epsilon(1e-12));
    // Balanced measures kill the mass term.
    const DiscreteMeasure nu2({{2, 1.0}});
    CHECK(reference::d_alpha_tree(mu, nu2, g, params) == doctest::Approx(2.0).epsilon(1e-12));
    // Single-node tree: no edges, equal aggregates.
    const Graph single(1, {}, 0);
    CHECK(reference::d_alpha_tree(DiscreteMeasure({{0, 2.0}}), DiscreteMeasure({{0, 2.0}}),
                                  single, params) == 0.0);
    // Not a tree.
    const Graph cyc(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}}, 0);
    CHECK_THROWS_AS(reference::d_alpha_tree(mu, nu, cyc, params), param_error);
}

TEST_CASE("tree transport closed form vs brute-force linear program") {
    const Graph g = p3();
    const DiscreteMeasure mu({{1, 1.0}});
    const DiscreteMeasure nu({{2, 1.0}});
    CHECK(reference::tree_wasserstein(mu, nu, g) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(reference::tree_wasserstein(mu, mu, g) == 0.0);

    // Star tree with mass at two distinct leaves.
    const Graph star(3, {{0, 1, 0.7}, {0, 2, 1.1}}, 0);
    const DiscreteMeasure a({{1, 1.0}});
    const DiscreteMeasure b({{2, 1.0}});
    CHECK(reference::tree_wasserstein(a, b, star) == doctest::Approx(1.8).epsilon(1e-12));

    Eigen::MatrixXd cost(1, 1);
    cost << graph_distance(star, 1, 2);
    Eigen::VectorXd one(1);
    one << 1.0;
    CHECK(reference::lp_ot(cost, one, one) == doctest::Approx(1.8).epsilon(1e-12));

    CHECK_THROWS_AS(reference::tree_wasserstein(mu, DiscreteMeasure({{2, 0.5}}), g),
                    param_error);
}

TEST_CASE("lp oracle handles negative costs") {
    Eigen::MatrixXd cost(2, 2);
    cost << -1.0, 2.0, 3.0, -4.0;
    Eigen::VectorXd a(2), b(2);
    a << 1.0, 1.0;
    b << 1.0, 1.0;
    // Optimal assignment picks both negative entries.
    CHECK(reference::lp_ot(cost, a, b) == doctest::Approx(-5.0).epsilon(1e-12));
}

TEST_CASE("finite difference check") {
    const auto square = [](double x) { return x * x; };
    CHECK(reference::fd_check(square, 2.0, 1.0, 1e-6) <= 1e-10);
    const auto constant = [](double) { return 3.0; };
    CHECK(reference::fd_check(constant, 0.0, 1.0, 1e-6) == 0.0);
    // The univariate transport objective at the worked instance.
    const std::vector<WeightedDelta> items = {{1.0, 0.5}, {2.0, 0.5}};
    const auto phi = NFunction::power(2.0);
    const auto t_of_k = [&](double k) { return ost_objective(k, items, phi, 1.0); };
    // T(k) = 1/k + k * 3/16 for this instance; T'(1) = -1 + 3/16.
    CHECK(reference::fd_check(t_of_k, -1.0 + 3.0 / 16.0, 1.0, 1e-6) <= 1e-5);
    const auto phi1 = NFunction::exp_minus();
    CHECK(reference::fd_check([&](double t) { return phi1.eval(t); }, phi1.deriv(2.0), 2.0,
                              1e-6) <= 1e-5);
}

TEST_CASE("direct univariate oracle matches the analytic power value") {
    std::mt19937_64 rng(83);
    const Graph g = generate_graph(30, GraphFlavor::Log, rng());
    const auto spt = build_spt(g);
    const auto mu = reference::random_measure(g, 8, rng);
    const auto nu = reference::random_measure(g, 8, rng);
    const auto am = edge_aggregates(mu, g, spt);
    const auto an = edge_aggregates(nu, g, spt);
    std::vector<WeightedDelta> items;
    for (EdgeId e = 0; e < g.edge_count(); ++e)
        items.push_back({g.edge(e).weight, std::abs(am.values[static_cast<std::size_t>(e)] -
                                                    an.values[static_cast<std::size_t>(e)])});
    double s = 0.0;
    for (const auto& it : items) s += it.weight * it.delta * it.delta;
    const double analytic = std::sqrt(s);
    CHECK(reference::orlicz_norm_direct(items, NFunction::power(2.0), 1.0) ==
          doctest::Approx(analytic).epsilon(1e-9));
}

TEST_CASE("verification suite passes and covers every registered equivalence") {
    const auto summary = reference::run_verify_suite(2024, 6);
    for (const auto& rep : summary.reports) {
        INFO(rep.name, " on ", rep.instance, ": main=", rep.main_value,
             " oracle=", rep.oracle_value, " abs=", rep.abs_err, " rel=", rep.rel_err);
        CHECK(rep.pass);
    }
    CHECK(summary.all_pass);
    for (const auto& name : reference::required_checks()) {
        const bool found = std::any_of(summary.reports.begin(), summary.reports.end(),
                                       [&](const auto& r) { return r.name == name; });
        CHECK_MESSAGE(found, name);
    }
    const auto json = reference::verify_report_json(summary);
    CHECK(json.find("all_pass") != std::string::npos);
}
