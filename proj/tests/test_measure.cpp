#include "graphot/measure.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "graphot/errors.hpp"
#include "graphot/reference.hpp"

using namespace graphot;

namespace {

Graph p3() { return Graph(3, {{0, 1, 1.0}, {1, 2, 2.0}}, 0); }

// Brute-force aggregates: walk every support's root path.
std::vector<double> brute_aggregates(const DiscreteMeasure& m, const Graph& g,
                                     const ShortestPathTree& spt) {
    std::vector<double> out(static_cast<std::size_t>(g.edge_count()), 0.0);
    for (const auto& [node, mass] : m.entries())
        for (EdgeId e : edge_path_to_root(spt, node)) out[static_cast<std::size_t>(e)] += mass;
    return out;
}

}  // namespace

TEST_CASE("measure construction merges duplicates and drops zeros") {
    const DiscreteMeasure m({{2, 0.5}, {1, 1.0}, {2, 0.25}, {3, 0.0}});
    REQUIRE(m.entries().size() == 2);
    CHECK(m.entries()[0].first == 1);
    CHECK(m.entries()[1].first == 2);
    CHECK(m.entries()[1].second == doctest::Approx(0.75));
    CHECK(m.total_mass() == doctest::Approx(1.75).epsilon(1e-12));
    CHECK_THROWS_AS(DiscreteMeasure({{0, -1.0}}), param_error);
}

TEST_CASE("edge aggregates on the path graph") {
    const Graph g = p3();
    const auto spt = build_spt(g);
    const auto a1 = edge_aggregates(DiscreteMeasure({{1, 1.0}}), g, spt);
    CHECK(a1.values[0] == doctest::Approx(1.0));
    CHECK(a1.values[1] == 0.0);

    const auto a0 = edge_aggregates(DiscreteMeasure{}, g, spt);
    CHECK(a0.values[0] == 0.0);
    CHECK(a0.values[1] == 0.0);

    const auto a2 = edge_aggregates(DiscreteMeasure({{1, 1.0}, {2, 0.5}}), g, spt);
    CHECK(a2.values[0] == doctest::Approx(1.5));
    CHECK(a2.values[1] == doctest::Approx(0.5));
}

TEST_CASE("aggregates match brute-force path accumulation on random graphs") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 8; ++rep) {
        const Graph g = generate_graph(16 + static_cast<NodeId>(rng() % 48), GraphFlavor::Log,
                                       rng());
        const auto spt = build_spt(g);
        const auto m = reference::random_measure(g, 12, rng);
        const auto fast = edge_aggregates(m, g, spt);
        const auto slow = brute_aggregates(m, g, spt);
        for (EdgeId e = 0; e < g.edge_count(); ++e) {
            const auto ei = static_cast<std::size_t>(e);
            CHECK(fast.values[ei] == doctest::Approx(slow[ei]).epsilon(1e-12));
            CHECK(fast.values[ei] <= m.total_mass() * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("aggregates are additive") {
    std::mt19937_64 rng(31);
    const Graph g = generate_graph(40, GraphFlavor::Log, rng());
    const auto spt = build_spt(g);
    const auto m1 = reference::random_measure(g, 10, rng);
    const auto m2 = reference::random_measure(g, 10, rng);
    const auto sum = edge_aggregates(m1 + m2, g, spt);
    const auto a1 = edge_aggregates(m1, g, spt);
    const auto a2 = edge_aggregates(m2, g, spt);
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const auto ei = static_cast<std::size_t>(e);
        CHECK(sum.values[ei] == doctest::Approx(a1.values[ei] + a2.values[ei]).epsilon(1e-12));
    }
}

TEST_CASE("active edges on the path graph") {
    const Graph g = p3();
    const auto spt = build_spt(g);
    const DiscreteMeasure mu({{1, 1.0}});
    const DiscreteMeasure nu({{2, 0.5}});
    CHECK(active_edges(mu, nu, spt).edges == std::vector<EdgeId>{0, 1});
    CHECK(active_edges(DiscreteMeasure{}, DiscreteMeasure{}, spt).edges.empty());
    CHECK(active_edges(mu, mu, spt).edges == std::vector<EdgeId>{0});
}

TEST_CASE("edges off every support path have zero aggregate") {
    std::mt19937_64 rng(37);
    const Graph g = generate_graph(50, GraphFlavor::Log, rng());
    const auto spt = build_spt(g);
    const auto mu = reference::random_measure(g, 5, rng);
    const auto nu = reference::random_measure(g, 5, rng);
    const auto active = active_edges(mu, nu, spt);
    const auto am = edge_aggregates(mu, g, spt);
    const auto an = edge_aggregates(nu, g, spt);
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        if (active.contains(e)) continue;
        CHECK(am.values[static_cast<std::size_t>(e)] == 0.0);
        CHECK(an.values[static_cast<std::size_t>(e)] == 0.0);
    }
}

TEST_CASE("augmentation of the worked example") {
    const DiscreteMeasure mu({{1, 1.0}});
    const DiscreteMeasure nu({{2, 0.5}});
    const auto [mu_hat, nu_hat] = augment(mu, nu);
    REQUIRE(mu_hat.nodes.size() == 3);  // {1, 2, dummy}
    CHECK(mu_hat.nodes[2] == -1);
    CHECK(mu_hat.weights[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(mu_hat.weights[1] == 0.0);
    CHECK(mu_hat.weights[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(nu_hat.weights[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(nu_hat.weights[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("augmentation puts half the mass on the dummy for equal inputs") {
    const DiscreteMeasure mu({{0, 1.0}});
    const auto [mu_hat, nu_hat] = augment(mu, mu);
    CHECK(mu_hat.weights.back() == doctest::Approx(0.5));
    CHECK(nu_hat.weights.back() == doctest::Approx(0.5));
}

TEST_CASE("augmentation with one zero measure and degenerate input") {
    const DiscreteMeasure zero{};
    const DiscreteMeasure nu({{2, 1.0}});
    const auto [mu_hat, nu_hat] = augment(zero, nu);
    CHECK(mu_hat.weights.back() == doctest::Approx(1.0));
    CHECK(nu_hat.weights.back() == 0.0);
    CHECK_THROWS_AS(augment(zero, zero), param_error);
}

TEST_CASE("augmented measures sum to one and satisfy the dummy-mass identity") {
    std::mt19937_64 rng(41);
    const Graph g = generate_graph(30, GraphFlavor::Log, rng());
    for (int rep = 0; rep < 10; ++rep) {
        const auto mu = reference::random_measure(g, 8, rng);
        const auto nu = reference::random_measure(g, 8, rng);
        const auto [mu_hat, nu_hat] = augment(mu, nu);
        double s = 0.0;
        for (double w : mu_hat.weights) s += w;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        const double scale = mu.total_mass() + nu.total_mass();
        CHECK(mu_hat.weights.back() * scale == doctest::Approx(nu.total_mass()).epsilon(1e-12));
    }
}

TEST_CASE("shannon entropy convention") {
    CHECK(shannon_entropy({1.0}) == doctest::Approx(1.0));
    CHECK(shannon_entropy({0.5, 0.5}) == doctest::Approx(1.0 + std::log(2.0)).epsilon(1e-9));
    CHECK(shannon_entropy({0.5, 0.0, 0.5}) ==
          doctest::Approx(shannon_entropy({0.5, 0.5})).epsilon(1e-15));
}

TEST_CASE("measure text round-trip") {
    const DiscreteMeasure m({{3, 0.25}, {7, 1.5}});
    std::stringstream ss;
    write_measure(ss, m);
    const auto back = read_measure(ss);
    REQUIRE(back.entries().size() == 2);
    CHECK(back.entries()[0].second == 0.25);
    CHECK(back.total_mass() == doctest::Approx(m.total_mass()).epsilon(1e-15));

    std::stringstream bad("1 oops\n");
    CHECK_THROWS_AS(read_measure(bad), io_error);
}
