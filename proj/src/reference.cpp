#include "graphot/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "graphot/errors.hpp"
#include "json.hpp"

namespace graphot {
namespace reference {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double ust_closed_form(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Graph& g,
                       const ShortestPathTree& spt, double p, const OstParams& params) {
    if (!(p >= 1.0)) throw param_error("ust closed form requires p >= 1");
    const EdgeAggregates am = edge_aggregates(mu, g, spt);
    const EdgeAggregates an = edge_aggregates(nu, g, spt);
    double s = 0.0;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const double d = std::abs(am.values[static_cast<std::size_t>(e)] -
                                  an.values[static_cast<std::size_t>(e)]);
        s += g.edge(e).weight * std::pow(d, p);
    }
    const double root_w =
        mu.total_mass() >= nu.total_mass() ? params.w1.at_root() : params.w2.at_root();
    const double mass_coeff = root_w + 0.5 * params.b * params.lambda - params.alpha;
    return params.b * std::pow(s, 1.0 / p) +
           mass_coeff * std::abs(mu.total_mass() - nu.total_mass());
}

double power_k_opt(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Graph& g,
                   const ShortestPathTree& spt, double p, double b) {
    const EdgeAggregates am = edge_aggregates(mu, g, spt);
    const EdgeAggregates an = edge_aggregates(nu, g, spt);
    double s = 0.0;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const double d = std::abs(am.values[static_cast<std::size_t>(e)] -
                                  an.values[static_cast<std::size_t>(e)]);
        s += g.edge(e).weight * std::pow(d, p);
    }
    if (s == 0.0) throw param_error("power_k_opt: identical aggregates have no minimizer");
    return 1.0 / ((p - 1.0) / p * b * std::pow(s, 1.0 / p));
}

namespace {

// Rooted view of a tree, built by plain BFS over the edge list (no Dijkstra).
struct RootedTree {
    std::vector<NodeId> parent;
    std::vector<EdgeId> parent_edge;
    std::vector<NodeId> bfs_order;
};

RootedTree root_tree(const Graph& g) {
    if (g.edge_count() != g.node_count() - 1)
        throw param_error("graph is not a tree (edge count mismatch)");
    RootedTree t;
    const auto n = static_cast<std::size_t>(g.node_count());
    t.parent.assign(n, -1);
    t.parent_edge.assign(n, kNoEdge);
    std::vector<bool> seen(n, false);
    std::queue<NodeId> q;
    q.push(g.root());
    seen[static_cast<std::size_t>(g.root())] = true;
    while (!q.empty()) {
        const NodeId x = q.front();
        q.pop();
        t.bfs_order.push_back(x);
        for (const auto& inc : g.adjacency(x)) {
            const auto vi = static_cast<std::size_t>(inc.neighbor);
            if (seen[vi]) continue;
            seen[vi] = true;
            t.parent[vi] = x;
            t.parent_edge[vi] = inc.edge;
            q.push(inc.neighbor);
        }
    }
    if (t.bfs_order.size() != n) throw param_error("graph is not a tree (disconnected)");
    return t;
}

// |mu(subtree) - nu(subtree)| per edge of a tree.
std::vector<double> tree_edge_deltas(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     const Graph& g, const RootedTree& t) {
    std::vector<double> node_mass(static_cast<std::size_t>(g.node_count()), 0.0);
    for (const auto& [node, mass] : mu.entries()) node_mass[static_cast<std::size_t>(node)] += mass;
    for (const auto& [node, mass] : nu.entries()) node_mass[static_cast<std::size_t>(node)] -= mass;
    std::vector<double> delta(static_cast<std::size_t>(g.edge_count()), 0.0);
    for (auto it = t.bfs_order.rbegin(); it != t.bfs_order.rend(); ++it) {
        const auto xi = static_cast<std::size_t>(*it);
        if (t.parent_edge[xi] == kNoEdge) continue;
        delta[static_cast<std::size_t>(t.parent_edge[xi])] = std::abs(node_mass[xi]);
        node_mass[static_cast<std::size_t>(t.parent[xi])] += node_mass[xi];
    }
    return delta;
}

}  // namespace

double d_alpha_tree(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Graph& g,
                    const OstParams& params) {
    const RootedTree t = root_tree(g);
    const auto delta = tree_edge_deltas(mu, nu, g, t);
    double s = 0.0;
    for (EdgeId e = 0; e < g.edge_count(); ++e)
        s += g.edge(e).weight * delta[static_cast<std::size_t>(e)];
    const double root_w =
        mu.total_mass() >= nu.total_mass() ? params.w1.at_root() : params.w2.at_root();
    const double mass_coeff = root_w + 0.5 * params.b * params.lambda - params.alpha;
    return params.b * s + mass_coeff * std::abs(mu.total_mass() - nu.total_mass());
}

double tree_wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Graph& g) {
    const double imbalance = std::abs(mu.total_mass() - nu.total_mass());
    if (imbalance > 1e-9 * std::max(1.0, mu.total_mass()))
        throw param_error("tree_wasserstein requires balanced measures");
    const RootedTree t = root_tree(g);
    const auto delta = tree_edge_deltas(mu, nu, g, t);
    double s = 0.0;
    for (EdgeId e = 0; e < g.edge_count(); ++e)
        s += g.edge(e).weight * delta[static_cast<std::size_t>(e)];
    return s;
}

// ---------------------------------------------------------------------------
// Successive shortest paths on the bipartite transport graph.
// ---------------------------------------------------------------------------

double lp_ot(const Eigen::MatrixXd& cost, const Eigen::VectorXd& row_marginal,
             const Eigen::VectorXd& col_marginal) {
    if (cost.rows() != row_marginal.size() || cost.cols() != col_marginal.size())
        throw param_error("lp_ot: cost shape does not match the marginals");
    const double sa = row_marginal.sum();
    const double sb = col_marginal.sum();
    if (std::abs(sa - sb) > 1e-9 * std::max(1.0, std::abs(sa)))
        throw param_error("lp_ot: marginal sums differ");

    std::vector<int> rows, cols;
    for (Eigen::Index i = 0; i < row_marginal.size(); ++i)
        if (row_marginal(i) > 0.0) rows.push_back(static_cast<int>(i));
    for (Eigen::Index j = 0; j < col_marginal.size(); ++j)
        if (col_marginal(j) > 0.0) cols.push_back(static_cast<int>(j));
    if (rows.empty() || cols.empty()) return 0.0;

    const int m = static_cast<int>(rows.size());
    const int n = static_cast<int>(cols.size());
    Eigen::MatrixXd c(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            c(i, j) = cost(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);

    std::vector<double> supply(static_cast<std::size_t>(m)), demand(static_cast<std::size_t>(n));
    for (int i = 0; i < m; ++i) supply[static_cast<std::size_t>(i)] = row_marginal(rows[i]);
    for (int j = 0; j < n; ++j) demand[static_cast<std::size_t>(j)] = col_marginal(cols[j]);

    // Potentials make all reduced costs nonnegative from the start.
    std::vector<double> pot_row(static_cast<std::size_t>(m), 0.0);
    std::vector<double> pot_col(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) pot_col[static_cast<std::size_t>(j)] = c.col(j).minCoeff();

    Eigen::MatrixXd plan = Eigen::MatrixXd::Zero(m, n);
    double remaining = 0.0;
    for (double s : supply) remaining += s;
    const double total = remaining;

    const int node_count = m + n;
    std::vector<double> dist(static_cast<std::size_t>(node_count));
    std::vector<int> prev(static_cast<std::size_t>(node_count));
    const int max_rounds = 20 * node_count * node_count + 50;
    int rounds = 0;
    while (remaining > 1e-12 * std::max(1.0, total)) {
        if (++rounds > max_rounds)
            throw numeric_error("lp_ot exceeded its augmentation budget");

        std::fill(dist.begin(), dist.end(), kInf);
        std::fill(prev.begin(), prev.end(), -1);
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
        for (int i = 0; i < m; ++i)
            if (supply[static_cast<std::size_t>(i)] > 0.0) {
                dist[static_cast<std::size_t>(i)] = 0.0;
                pq.push({0.0, i});
            }
        std::vector<bool> settled(static_cast<std::size_t>(node_count), false);
        while (!pq.empty()) {
            const auto [d, node] = pq.top();
            pq.pop();
            if (settled[static_cast<std::size_t>(node)]) continue;
            settled[static_cast<std::size_t>(node)] = true;
            if (node < m) {
                const int i = node;
                for (int j = 0; j < n; ++j) {
                    const double rc = std::max(0.0, c(i, j) + pot_row[static_cast<std::size_t>(i)] -
                                                        pot_col[static_cast<std::size_t>(j)]);
                    const double nd = d + rc;
                    if (nd < dist[static_cast<std::size_t>(m + j)]) {
                        dist[static_cast<std::size_t>(m + j)] = nd;
                        prev[static_cast<std::size_t>(m + j)] = i;
                        pq.push({nd, m + j});
                    }
                }
            } else {
                const int j = node - m;
                for (int i = 0; i < m; ++i) {
                    if (!(plan(i, j) > 0.0)) continue;
                    const double rc = std::max(0.0, -c(i, j) + pot_col[static_cast<std::size_t>(j)] -
                                                        pot_row[static_cast<std::size_t>(i)]);
                    const double nd = d + rc;
                    if (nd < dist[static_cast<std::size_t>(i)]) {
                        dist[static_cast<std::size_t>(i)] = nd;
                        prev[static_cast<std::size_t>(i)] = m + j;
                        pq.push({nd, i});
                    }
                }
            }
        }

        int sink = -1;
        double sink_dist = kInf;
        for (int j = 0; j < n; ++j) {
            if (!(demand[static_cast<std::size_t>(j)] > 0.0)) continue;
            if (dist[static_cast<std::size_t>(m + j)] < sink_dist) {
                sink_dist = dist[static_cast<std::size_t>(m + j)];
                sink = j;
            }
        }
        if (sink < 0) throw numeric_error("lp_ot: no augmenting path to remaining demand");

        for (int i = 0; i < m; ++i)
            pot_row[static_cast<std::size_t>(i)] +=
                std::min(dist[static_cast<std::size_t>(i)], sink_dist);
        for (int j = 0; j < n; ++j)
            pot_col[static_cast<std::size_t>(j)] +=
                std::min(dist[static_cast<std::size_t>(m + j)], sink_dist);

        // Bottleneck along the path, then augment.
        double delta = demand[static_cast<std::size_t>(sink)];
        int source = -1;
        for (int node = m + sink; node >= 0;) {
            const int p = prev[static_cast<std::size_t>(node)];
            if (p < 0) {
                source = node;
                break;
            }
            if (node >= m) {
                // forward arc p -> node: no capacity bound
            } else {
                delta = std::min(delta, plan(node, p - m));
            }
            node = p;
        }
        if (source < 0 || source >= m) throw numeric_error("lp_ot: malformed augmenting path");
        delta = std::min(delta, supply[static_cast<std::size_t>(source)]);

        for (int node = m + sink; prev[static_cast<std::size_t>(node)] >= 0;) {
            const int p = prev[static_cast<std::size_t>(node)];
            if (node >= m)
                plan(p, node - m) += delta;
            else
                plan(node, p - m) -= delta;
            node = p;
        }
        supply[static_cast<std::size_t>(source)] -= delta;
        demand[static_cast<std::size_t>(sink)] -= delta;
        remaining -= delta;
    }

    double value = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) value += plan(i, j) * c(i, j);
    return value;
}

double fd_check(const std::function<double(double)>& fn, double analytic, double x, double h) {
    const double central = (fn(x + h) - fn(x - h)) / (2.0 * h);
    return std::abs(analytic - central) / std::max(1.0, std::abs(analytic));
}

double orlicz_norm_direct(const std::vector<WeightedDelta>& items, const NFunction& phi,
                          double b) {
    double max_delta = 0.0;
    for (const auto& it : items) max_delta = std::max(max_delta, it.delta);
    if (max_delta == 0.0) return 0.0;

    auto value = [&](double k) { return ost_objective(k, items, phi, b); };
    double mid = 1.0 / (b * max_delta);
    while (std::isinf(value(mid))) mid *= 0.5;
    double lo = mid, hi = mid;
    while (value(lo * 0.5) <= value(lo)) lo *= 0.5;
    while (value(hi * 2.0) <= value(hi)) hi *= 2.0;

    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double xl = std::log(lo * 0.5), xr = std::log(hi * 2.0);
    double x1 = xr - gr * (xr - xl), x2 = xl + gr * (xr - xl);
    double f1 = value(std::exp(x1)), f2 = value(std::exp(x2));
    while (xr - xl > 1e-8) {
        if (f1 <= f2) {
            xr = x2;
            x2 = x1;
            f2 = f1;
            x1 = xr - gr * (xr - xl);
            f1 = value(std::exp(x1));
        } else {
            xl = x1;
            x1 = x2;
            f1 = f2;
            x2 = xl + gr * (xr - xl);
            f2 = value(std::exp(x2));
        }
    }
    return value(std::exp(0.5 * (xl + xr)));
}

DiscreteMeasure random_measure(const Graph& g, int max_supports, std::mt19937_64& rng,
                               double mass_scale) {
    std::uniform_int_distribution<int> count_dist(1, std::max(1, max_supports));
    std::uniform_int_distribution<NodeId> node_dist(0, g.node_count() - 1);
    // Dyadic masses in [0.1, 1]: short sums of them are exact, so measures
    // sharing a mass multiset have bitwise-equal totals.
    std::uniform_int_distribution<int> mass_dist(103, 1024);
    const int count = count_dist(rng);
    std::vector<std::pair<NodeId, double>> entries;
    entries.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        entries.emplace_back(node_dist(rng), mass_dist(rng) / 1024.0 * mass_scale);
    return DiscreteMeasure(std::move(entries));
}

std::pair<DiscreteMeasure, DiscreteMeasure> random_balanced_pair(const Graph& g,
                                                                 int max_supports,
                                                                 std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count_dist(1, std::max(1, max_supports));
    std::uniform_int_distribution<NodeId> node_dist(0, g.node_count() - 1);
    std::uniform_int_distribution<int> mass_dist(103, 1024);
    const int count = count_dist(rng);
    std::vector<std::pair<NodeId, double>> a, b;
    for (int i = 0; i < count; ++i) {
        const double mass = mass_dist(rng) / 1024.0;
        a.emplace_back(node_dist(rng), mass);
        b.emplace_back(node_dist(rng), mass);
    }
    return {DiscreteMeasure(std::move(a)), DiscreteMeasure(std::move(b))};
}

// ---------------------------------------------------------------------------
// Verification suite.
// ---------------------------------------------------------------------------

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct Suite {
    std::mt19937_64 rng;
    int instances;
    std::vector<OracleReport> reports;

    // Track the worst instance of a named comparison across the loop.
    void record(const std::string& name, const std::string& instance, double main_value,
                double oracle_value, double tol, bool relative) {
        const double abs_err = std::abs(main_value - oracle_value);
        const double rel_err = abs_err / std::max(1e-300, std::abs(oracle_value));
        const double err = relative ? rel_err : abs_err;
        auto it = std::find_if(reports.begin(), reports.end(),
                               [&](const OracleReport& r) { return r.name == name; });
        if (it == reports.end()) {
            reports.push_back({name, instance, main_value, oracle_value, abs_err, rel_err,
                               err <= tol, tol});
            return;
        }
        const double prev = relative ? it->rel_err : it->abs_err;
        if (err > prev) {
            it->instance = instance;
            it->main_value = main_value;
            it->oracle_value = oracle_value;
            it->abs_err = abs_err;
            it->rel_err = rel_err;
        }
        it->pass = it->pass && err <= tol;
    }

    Graph random_graph(NodeId min_nodes, NodeId max_nodes) {
        std::uniform_int_distribution<NodeId> nd(min_nodes, max_nodes);
        return generate_graph(nd(rng), GraphFlavor::Log, rng());
    }

    Graph random_tree(NodeId min_nodes, NodeId max_nodes) {
        std::uniform_int_distribution<NodeId> nd(min_nodes, max_nodes);
        const NodeId n = nd(rng);
        std::uniform_real_distribution<double> wd(0.2, 1.5);
        std::vector<Edge> edges;
        for (NodeId x = 1; x < n; ++x) {
            std::uniform_int_distribution<NodeId> pd(0, x - 1);
            edges.push_back({pd(rng), x, wd(rng)});
        }
        return Graph(n, std::move(edges), 0);
    }
};

std::string describe(std::uint64_t seed, const Graph& g, const DiscreteMeasure& mu,
                     const DiscreteMeasure& nu) {
    std::ostringstream os;
    os << "seed=" << seed << " nodes=" << g.node_count() << " edges=" << g.edge_count()
       << " |supp(mu)|=" << mu.entries().size() << " |supp(nu)|=" << nu.entries().size();
    return os.str();
}

OstParams default_params(double b = 1.0, double lambda = 1.0, double alpha = 0.0) {
    OstParams p;
    p.b = b;
    p.lambda = lambda;
    p.alpha = alpha;
    p.w1 = WeightFunction::affine(b, 1.0);
    p.w2 = WeightFunction::affine(b, 1.0);
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

void check_closed_forms(Suite& s) {
    const double ps[] = {1.5, 2.0, 3.0};
    for (int inst = 0; inst < s.instances; ++inst) {
        const std::uint64_t seed = s.rng();
        const Graph g = s.random_graph(20, 80);
        const auto spt = build_spt(g);
        std::mt19937_64 mrng(seed);
        const auto mu = random_measure(g, 12, mrng);
        const auto nu = random_measure(g, 12, mrng);
        const auto params = default_params();
        const std::string inst_desc = describe(seed, g, mu, nu);

        const double linear = solve_ost(mu, nu, g, spt, NFunction::linear(), params).value;
        s.record("linear_closed_form", inst_desc, linear,
                 ust_closed_form(mu, nu, g, spt, 1.0, params), 1e-12, true);

        const double p = ps[inst % 3];
        const auto power = solve_ost(mu, nu, g, spt, NFunction::power(p), params);
        s.record("power_analytic_value", inst_desc, power.value,
                 ust_closed_form(mu, nu, g, spt, p, params), 1e-10, true);

        const auto general = solve_ost(mu, nu, g, spt, normalized_power_as_custom(p), params);
        s.record("general_minimizer_value", inst_desc, general.value,
                 ust_closed_form(mu, nu, g, spt, p, params), 1e-8, true);
        if (general.k_opt)
            s.record("general_minimizer_k", inst_desc, *general.k_opt,
                     power_k_opt(mu, nu, g, spt, p, params.b), 1e-6, true);
    }
}

void check_metric_axioms(Suite& s) {
    for (int inst = 0; inst < s.instances; ++inst) {
        const std::uint64_t seed = s.rng();
        const Graph g = s.random_graph(16, 48);
        const auto spt = build_spt(g);
        std::mt19937_64 mrng(seed);
        const auto mu = random_measure(g, 10, mrng);
        const auto nu = random_measure(g, 10, mrng);
        const auto sigma = random_measure(g, 10, mrng);
        const auto params = default_params(1.0, 1.0, inst % 2 == 0 ? 0.0 : 0.25);
        const auto phi = inst % 2 == 0 ? NFunction::exp_minus() : NFunction::power(2.0);
        const std::string inst_desc = describe(seed, g, mu, nu);

        const double d_mn = solve_ost(mu, nu, g, spt, phi, params).value;
        const double d_nm = solve_ost(nu, mu, g, spt, phi, params).value;
        s.record("symmetry", inst_desc, d_mn, d_nm, 1e-10, true);

        const double d_ms = solve_ost(mu, sigma, g, spt, phi, params).value;
        const double d_sn = solve_ost(sigma, nu, g, spt, phi, params).value;
        s.record("triangle_inequality", inst_desc, std::min(0.0, d_ms + d_sn - d_mn), 0.0, 1e-9,
                 false);
        s.record("nonnegativity", inst_desc, std::min(0.0, std::min({d_mn, d_ms, d_sn})), 0.0,
                 0.0, false);
        s.record("identity_self_distance", inst_desc,
                 solve_ost(mu, mu, g, spt, phi, params).value, 0.0, 1e-10, false);

        const double shifted = solve_ost(mu + sigma, nu + sigma, g, spt, phi, params).value;
        s.record("mass_translation_invariance", inst_desc, shifted, d_mn, 1e-9, true);
    }
}

void check_balanced_reduction(Suite& s) {
    for (int inst = 0; inst < s.instances; ++inst) {
        const std::uint64_t seed = s.rng();
        const Graph g = s.random_graph(16, 48);
        const auto spt = build_spt(g);
        std::mt19937_64 mrng(seed);
        const auto [mu, nu] = random_balanced_pair(g, 10, mrng);
        const auto params = default_params(1.0);
        const auto phi = NFunction::exp_minus();
        const std::string inst_desc = describe(seed, g, mu, nu);

        const auto res = solve_ost(mu, nu, g, spt, phi, params);
        // Mass term must vanish exactly; the rest is the pure infimum.
        s.record("balanced_mass_term_zero", inst_desc,
                 res.theta * std::abs(mu.total_mass() - nu.total_mass()), 0.0, 0.0, false);
        const EdgeAggregates am = edge_aggregates(mu, g, spt);
        const EdgeAggregates an = edge_aggregates(nu, g, spt);
        std::vector<WeightedDelta> items;
        for (EdgeId e = 0; e < g.edge_count(); ++e)
            items.push_back({g.edge(e).weight,
                             std::abs(am.values[static_cast<std::size_t>(e)] -
                                      an.values[static_cast<std::size_t>(e)])});
        const double direct = orlicz_norm_direct(items, phi, params.b);
        s.record("balanced_reduction", inst_desc, res.value, direct, 1e-9, true);
    }
}

void check_sparsity(Suite& s) {
    for (int inst = 0; inst < s.instances; ++inst) {
        const std::uint64_t seed = s.rng();
        const Graph g = s.random_graph(24, 64);
        const auto spt = build_spt(g);
        std::mt19937_64 mrng(seed);
        const auto mu = random_measure(g, 6, mrng);
        const auto nu = random_measure(g, 6, mrng);
        const auto params = default_params();
        const auto phi = NFunction::exp_minus();
        OstOptions screened, full;
        full.screen_edges = false;
        const double a = solve_ost(mu, nu, g, spt, phi, params, screened).value;
        const double b = solve_ost(mu, nu, g, spt, phi, params, full).value;
        s.record("sparsity_identity", describe(seed, g, mu, nu), a, b, 0.0, false);
    }
}

void check_trees(Suite& s) {
    for (int inst = 0; inst < s.instances; ++inst) {
        const std::uint64_t seed = s.rng();
        const Graph g = s.random_tree(8, 40);
        const auto spt = build_spt(g);
        std::mt19937_64 mrng(seed);
        const auto mu = random_measure(g, 8, mrng);
        auto nu = random_measure(g, 8, mrng);
        const auto params = default_params();
        const std::string inst_desc = describe(seed, g, mu, nu);

        const double ost_linear = solve_ost(mu, nu, g, spt, NFunction::linear(), params).value;
        s.record("tree_closed_form", inst_desc, ost_linear, d_alpha_tree(mu, nu, g, params),
                 1e-10, true);

        // Balanced pair for the transport comparison.
        std::mt19937_64 brng(seed ^ 0x9e3779b97f4a7c15ULL);
        const auto [bmu, bnu] = random_balanced_pair(g, 8, brng);
        const double tw = tree_wasserstein(bmu, bnu, g);
        const double balanced_ost =
            solve_ost(bmu, bnu, g, spt, NFunction::linear(), params).value;
        s.record("tree_wasserstein_closed_form", inst_desc, balanced_ost, tw, 1e-8, true);

        // Brute-force LP with graph-metric cost.
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
        s.record("tree_wasserstein_lp", inst_desc, tw, lp_ot(cost, a, b), 1e-8, true);
    }
}

void check_ept_linear(Suite& s) {
    for (int inst = 0; inst < s.instances; ++inst) {
        const std::uint64_t seed = s.rng();
        const Graph g = s.random_graph(12, 40);
        const auto spt = build_spt(g);
        std::mt19937_64 mrng(seed);
        const auto mu = random_measure(g, 8, mrng);
        const auto nu = random_measure(g, 8, mrng);
        EptParams ep;
        ep.base = default_params();
        ep.inner = InnerSolver::Exact;
        const std::string inst_desc = describe(seed, g, mu, nu);

        const auto res = orlicz_ept(mu, nu, g, spt, NFunction::linear(), ep);
        const auto ap = build_augmented(mu, nu, g, spt, ep.base);

        // Independent LP on the shifted-cost formulation with unnormalized
        // marginals.
        Eigen::MatrixXd shifted = ap.cost.array() - ap.b_lambda;
        Eigen::VectorXd a = to_vector(ap.mu_hat.weights) * ap.mass_scale;
        Eigen::VectorXd b = to_vector(ap.nu_hat.weights) * ap.mass_scale;
        s.record("ept_reformulation_lp", inst_desc, res.value, lp_ot(shifted, a, b), 1e-8,
                 false);

        // The same value through the normalized exact transport route.
        const double w = exact_ot(ap.cost, to_vector(ap.mu_hat.weights),
                                  to_vector(ap.nu_hat.weights))
                             .value;
        s.record("ept_linear_kt_value", inst_desc, res.value,
                 ap.mass_scale * (w - ap.b_lambda), 1e-9, false);

        // Lower bound of the dual-regularized distance over the transport one.
        const auto params0 = default_params();
        const double ost_linear = solve_ost(mu, nu, g, spt, NFunction::linear(), params0).value;
        const double bound =
            res.value + 0.5 * params0.b * params0.lambda * (mu.total_mass() + nu.total_mass());
        s.record("ost_ept_lower_bound", inst_desc, std::min(0.0, ost_linear - bound + 1e-8),
                 0.0, 1e-12, false);
    }
}

void check_entropic(Suite& s) {
    const double eps_grid[] = {0.1, 1.0};
    for (int inst = 0; inst < s.instances; ++inst) {
        const std::uint64_t seed = s.rng();
        const Graph g = s.random_graph(10, 28);
        const auto spt = build_spt(g);
        std::mt19937_64 mrng(seed);
        const auto mu = random_measure(g, 6, mrng);
        const auto nu = random_measure(g, 6, mrng);
        const double eps = eps_grid[inst % 2];
        const auto phi = NFunction::exp_minus();
        const auto params = default_params();
        const auto ap = build_augmented(mu, nu, g, spt, params);
        const std::string inst_desc = describe(seed, g, mu, nu) + " eps=" + std::to_string(eps);

        const auto br = compute_brackets(ap, phi, eps);
        const double a_up = sinkhorn_objective(ap, phi, br.t_upper, eps).objective;
        s.record("bracket_upper_validity", inst_desc, std::max(0.0, a_up - 1.0), 0.0, 1e-6,
                 false);
        if (br.t_lower > 0.0) {
            const double a_lo = sinkhorn_objective(ap, phi, br.t_lower, eps).objective;
            s.record("bracket_lower_validity", inst_desc, std::max(0.0, 1.0 - a_lo), 0.0, 1e-6,
                     false);
        }

        // Alternative entropic lower bracket, verified the same way; a
        // fallback to the exact bracket is itself correct behavior.
        const auto br2 = compute_brackets(ap, phi, eps, BracketMode::Entropic);
        double alt_violation = 0.0;
        if (br2.used_entropic && br2.t_lower > 0.0) {
            const double a_lo2 = sinkhorn_objective(ap, phi, br2.t_lower, eps).objective;
            alt_violation = std::max(0.0, 1.0 - a_lo2);
        }
        s.record("bracket_entropic_alternative", inst_desc, alt_violation, 0.0, 1e-6, false);

        // Monotone objective along a t grid.
        double worst = 0.0;
        double prev = kInf;
        const int grid = 8;
        for (int k = 0; k <= grid; ++k) {
            const double lo = std::max(br.t_lower, 1e-6 * br.t_upper);
            const double t = lo * std::pow(br.t_upper / lo, static_cast<double>(k) / grid);
            const auto rep = sinkhorn_objective(ap, phi, t, eps);
            if (!rep.feasible) continue;
            if (rep.objective > prev) worst = std::max(worst, rep.objective - prev);
            prev = rep.objective;
        }
        s.record("entropic_monotonicity", inst_desc, worst, 0.0, 1e-6, false);
    }
}

void check_entropic_linear(Suite& s) {
    for (int inst = 0; inst < std::max(4, s.instances / 4); ++inst) {
        const std::uint64_t seed = s.rng();
        const Graph g = s.random_graph(10, 24);
        const auto spt = build_spt(g);
        std::mt19937_64 mrng(seed);
        const auto mu = random_measure(g, 5, mrng);
        const auto nu = random_measure(g, 5, mrng);
        EptParams ep;
        ep.base = default_params();
        ep.eps = 0.1;
        const auto phi = NFunction::linear();
        const std::string inst_desc = describe(seed, g, mu, nu);

        const auto res = orlicz_ept(mu, nu, g, spt, phi, ep);
        const auto ap = build_augmented(mu, nu, g, spt, ep.base);

        // Direct route: the search target t satisfies A_eps(t) = 1, which for
        // the limit N-function is the scalar fixed point of
        // s -> entropic_ot_value(cost, eps * s).
        const auto a = to_vector(ap.mu_hat.weights);
        const auto b = to_vector(ap.nu_hat.weights);
        double lo = res.trace.t_lower > 0.0 ? res.trace.t_lower : 1e-9;
        double hi = res.trace.t_upper;
        for (int it = 0; it < 60 && hi - lo > 1e-11 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double w = sinkhorn(ap.cost, a, b, ep.eps * mid, 1e-9, 20000).objective;
            if (w <= mid)
                hi = mid;
            else
                lo = mid;
        }
        const double direct = ap.mass_scale * (hi - ap.b_lambda);
        s.record("entropic_linear_fixed_point", inst_desc, res.value, direct,
                 ep.tol_t_rel * res.trace.t_upper * ap.mass_scale + 1e-6, false);
    }
}

}  // namespace

const std::vector<std::string>& required_checks() {
    static const std::vector<std::string> names = {
        "linear_closed_form",        "power_analytic_value",
        "general_minimizer_value",   "general_minimizer_k",
        "symmetry",                  "triangle_inequality",
        "nonnegativity",             "identity_self_distance",
        "mass_translation_invariance",
        "balanced_reduction",        "balanced_mass_term_zero",
        "sparsity_identity",
        "tree_closed_form",          "tree_wasserstein_closed_form",
        "tree_wasserstein_lp",       "ept_reformulation_lp",
        "ept_linear_kt_value",       "ost_ept_lower_bound",
        "bracket_upper_validity",    "bracket_lower_validity",
        "bracket_entropic_alternative", "entropic_monotonicity",
        "entropic_linear_fixed_point",
    };
    return names;
}

VerifySummary run_verify_suite(std::uint64_t seed, int instances_per_check) {
    Suite s{std::mt19937_64(seed), instances_per_check, {}};
    check_closed_forms(s);
    check_metric_axioms(s);
    check_balanced_reduction(s);
    check_sparsity(s);
    check_trees(s);
    check_ept_linear(s);
    check_entropic(s);
    check_entropic_linear(s);

    VerifySummary summary;
    summary.reports = std::move(s.reports);
    for (const auto& name : required_checks()) {
        const bool present = std::any_of(summary.reports.begin(), summary.reports.end(),
                                         [&](const OracleReport& r) { return r.name == name; });
        if (!present)
            summary.reports.push_back(
                {"coverage_missing:" + name, "registry", 0.0, 0.0, 1.0, 1.0, false, 0.0});
    }
    summary.all_pass = std::all_of(summary.reports.begin(), summary.reports.end(),
                                   [](const OracleReport& r) { return r.pass; });
    return summary;
}

std::string verify_report_json(const VerifySummary& summary) {
    nlohmann::json out;
    out["all_pass"] = summary.all_pass;
    out["checks"] = nlohmann::json::array();
    for (const auto& r : summary.reports) {
        out["checks"].push_back({{"name", r.name},
                                 {"instance", r.instance},
                                 {"main_value", r.main_value},
                                 {"oracle_value", r.oracle_value},
                                 {"abs_err", r.abs_err},
                                 {"rel_err", r.rel_err},
                                 {"tolerance", r.tolerance},
                                 {"pass", r.pass}});
    }
    return out.dump(2);
}

}  // namespace reference
}  // namespace graphot
