#include "graphot/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include "graphot/errors.hpp"

namespace graphot {

Graph::Graph(NodeId node_count, std::vector<Edge> edges, NodeId root)
    : node_count_(node_count), root_(root), edges_(std::move(edges)) {
    if (node_count_ <= 0)
        throw param_error("graph must have at least one node");
    if (root_ < 0 || root_ >= node_count_)
        throw param_error("root node id out of range");
    adjacency_.resize(static_cast<std::size_t>(node_count_));
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const Edge& e = edges_[i];
        if (e.u < 0 || e.u >= node_count_ || e.v < 0 || e.v >= node_count_)
            throw param_error("edge endpoint out of range");
        if (e.u == e.v)
            throw param_error("self-loop at node " + std::to_string(e.u));
        if (!(e.weight > 0.0) || !std::isfinite(e.weight))
            throw param_error("edge weights must be positive and finite");
        const EdgeId id = static_cast<EdgeId>(i);
        adjacency_[static_cast<std::size_t>(e.u)].push_back({id, e.v});
        adjacency_[static_cast<std::size_t>(e.v)].push_back({id, e.u});
    }
}

void Graph::check_node(NodeId x) const {
    if (x < 0 || x >= node_count_)
        throw param_error("node id " + std::to_string(x) + " out of range");
}

bool ActiveEdgeSet::contains(EdgeId e) const {
    return std::binary_search(edges.begin(), edges.end(), e);
}

namespace {

struct QueueItem {
    double dist;
    NodeId node;
    bool operator>(const QueueItem& o) const {
        if (dist != o.dist) return dist > o.dist;
        return node > o.node;
    }
};

}  // namespace

ShortestPathTree build_spt(const Graph& g) {
    const NodeId n = g.node_count();
    ShortestPathTree spt;
    spt.dist_from_root.assign(static_cast<std::size_t>(n),
                              std::numeric_limits<double>::infinity());
    spt.parent_edge.assign(static_cast<std::size_t>(n), kNoEdge);
    spt.parent_node.assign(static_cast<std::size_t>(n), -1);
    spt.tie_flag.assign(static_cast<std::size_t>(n), false);

    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<QueueItem>> pq;
    std::vector<bool> settled(static_cast<std::size_t>(n), false);
    spt.dist_from_root[static_cast<std::size_t>(g.root())] = 0.0;
    pq.push({0.0, g.root()});

    while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        const auto ui = static_cast<std::size_t>(u);
        if (settled[ui]) continue;
        if (d > spt.dist_from_root[ui]) continue;
        settled[ui] = true;
        for (const auto& inc : g.adjacency(u)) {
            const auto vi = static_cast<std::size_t>(inc.neighbor);
            const double cand = d + g.edge(inc.edge).weight;
            if (cand < spt.dist_from_root[vi]) {
                spt.dist_from_root[vi] = cand;
                spt.parent_edge[vi] = inc.edge;
                spt.parent_node[vi] = u;
                spt.tie_flag[vi] = false;
                pq.push({cand, inc.neighbor});
            } else if (cand == spt.dist_from_root[vi]) {
                // Second distinct shortest path; keep the smaller predecessor id.
                spt.tie_flag[vi] = true;
                if (u < spt.parent_node[vi]) {
                    spt.parent_edge[vi] = inc.edge;
                    spt.parent_node[vi] = u;
                }
            }
        }
    }

    for (NodeId x = 0; x < n; ++x) {
        if (!settled[static_cast<std::size_t>(x)])
            throw param_error("graph is disconnected: node " + std::to_string(x) +
                              " is unreachable from the root");
    }

    spt.topo_order.resize(static_cast<std::size_t>(n));
    std::iota(spt.topo_order.begin(), spt.topo_order.end(), NodeId{0});
    std::stable_sort(spt.topo_order.begin(), spt.topo_order.end(), [&](NodeId a, NodeId b) {
        return spt.dist_from_root[static_cast<std::size_t>(a)] <
               spt.dist_from_root[static_cast<std::size_t>(b)];
    });
    // A node below a tied node inherits the ambiguity of its root path.
    for (NodeId x : spt.topo_order) {
        const NodeId p = spt.parent_node[static_cast<std::size_t>(x)];
        if (p >= 0 && spt.tie_flag[static_cast<std::size_t>(p)])
            spt.tie_flag[static_cast<std::size_t>(x)] = true;
    }
    return spt;
}

std::vector<double> dijkstra_distances(const Graph& g, NodeId source) {
    g.check_node(source);
    std::vector<double> dist(static_cast<std::size_t>(g.node_count()),
                             std::numeric_limits<double>::infinity());
    std::vector<bool> settled(dist.size(), false);
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<QueueItem>> pq;
    dist[static_cast<std::size_t>(source)] = 0.0;
    pq.push({0.0, source});
    while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        const auto ui = static_cast<std::size_t>(u);
        if (settled[ui]) continue;
        settled[ui] = true;
        for (const auto& inc : g.adjacency(u)) {
            const auto vi = static_cast<std::size_t>(inc.neighbor);
            const double cand = d + g.edge(inc.edge).weight;
            if (cand < dist[vi]) {
                dist[vi] = cand;
                pq.push({cand, inc.neighbor});
            }
        }
    }
    return dist;
}

double graph_distance(const Graph& g, NodeId x, NodeId y) {
    g.check_node(x);
    g.check_node(y);
    if (x == y) return 0.0;
    return dijkstra_distances(g, x)[static_cast<std::size_t>(y)];
}

std::vector<EdgeId> edge_path_to_root(const ShortestPathTree& spt, NodeId x) {
    std::vector<EdgeId> path;
    NodeId cur = x;
    while (spt.parent_edge[static_cast<std::size_t>(cur)] != kNoEdge) {
        path.push_back(spt.parent_edge[static_cast<std::size_t>(cur)]);
        cur = spt.parent_node[static_cast<std::size_t>(cur)];
    }
    return path;
}

namespace {

using Point = std::pair<double, double>;

double euclid(const Point& a, const Point& b) {
    const double dx = a.first - b.first;
    const double dy = a.second - b.second;
    return std::sqrt(dx * dx + dy * dy);
}

// Union-find over node ids.
struct DisjointSets {
    std::vector<NodeId> parent;
    explicit DisjointSets(NodeId n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), NodeId{0});
    }
    NodeId find(NodeId x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    bool unite(NodeId a, NodeId b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[static_cast<std::size_t>(b)] = a;
        return true;
    }
};

Graph build_random_graph(const std::vector<Point>& pos, GraphFlavor flavor,
                         std::mt19937_64& rng) {
    const NodeId m = static_cast<NodeId>(pos.size());
    const double md = static_cast<double>(m);
    std::size_t target =
        flavor == GraphFlavor::Log
            ? static_cast<std::size_t>(std::ceil(md * std::log(md)))
            : static_cast<std::size_t>(std::ceil(md * std::sqrt(md)));
    const std::size_t max_pairs = static_cast<std::size_t>(m) * (m - 1) / 2;
    target = std::min(target, max_pairs);

    std::set<std::pair<NodeId, NodeId>> chosen;
    std::uniform_int_distribution<NodeId> pick(0, m - 1);
    std::vector<Edge> edges;
    edges.reserve(target);
    while (chosen.size() < target) {
        NodeId a = pick(rng);
        NodeId b = pick(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (!chosen.insert({a, b}).second) continue;
        const double w = std::max(euclid(pos[static_cast<std::size_t>(a)],
                                         pos[static_cast<std::size_t>(b)]),
                                  1e-12);
        edges.push_back({a, b, w});
    }

    // Bridge connected components with (n_c - 1) extra edges.
    DisjointSets ds(m);
    for (const Edge& e : edges) ds.unite(e.u, e.v);
    std::vector<NodeId> reps;
    for (NodeId x = 0; x < m; ++x)
        if (ds.find(x) == x) reps.push_back(x);
    if (reps.size() > 1) {
        std::vector<std::vector<NodeId>> members(reps.size());
        std::vector<NodeId> rep_index(static_cast<std::size_t>(m), -1);
        for (std::size_t i = 0; i < reps.size(); ++i)
            rep_index[static_cast<std::size_t>(reps[i])] = static_cast<NodeId>(i);
        for (NodeId x = 0; x < m; ++x)
            members[static_cast<std::size_t>(rep_index[static_cast<std::size_t>(ds.find(x))])]
                .push_back(x);
        for (std::size_t c = 1; c < members.size(); ++c) {
            std::uniform_int_distribution<std::size_t> pa(0, members[0].size() - 1);
            std::uniform_int_distribution<std::size_t> pb(0, members[c].size() - 1);
            const NodeId a = members[0][pa(rng)];
            const NodeId b = members[c][pb(rng)];
            const double w = std::max(euclid(pos[static_cast<std::size_t>(a)],
                                             pos[static_cast<std::size_t>(b)]),
                                      1e-12);
            edges.push_back({std::min(a, b), std::max(a, b), w});
            for (NodeId x : members[c]) members[0].push_back(x);
            ds.unite(a, b);
        }
    }
    return Graph(m, std::move(edges), 0);
}

}  // namespace

Graph generate_graph(NodeId node_count, GraphFlavor flavor, std::uint64_t seed) {
    if (node_count < 2) throw param_error("graph generator needs at least 2 nodes");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Point> pos(static_cast<std::size_t>(node_count));
    for (auto& p : pos) {
        p.first = unit(rng);
        p.second = unit(rng);
    }
    return build_random_graph(pos, flavor, rng);
}

Graph generate_graph_from_points(const std::vector<Point>& points, NodeId max_nodes,
                                 GraphFlavor flavor, std::uint64_t seed) {
    if (max_nodes < 2) throw param_error("graph generator needs at least 2 nodes");
    if (points.size() < 2) throw param_error("need at least 2 input points");
    std::mt19937_64 rng(seed);

    // Farthest-point clustering: greedily pick centers maximizing the distance
    // to the chosen set, then keep the centers as graph nodes.
    const std::size_t k =
        std::min<std::size_t>(static_cast<std::size_t>(max_nodes), points.size());
    std::vector<Point> centers;
    centers.reserve(k);
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    centers.push_back(points[pick(rng)]);
    std::vector<double> best(points.size(), std::numeric_limits<double>::infinity());
    while (centers.size() < k) {
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            best[i] = std::min(best[i], euclid(points[i], centers.back()));
            if (best[i] > far_d) {
                far_d = best[i];
                far = i;
            }
        }
        if (far_d <= 0.0) break;  // all remaining points coincide with centers
        centers.push_back(points[far]);
    }
    return build_random_graph(centers, flavor, rng);
}

Graph read_graph(std::istream& in) {
    std::string line;
    NodeId n = -1, root = -1;
    std::vector<Edge> edges;
    bool header_seen = false;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        if (!header_seen) {
            std::string kw_nodes, kw_root;
            if (!(ls >> kw_nodes)) continue;  // blank line
            if (kw_nodes != "nodes" || !(ls >> n >> kw_root >> root) || kw_root != "root")
                throw io_error("graph file: expected header 'nodes N root Z'");
            header_seen = true;
            continue;
        }
        NodeId u, v;
        double w;
        if (!(ls >> u)) continue;
        if (!(ls >> v >> w)) throw io_error("graph file: malformed edge line");
        edges.push_back({u, v, w});
    }
    if (!header_seen) throw io_error("graph file: missing header");
    try {
        return Graph(n, std::move(edges), root);
    } catch (const param_error& e) {
        throw io_error(std::string("graph file: ") + e.what());
    }
}

Graph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open graph file: " + path);
    return read_graph(in);
}

void write_graph(std::ostream& out, const Graph& g) {
    out << "nodes " << g.node_count() << " root " << g.root() << "\n";
    out.precision(17);
    for (const Edge& e : g.edges()) out << e.u << " " << e.v << " " << e.weight << "\n";
}

void save_graph(const std::string& path, const Graph& g) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write graph file: " + path);
    write_graph(out, g);
}

}  // namespace graphot
