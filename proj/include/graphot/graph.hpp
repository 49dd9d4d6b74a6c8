#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace graphot {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;

constexpr EdgeId kNoEdge = -1;

struct Edge {
    NodeId u;
    NodeId v;
    double weight;  // > 0
};

/// Undirected weighted graph with a designated root node. Immutable after
/// construction; safe for concurrent reads.
class Graph {
public:
    Graph(NodeId node_count, std::vector<Edge> edges, NodeId root);

    NodeId node_count() const { return node_count_; }
    NodeId root() const { return root_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(EdgeId e) const { return edges_[static_cast<std::size_t>(e)]; }
    EdgeId edge_count() const { return static_cast<EdgeId>(edges_.size()); }

    struct Incidence {
        EdgeId edge;
        NodeId neighbor;
    };
    const std::vector<Incidence>& adjacency(NodeId x) const {
        return adjacency_[static_cast<std::size_t>(x)];
    }

    void check_node(NodeId x) const;

private:
    NodeId node_count_;
    NodeId root_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Incidence>> adjacency_;
};

/// Single-source shortest paths from the graph root, stored as a spanning
/// tree. tie_flag marks nodes with two distinct equal-length root paths.
struct ShortestPathTree {
    std::vector<double> dist_from_root;
    std::vector<EdgeId> parent_edge;    // kNoEdge for the root
    std::vector<NodeId> parent_node;    // -1 for the root
    std::vector<NodeId> topo_order;     // nodes by increasing dist_from_root
    std::vector<bool> tie_flag;

    NodeId node_count() const { return static_cast<NodeId>(dist_from_root.size()); }
};

/// Sorted set of edge ids lying on some support's root path.
struct ActiveEdgeSet {
    std::vector<EdgeId> edges;  // sorted ascending

    bool contains(EdgeId e) const;
    std::size_t size() const { return edges.size(); }
};

// Dijkstra from the root with deterministic tie-breaking (smaller predecessor
// node id wins). Throws param_error naming an unreachable node if the graph
// is disconnected.
ShortestPathTree build_spt(const Graph& g);

// Single-source distances from an arbitrary node.
std::vector<double> dijkstra_distances(const Graph& g, NodeId source);

// Shortest-path length between two nodes.
double graph_distance(const Graph& g, NodeId x, NodeId y);

// Edges of the root path [z0, x] in leaf-to-root order; empty for the root.
std::vector<EdgeId> edge_path_to_root(const ShortestPathTree& spt, NodeId x);

enum class GraphFlavor { Log, Sqrt };

// Random connected graph on M nodes: positions uniform in the unit square,
// ceil(M log M) or ceil(M^{3/2}) random edges with Euclidean lengths, then
// one bridging edge per extra connected component.
Graph generate_graph(NodeId node_count, GraphFlavor flavor, std::uint64_t seed);

// Same construction, but node positions are chosen by farthest-point
// clustering of the given 2-d points into at most max_nodes centroids.
Graph generate_graph_from_points(const std::vector<std::pair<double, double>>& points,
                                 NodeId max_nodes, GraphFlavor flavor, std::uint64_t seed);

// Text format: header "nodes N root Z", then one "u v w" line per edge.
// '#' starts a comment.
Graph read_graph(std::istream& in);
Graph load_graph(const std::string& path);
void write_graph(std::ostream& out, const Graph& g);
void save_graph(const std::string& path, const Graph& g);

}  // namespace graphot
