#include "graphot/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "graphot/errors.hpp"

namespace graphot {

DiscreteMeasure::DiscreteMeasure(std::vector<std::pair<NodeId, double>> entries) {
    std::map<NodeId, double> merged;
    for (const auto& [node, mass] : entries) {
        if (node < 0) throw param_error("measure support node id must be nonnegative");
        if (mass < 0.0 || !std::isfinite(mass))
            throw param_error("measure masses must be nonnegative and finite");
        merged[node] += mass;
    }
    for (const auto& [node, mass] : merged) {
        if (mass > 0.0) {
            entries_.emplace_back(node, mass);
            total_mass_ += mass;
        }
    }
}

DiscreteMeasure DiscreteMeasure::operator+(const DiscreteMeasure& other) const {
    std::vector<std::pair<NodeId, double>> all = entries_;
    all.insert(all.end(), other.entries_.begin(), other.entries_.end());
    return DiscreteMeasure(std::move(all));
}

void DiscreteMeasure::check_supports(const Graph& g) const {
    for (const auto& [node, mass] : entries_) g.check_node(node);
}

EdgeAggregates edge_aggregates(const DiscreteMeasure& m, const Graph& g,
                               const ShortestPathTree& spt) {
    m.check_supports(g);
    EdgeAggregates agg;
    agg.values.assign(static_cast<std::size_t>(g.edge_count()), 0.0);
    std::vector<double> subtree(static_cast<std::size_t>(g.node_count()), 0.0);
    for (const auto& [node, mass] : m.entries())
        subtree[static_cast<std::size_t>(node)] += mass;
    // Leaves first: push each subtree sum across its parent edge.
    for (auto it = spt.topo_order.rbegin(); it != spt.topo_order.rend(); ++it) {
        const auto xi = static_cast<std::size_t>(*it);
        const EdgeId pe = spt.parent_edge[xi];
        if (pe == kNoEdge) continue;
        agg.values[static_cast<std::size_t>(pe)] += subtree[xi];
        subtree[static_cast<std::size_t>(spt.parent_node[xi])] += subtree[xi];
    }
    return agg;
}

ActiveEdgeSet active_edges(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const ShortestPathTree& spt) {
    std::vector<bool> seen(spt.dist_from_root.size(), false);
    std::vector<EdgeId> out;
    auto walk = [&](const DiscreteMeasure& m) {
        for (const auto& [node, mass] : m.entries()) {
            NodeId cur = node;
            while (spt.parent_edge[static_cast<std::size_t>(cur)] != kNoEdge) {
                const auto ci = static_cast<std::size_t>(cur);
                if (seen[ci]) break;  // rest of the path was already collected
                seen[ci] = true;
                out.push_back(spt.parent_edge[ci]);
                cur = spt.parent_node[ci];
            }
        }
    };
    walk(mu);
    walk(nu);
    std::sort(out.begin(), out.end());
    return ActiveEdgeSet{std::move(out)};
}

std::pair<AugmentedMeasure, AugmentedMeasure> augment(const DiscreteMeasure& mu,
                                                      const DiscreteMeasure& nu) {
    const double scale = mu.total_mass() + nu.total_mass();
    if (!(scale > 0.0)) throw param_error("cannot augment two zero measures");

    std::vector<NodeId> common;
    for (const auto& [node, mass] : mu.entries()) common.push_back(node);
    for (const auto& [node, mass] : nu.entries()) common.push_back(node);
    std::sort(common.begin(), common.end());
    common.erase(std::unique(common.begin(), common.end()), common.end());

    auto build = [&](const DiscreteMeasure& base, double dummy_mass) {
        AugmentedMeasure am;
        am.nodes = common;
        am.nodes.push_back(-1);
        am.weights.assign(am.nodes.size(), 0.0);
        for (const auto& [node, mass] : base.entries()) {
            const auto it = std::lower_bound(common.begin(), common.end(), node);
            am.weights[static_cast<std::size_t>(it - common.begin())] = mass / scale;
        }
        am.weights.back() = dummy_mass / scale;
        return am;
    };
    return {build(mu, nu.total_mass()), build(nu, mu.total_mass())};
}

double shannon_entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p) {
        if (x < 0.0) throw param_error("entropy input must be nonnegative");
        if (x > 0.0) h -= x * (std::log(x) - 1.0);
    }
    return h;
}

DiscreteMeasure read_measure(std::istream& in) {
    std::vector<std::pair<NodeId, double>> entries;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        NodeId node;
        double mass;
        if (!(ls >> node)) continue;
        if (!(ls >> mass)) throw io_error("measure file: malformed entry line");
        entries.emplace_back(node, mass);
    }
    try {
        return DiscreteMeasure(std::move(entries));
    } catch (const param_error& e) {
        throw io_error(std::string("measure file: ") + e.what());
    }
}

DiscreteMeasure load_measure(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open measure file: " + path);
    return read_measure(in);
}

void write_measure(std::ostream& out, const DiscreteMeasure& m) {
    out.precision(17);
    for (const auto& [node, mass] : m.entries()) out << node << " " << mass << "\n";
}

void save_measure(const std::string& path, const DiscreteMeasure& m) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write measure file: " + path);
    write_measure(out, m);
}

}  // namespace graphot
