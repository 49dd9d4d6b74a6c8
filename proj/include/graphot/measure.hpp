#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "graphot/graph.hpp"

namespace graphot {

/// Nonnegative discrete measure on graph nodes. Duplicate supports are merged
/// by summing masses and zero-mass entries are dropped, so entries() is the
/// support. Immutable after construction.
class DiscreteMeasure {
public:
    DiscreteMeasure() = default;
    explicit DiscreteMeasure(std::vector<std::pair<NodeId, double>> entries);

    const std::vector<std::pair<NodeId, double>>& entries() const { return entries_; }
    double total_mass() const { return total_mass_; }
    bool empty() const { return entries_.empty(); }

    // Entrywise sum of two measures.
    DiscreteMeasure operator+(const DiscreteMeasure& other) const;

    void check_supports(const Graph& g) const;

private:
    std::vector<std::pair<NodeId, double>> entries_;  // sorted by node id
    double total_mass_ = 0.0;
};

/// Per-edge subtree masses value[e] = mu(gamma_e) relative to a shortest-path
/// tree.
struct EdgeAggregates {
    std::vector<double> values;  // dense over all edges
};

/// Probability measure on the augmented node set (base supports plus the
/// dummy point). The dummy point is kept last and identified by node id -1.
struct AugmentedMeasure {
    std::vector<NodeId> nodes;    // graph node ids; final entry is -1 for the dummy
    std::vector<double> weights;  // probabilities summing to 1
};

// mu(gamma_e) for every edge by one reverse-topological sweep, O(|V| + |E|).
EdgeAggregates edge_aggregates(const DiscreteMeasure& m, const Graph& g,
                               const ShortestPathTree& spt);

// Union of the root paths of all supports of both measures.
ActiveEdgeSet active_edges(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const ShortestPathTree& spt);

// Probability measures mu_hat = (mu + nu(G) delta_s)/(mu(G)+nu(G)) and the
// symmetric nu_hat on the common support list supp(mu) u supp(nu) u {s}.
std::pair<AugmentedMeasure, AugmentedMeasure> augment(const DiscreteMeasure& mu,
                                                      const DiscreteMeasure& nu);

// H(p) = -sum p_i (log p_i - 1), with 0 log 0 = 0. Equals 1 plus the standard
// entropy when p sums to 1.
double shannon_entropy(const std::vector<double>& p);

// Text format: one "node_id mass" line per entry; '#' comments allowed.
DiscreteMeasure read_measure(std::istream& in);
DiscreteMeasure load_measure(const std::string& path);
void write_measure(std::ostream& out, const DiscreteMeasure& m);
void save_measure(const std::string& path, const DiscreteMeasure& m);

}  // namespace graphot
