#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <boost/rational.hpp>
#include "json.hpp"

#include "drainage/lattice_env.hpp"
#include "drainage/metric_geometry.hpp"

namespace drainage {

using Rational = boost::rational<std::int64_t>;

// nodes[0] is the root and parent[0] == -1. For lattice trees every edge has
// the same length, edge_weight (1 before scaling, 1/n after).
struct RootedTree {
    Orientation orientation = Orientation::forward;
    std::vector<SiteCoordinate> nodes;
    std::vector<std::int64_t> parent;
    Rational edge_weight{1};
    std::int64_t depth = 0;  // largest root-to-node hop count
    bool truncated = false;  // extraction stopped at a depth cap
    // For trees built from a lattice root: number of dual steps until the two
    // walks beside the root meet, or -1 when unknown (e.g. truncated first).
    std::int64_t dual_length = -1;

    std::size_t size() const { return nodes.size(); }
    double weight() const { return boost::rational_cast<double>(edge_weight); }
    std::vector<std::vector<std::size_t>> children() const;
    std::vector<std::int64_t> hop_depths() const;
    // Throws std::invalid_argument if the parent array is not a tree rooted at 0.
    void check_structure() const;
};

// Dual envelopes of an even root (x, t): the dual walks from (x-1, t) and
// (x+1, t). left[s], right[s] are their positions at time t - s.
struct DualEnvelope {
    std::vector<std::int64_t> left, right;
    bool met = false;
    std::int64_t meeting_step = -1;  // first s with left[s] == right[s], if met
};

// Follows the envelopes for at most max_steps steps.
DualEnvelope dual_envelope(const LatticeEnvironment& env, const EvenSite& root, std::int64_t max_steps);

// Meeting step of the envelopes, or -1 if it exceeds `cap`. Allocation free.
std::int64_t dual_meeting_step(const LatticeEnvironment& env, const EvenSite& root, std::int64_t cap);

// Everything whose forward path passes through root, as a tree rooted there.
// max_depth < 0 means no cap; with a cap, levels beyond it are dropped and
// `truncated` records whether anything was dropped.
RootedTree extract_cluster(const LatticeEnvironment& env, const EvenSite& root, std::int64_t max_depth = -1);

// The dual tree between the two walks started beside root, rooted where they
// meet. If they have not met within max_depth steps the tree is truncated:
// the nodes on the cap level hang off the leftmost of them, which becomes the root.
RootedTree extract_dual_tree(const LatticeEnvironment& env, const EvenSite& root, std::int64_t max_depth = -1);

RootedTree scale_tree(RootedTree tree, std::int64_t n);

// Weighted diameter, computed with two passes over the tree.
std::int64_t tree_diameter_hops(const RootedTree& tree);
inline double tree_diameter(const RootedTree& tree) {
    return static_cast<double>(tree_diameter_hops(tree)) * tree.weight();
}

// All-pairs distances. Refuses trees above max_nodes (std::length_error).
FiniteMetricSpace tree_metric(const RootedTree& tree, std::size_t max_nodes = 4096);
// Distances between selected nodes only, via parent chains.
FiniteMetricSpace tree_metric_subset(const RootedTree& tree, const std::vector<std::size_t>& nodes);

std::string node_label(const SiteCoordinate& c);

// JSON schema "drainage.tree/1"; Newick with labels "x_t" and branch lengths.
inline constexpr const char* kTreeSchema = "drainage.tree/1";
nlohmann::json tree_to_json(const RootedTree& tree);
RootedTree tree_from_json(const nlohmann::json& j);
std::string tree_to_newick(const RootedTree& tree);
RootedTree tree_from_newick(const std::string& text);

} // namespace drainage
