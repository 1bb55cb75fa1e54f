#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "drainage/brownian_skeleton.hpp"
#include "drainage/cluster_tree.hpp"
#include "drainage/stats.hpp"

namespace drainage {

// ---- occupied sites -------------------------------------------------------

struct EtaOptions {
    double pad = 6.0;             // start slice extends pad * sqrt(n) beyond the window
    bool closed_window = false;   // count [0, sqrt n] instead of [0, sqrt n)
    unsigned workers = 0;
};

// Even sites at time 0 inside the counting window.
std::int64_t eta_window_sites(std::int64_t n, bool closed_window);

// One replicate: start every even site of a padded slice at time -n, run n
// steps and count distinct occupied sites in the window.
std::int64_t eta_sample(const LatticeEnvironment& env, std::int64_t n, const EtaOptions& opt = {});

struct EtaReport {
    std::int64_t n = 0;
    stats::MeanSe eta;
    std::int64_t window_sites = 0;
    double exact_mean = 0.0;   // window_sites * P(L >= n), by translation invariance
    double limit = 0.0;        // 1/sqrt(pi)
};
EtaReport eta_estimate(std::uint64_t seed, std::int64_t n, std::size_t replicates, const EtaOptions& opt = {});

// ---- depth tail -----------------------------------------------------------

// P(L >= n) from the gap chain of the two dual walks beside the root:
// steps -2, 0, +2 with probabilities 1/4, 1/2, 1/4, absorbed at 0, started at 2.
double depth_tail_oracle(std::int64_t n);
std::vector<double> depth_tail_table(std::int64_t n_max);  // entries 0..n_max

struct TailRow {
    std::int64_t n = 0;
    double estimate = 0.0, se = 0.0, oracle = 0.0, z = 0.0;
};
// Monte Carlo of P(L >= n) at the root (0,0), one environment per replicate.
// Depth is read from the extracted cluster, truncated at max(ns).
std::vector<TailRow> depth_tail_mc(std::uint64_t seed, const std::vector<std::int64_t>& ns, std::size_t replicates,
                                   unsigned workers = 0);

// ---- tree-pair functionals ---------------------------------------------------

// Bounded functional of the pair (cluster tree, dual tree), both already scaled.
struct TreePairFunctional {
    std::string name;
    double bound = 1.0;
    std::function<double(const RootedTree& forward, const RootedTree& dual)> eval;
};
TreePairFunctional functional_by_name(const std::string& name);
std::vector<std::string> functional_names();

struct KappaOptions {
    double depth_cap = 10.0;  // trees are cut at depth_cap * n
    unsigned workers = 0;
};

struct KappaReport {
    std::int64_t n = 0;
    std::string functional;
    stats::MeanSe direct;       // E sum_k 1{L(k,0) >= n} f(T, That)
    stats::MeanSe count;        // E sum_k 1{L(k,0) >= n}, independent stream
    stats::MeanSe conditional;  // E[f | L >= n], independent stream
    double product = 0.0;
    double product_se = 0.0;
    double z = 0.0;
};
KappaReport kappa_estimate(std::uint64_t seed, std::int64_t n, std::size_t replicates,
                           const TreePairFunctional& f, const KappaOptions& opt = {});

// Cluster and dual tree at the root, scaled by 1/n and cut at cap.
struct ScaledPair {
    RootedTree forward, dual;
};
ScaledPair scaled_tree_pair(const LatticeEnvironment& env, const EvenSite& root, std::int64_t n, std::int64_t cap);

// ---- Horton statistics --------------------------------------------------------

// Order 1 at leaves; a node with a single child keeps the child's order; with
// two or more children it takes the largest, plus one if that is attained twice.
std::vector<int> strahler_orders(const RootedTree& tree);

struct HortonStats {
    std::vector<std::int64_t> counts;  // counts[k - 1] = number of order-k branches
    int max_order = 0;
    std::vector<double> ratios;        // ratios[k - 1] = N_k / N_{k+1}
};
HortonStats horton(const RootedTree& tree);

// Uniform random plane binary tree with the given number of leaves (Remy's
// growth rule). Coordinates are (node index, hop depth); orientation none.
RootedTree uniform_binary_tree(std::size_t leaves, std::uint64_t seed);

struct HortonRatioRow {
    int order = 0;
    stats::MeanSe ratio;
};
// Mean bifurcation ratio per order over trees of `leaves` leaves, keeping
// orders k <= max_order - skip_top (the top orders have too few branches).
std::vector<HortonRatioRow> remy_horton_ratios(std::uint64_t seed, std::size_t leaves, std::size_t trees,
                                               int skip_top = 3, unsigned workers = 0);

// ---- discrete versus continuum trees -------------------------------------------

// Finite samples of both trees; index 0 of each space is its root.
struct TreeSample {
    FiniteMetricSpace forward, dual;
};

struct SummaryOptions {
    double ball_radius = 0.5;
    std::size_t gh_points = 8;
};

std::vector<std::string> summary_names();
std::vector<double> tree_summaries(const TreeSample& s, const FiniteMetricSpace& reference,
                                   const SummaryOptions& opt = {});

struct SummaryRow {
    std::string name;
    double ks_statistic = 0.0;
    double p_value = 1.0;
    double mean_a = 0.0, mean_b = 0.0;
};
struct SummaryReport {
    std::vector<SummaryRow> rows;
    nlohmann::json to_json() const;
};
SummaryReport summary_compare(const std::vector<TreeSample>& a, const std::vector<TreeSample>& b,
                              const FiniteMetricSpace& reference, const SummaryOptions& opt = {});

struct ConvergeOptions {
    std::vector<std::int64_t> ns{100, 400};
    std::size_t samples = 400;     // per side and per n
    std::size_t points = 24;       // sampled points per tree besides root and tips
    double meet_cap = 8.0;         // condition on the dual meeting depth <= meet_cap
    double step = 2e-3;            // continuum grid
    double backward_multiple = 4.0;
    SummaryOptions summary;
    unsigned workers = 0;
};

// Cluster at (0,0) conditioned on n < meeting step <= meet_cap * n, scaled, subsampled.
TreeSample discrete_tree_sample(std::uint64_t seed, std::int64_t n, const ConvergeOptions& opt);
// Skeleton trees in a boundary with |meet| <= meet_cap, subsampled the same way.
TreeSample continuum_tree_sample(std::uint64_t seed, const ConvergeOptions& opt);

struct ConvergeReport {
    std::vector<std::int64_t> ns;
    std::vector<SummaryReport> per_n;
    std::vector<bool> decreasing;    // per summary: KS statistic falls from first to last n
    std::size_t n_decreasing = 0;
    nlohmann::json to_json() const;
};
ConvergeReport converge(std::uint64_t seed, const ConvergeOptions& opt);

} // namespace drainage
