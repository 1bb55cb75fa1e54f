#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "json.hpp"

#include "drainage/metric_geometry.hpp"

namespace drainage {

// How two simulated paths are judged to have met between grid points.
// sign_change: only when their order flips (or they coincide) at a grid point.
// brownian_bridge: additionally with the bridge crossing probability
// exp(-d0 * d1 / step) for a difference of two independent Brownian motions.
enum class CrossingRule { sign_change, brownian_bridge };

// Two backward Brownian paths sampled on ticks 0, -1, -2, ...; both start at 0.
// Increments are drawn in the order (B1, B2) per tick from a stream seeded by `seed`.
struct BrownianPair {
    GridPath b1, b2;
};
BrownianPair sample_brownian_pair(std::uint64_t seed, double step, std::int64_t ticks);

// Region between two backward paths that start together at time 0 and rejoin
// at meet_tick < 0. Ticks are multiples of `step`.
struct BoundaryPair {
    GridPath upper, lower;     // backward, start_tick 0, upper >= lower
    std::int64_t meet_tick = 0;
    double step = 0.0;
    // The excursion outlived max_depth: paths stop at meet_tick without meeting.
    bool censored = false;
    double meet_time() const { return static_cast<double>(meet_tick) * step; }
    std::int64_t depth_ticks() const { return -meet_tick; }
};

struct BoundaryOptions {
    double horizon = 8.0;           // simulated length per chunk, in time units
    int max_extensions = 256;       // chunks appended while looking for the excursion
    double max_depth = 64.0;        // censor excursions longer than this
    CrossingRule rule = CrossingRule::brownian_bridge;
};

// Boundary of the coalescing region at the origin: two independent Brownian
// motions, cut at the start of the first excursion of their difference that
// lasts longer than one time unit and run until that excursion ends.
BoundaryPair sample_boundary(std::uint64_t seed, double step, const BoundaryOptions& opt = {});

struct GammaResult {
    bool in_domain = false;       // false: inputs returned unchanged
    GridPath upper, lower;
    std::int64_t zero_tick = 0;   // input tick where the recentred pair begins
    std::int64_t meet_tick = 0;   // output tick where the pair coalesces
};

// Deterministic maps on sampled pairs (sign-change contacts). gamma_map picks
// the first excursion longer than one unit; gamma_n_map(n) picks the first
// time |f1 - f2| reaches 1/n followed by a zero-free stretch of length > 1.
GammaResult gamma_map(const GridPath& f1, const GridPath& f2);
GammaResult gamma_n_map(const GridPath& f1, const GridPath& f2, std::int64_t n);

// Sup over common ticks of the larger coordinate gap between two pairs.
double pair_sup_distance(const GridPath& u1, const GridPath& l1, const GridPath& u2, const GridPath& l2,
                         std::int64_t depth_ticks);

struct ConditionedPairOptions {
    double horizon = 64.0;                 // censor coalescence beyond this depth
    std::int64_t max_attempts = 1 << 26;
    CrossingRule rule = CrossingRule::brownian_bridge;
    bool keep_paths = true;
};

// Backward paths from (1/n, 0) and (0, 0), conditioned to stay apart for more
// than one time unit (rejection sampling). After meeting both follow the upper one.
struct ConditionedPair {
    GridPath upper, lower;
    std::int64_t meet_tick = 0;   // negative; unset when censored
    bool censored = false;
    std::int64_t attempts = 0;
};
ConditionedPair sample_conditioned_pair(std::uint64_t seed, std::int64_t n, double step,
                                        const ConditionedPairOptions& opt = {});

struct AcceptanceCount {
    std::int64_t accepted = 0;
    std::int64_t trials = 0;
    double rate() const { return trials ? static_cast<double>(accepted) / static_cast<double>(trials) : 0.0; }
};
// Only simulates the gap process; each trial is one proposal of the sampler above.
AcceptanceCount conditioned_acceptance(std::uint64_t seed, std::int64_t n, double step, std::int64_t trials,
                                       CrossingRule rule = CrossingRule::brownian_bridge);

// A point of the region strictly inside the boundary; tick = -depth.
struct SkeletonStart {
    double x = 0.0;
    std::int64_t tick = 0;
};

// Dyadic raster of the region, coarse to fine: level j uses spacing 2^-j and
// lists the points not already present at coarser levels, ordered by depth
// then by x. Throws std::invalid_argument if the grid cannot supply `count`.
std::vector<SkeletonStart> enumerate_region(const BoundaryPair& b, std::size_t count);
// All points of levels 0..level.
std::vector<SkeletonStart> region_points_through_level(const BoundaryPair& b, int level);

struct Skeleton {
    Orientation orientation = Orientation::backward;
    double step = 0.0;
    BoundaryPair boundary;
    // Backward skeletons: paths 0 and 1 are the boundary paths seen from tick -1,
    // then one path per start. Forward skeletons: one path per start.
    PathFamily family;
    std::vector<SkeletonStart> starts;
    std::vector<std::int64_t> merge_target;  // family index a path joined, -1 if none
    std::vector<std::int64_t> merge_tick;
};

Skeleton backward_skeleton(const BoundaryPair& b, std::size_t k, std::uint64_t seed,
                           CrossingRule rule = CrossingRule::brownian_bridge);
Skeleton backward_skeleton(const BoundaryPair& b, const std::vector<SkeletonStart>& starts, std::uint64_t seed,
                           CrossingRule rule = CrossingRule::brownian_bridge);

// Forward paths squeezed between the backward paths of `backward`: at each
// step a forward path moves to the midpoint of the nearest backward paths
// that were below and above it one tick earlier. Requires at least
// density_multiple * (number of starts) backward paths.
Skeleton forward_skeleton(const Skeleton& backward, std::size_t k, double density_multiple = 4.0);
Skeleton forward_skeleton(const Skeleton& backward, const std::vector<SkeletonStart>& starts,
                          double density_multiple = 4.0);

// Ancestor metric on the start points of the given family paths. With
// include_root the coalescence point is added first: (0, 0) for forward
// skeletons, the boundary meeting point for backward ones.
FiniteMetricSpace skeleton_metric(const Skeleton& s, const std::vector<std::size_t>& paths, bool include_root);
// First m family paths; forward skeletons also get the root.
FiniteMetricSpace skeleton_metric(const Skeleton& s, std::size_t m);

inline constexpr const char* kSkeletonSchema = "drainage.skeleton/1";
nlohmann::json skeleton_to_json(const Skeleton& s);
nlohmann::json boundary_to_json(const BoundaryPair& b);

} // namespace drainage
