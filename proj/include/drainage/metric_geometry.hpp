#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "drainage/lattice_env.hpp"

namespace drainage {

// Symmetric distance matrix with labels. When `ticks` is non-empty it holds
// the same distances as exact integers, distance = ticks * unit, and the
// four-point test runs on the integers.
struct FiniteMetricSpace {
    std::vector<std::string> labels;
    std::vector<double> dist;  // row-major, size() x size()
    std::vector<std::int64_t> ticks;
    double unit = 0.0;

    std::size_t size() const { return labels.size(); }
    double operator()(std::size_t i, std::size_t j) const { return dist[i * size() + j]; }
    bool has_exact() const { return !ticks.empty(); }
    std::int64_t tick(std::size_t i, std::size_t j) const { return ticks[i * size() + j]; }
    double diameter() const;

    static FiniteMetricSpace from_rows(std::vector<std::string> labels, const std::vector<std::vector<double>>& rows);
    static FiniteMetricSpace from_ticks(std::vector<std::string> labels, std::vector<std::int64_t> ticks, double unit);

    // Throws std::invalid_argument unless the matrix is a (pseudo)metric up to tol.
    void check_metric(double tol = 1e-9) const;

    FiniteMetricSpace subspace(const std::vector<std::size_t>& idx) const;
};

// Values on the time grid {tick * step}. Forward paths run up in time from
// start_tick, backward paths run down: values[j] sits at start_tick -+ j.
struct GridPath {
    Orientation orientation = Orientation::backward;
    double step = 0.0;
    std::int64_t start_tick = 0;
    std::vector<double> values;

    std::int64_t direction() const { return orientation == Orientation::backward ? -1 : 1; }
    std::int64_t tick_at(std::size_t j) const { return start_tick + direction() * static_cast<std::int64_t>(j); }
    std::int64_t end_tick() const { return tick_at(values.empty() ? 0 : values.size() - 1); }
    double start_time() const { return static_cast<double>(start_tick) * step; }
    bool has_tick(std::int64_t tick) const;
    double at_tick(std::int64_t tick) const;  // throws std::out_of_range
    // Linear interpolation inside the sampled range; throws outside it.
    double at_time(double time) const;
};

struct PathFamily {
    Orientation orientation = Orientation::backward;
    double step = 0.0;
    std::vector<GridPath> paths;
};

struct TreeLikeViolation {
    enum class Kind { duplicate_start, no_coalescence, separated_after_meeting } kind;
    std::size_t a = 0, b = 0;
};

// Pairwise checks on a family: distinct starts, every pair coalesces inside
// the common sampled range, and once two paths agree (within tol) they keep agreeing.
std::vector<TreeLikeViolation> validate_tree_like(const PathFamily& family, double tol = 0.0);

// Tick at which two paths of the same orientation join for good, looking from
// `from_tick` onward in their direction of travel. nullopt if they never do
// within the common range.
std::optional<std::int64_t> coalescence_tick(const GridPath& a, const GridPath& b, std::int64_t from_tick,
                                             double tol = 0.0);

struct PathPoint {
    std::size_t path = 0;
    std::int64_t tick = 0;
};

// Index of a path through (x, tick), or std::invalid_argument.
std::size_t locate_point(const PathFamily& family, double x, std::int64_t tick, double tol = 1e-12);

// Ancestor distance between points on a coalescing family, measured in time:
// forward d = 2*join - s1 - s2, backward d = s1 + s2 - 2*join. Exact in ticks.
FiniteMetricSpace ancestor_metric(const PathFamily& family, const std::vector<PathPoint>& points,
                                  std::vector<std::string> labels = {});

// Compactified distance between paths with possibly different start times;
// each path is frozen at its start value before the start (forward) or after
// it (backward) and held constant past its last sample, values are squashed
// by tanh and time is weighted by 1/(1+|t|).
double path_distance(const GridPath& a, const GridPath& b);

// Gromov-Hausdorff distance, exact, for spaces with at most `cap` points each;
// larger inputs throw std::length_error (use gh_bounds).
double gh_exact(const FiniteMetricSpace& x, const FiniteMetricSpace& y, std::size_t cap = 8);

struct GhBounds {
    double lower = 0.0;
    double upper = 0.0;
    double midpoint() const { return 0.5 * (lower + upper); }
};
// Lower and upper bounds on the distance itself, for spaces of any size.
GhBounds gh_bounds(const FiniteMetricSpace& x, const FiniteMetricSpace& y);

// Distortion of a correspondence given as (x index, y index) pairs.
double distortion(const FiniteMetricSpace& x, const FiniteMetricSpace& y,
                  const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

struct FourPointReport {
    bool ok = true;
    double worst_excess = 0.0;  // largest (top sum - middle sum) seen, in distance units
    std::array<std::size_t, 4> worst{};
};

// Checks every quadruple (repeats allowed, which covers the triangle
// inequality): the two largest of the three pairwise sums differ by <= tol.
FourPointReport four_point_report(const FiniteMetricSpace& x, double tol);
inline bool four_point_check(const FiniteMetricSpace& x, double tol) { return four_point_report(x, tol).ok; }

// CSV: first line "schema,drainage.metric/1", second line "label,<labels...>",
// then one row per point: "<label>,<distances...>".
inline constexpr const char* kMetricSchema = "drainage.metric/1";
void write_metric_csv(std::ostream& os, const FiniteMetricSpace& m);
FiniteMetricSpace read_metric_csv(std::istream& is);

} // namespace drainage
