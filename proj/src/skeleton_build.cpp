#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <stdexcept>
#include <utility>

#include "drainage/brownian_skeleton.hpp"
#include "drainage/parallel.hpp"

namespace drainage {

namespace {

void check_boundary(const BoundaryPair& b) {
    if (b.censored) throw std::invalid_argument("boundary: censored region (the paths never met)");
    const std::int64_t k = b.depth_ticks();
    if (k < 2 || !(b.step > 0)) throw std::invalid_argument("boundary: empty region");
    if (b.upper.values.size() < static_cast<std::size_t>(k) + 1 ||
        b.lower.values.size() < static_cast<std::size_t>(k) + 1)
        throw std::invalid_argument("boundary: paths shorter than the region");
}

// Visits region points level by level; the visitor returns false to stop.
// Returns false if the visitor stopped the walk.
bool walk_region(const BoundaryPair& b, int max_level, const std::function<bool(const SkeletonStart&)>& visit) {
    check_boundary(b);
    const std::int64_t depth = b.depth_ticks();
    const double bottom = static_cast<double>(depth) * b.step;
    for (int level = 0; level <= max_level; ++level) {
        const double h = std::ldexp(1.0, -level);
        if (h < b.step * (1.0 - 1e-12)) throw std::invalid_argument("region raster is finer than the time grid");
        for (std::int64_t i = 1; static_cast<double>(i) * h < bottom; ++i) {
            const std::int64_t d = std::llround(static_cast<double>(i) * h / b.step);
            if (d < 1 || d >= depth) continue;
            const double lo = b.lower.values[static_cast<std::size_t>(d)];
            const double hi = b.upper.values[static_cast<std::size_t>(d)];
            for (auto l = static_cast<std::int64_t>(std::floor(lo / h)); static_cast<double>(l) * h < hi; ++l) {
                const double x = static_cast<double>(l) * h;
                if (!(x > lo)) continue;
                if (level > 0 && i % 2 == 0 && l % 2 == 0) continue;  // present at a coarser level
                if (!visit({x, -d})) return false;
            }
        }
    }
    return true;
}

void check_starts(const BoundaryPair& b, const std::vector<SkeletonStart>& starts) {
    check_boundary(b);
    std::set<std::pair<std::int64_t, double>> seen;
    for (const auto& s : starts) {
        const std::int64_t d = -s.tick;
        if (d < 1 || d >= b.depth_ticks()) throw std::invalid_argument("skeleton start outside the region (time)");
        if (!(s.x > b.lower.values[d] && s.x < b.upper.values[d]))
            throw std::invalid_argument("skeleton start outside the region (space)");
        if (!seen.insert({s.tick, s.x}).second) throw std::invalid_argument("duplicate skeleton start");
    }
}

} // namespace

std::vector<SkeletonStart> enumerate_region(const BoundaryPair& b, std::size_t count) {
    std::vector<SkeletonStart> out;
    if (count == 0) return out;
    const int finest = static_cast<int>(std::floor(std::log2(1.0 / b.step) + 1e-9));
    walk_region(b, finest, [&](const SkeletonStart& s) {
        out.push_back(s);
        return out.size() < count;
    });
    if (out.size() < count)
        throw std::invalid_argument("enumerate_region: the time grid supports only " + std::to_string(out.size()) +
                                    " points");
    return out;
}

std::vector<SkeletonStart> region_points_through_level(const BoundaryPair& b, int level) {
    std::vector<SkeletonStart> out;
    walk_region(b, level, [&](const SkeletonStart& s) {
        out.push_back(s);
        return true;
    });
    return out;
}

Skeleton backward_skeleton(const BoundaryPair& b, std::size_t k, std::uint64_t seed, CrossingRule rule) {
    return backward_skeleton(b, enumerate_region(b, k), seed, rule);
}

Skeleton backward_skeleton(const BoundaryPair& b, const std::vector<SkeletonStart>& starts, std::uint64_t seed,
                           CrossingRule rule) {
    check_starts(b, starts);
    const std::int64_t depth = b.depth_ticks();
    const double step = b.step;
    const double sd = std::sqrt(step);
    const std::size_t np = starts.size() + 2;  // 0 upper, 1 lower, then starts

    std::vector<std::int64_t> sdepth(np, 1), mdepth(np, -1), target(np, -1);
    std::vector<std::vector<double>> own(np);
    std::vector<std::vector<std::size_t>> begin_at(static_cast<std::size_t>(depth));
    for (std::size_t i = 0; i < starts.size(); ++i) {
        sdepth[i + 2] = -starts[i].tick;
        own[i + 2].push_back(starts[i].x);
        begin_at[static_cast<std::size_t>(sdepth[i + 2])].push_back(i + 2);
    }

    auto value = [&](std::size_t p, std::int64_t d) {
        if (p == 0) return b.upper.values[static_cast<std::size_t>(d)];
        if (p == 1) return b.lower.values[static_cast<std::size_t>(d)];
        return own[p][static_cast<std::size_t>(d - sdepth[p])];
    };

    Rng normals = make_rng(derive_seed(seed, 0, 0));
    Rng uniforms = make_rng(derive_seed(seed, 0, 1));
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unit;

    // free paths ordered bottom to top; the boundaries sit at the two ends
    std::vector<std::size_t> order{1, 0};
    auto insert_sorted = [&](std::size_t p, std::int64_t d) {
        const double v = value(p, d);
        auto it = std::upper_bound(order.begin() + 1, order.end() - 1, v,
                                   [&](double x, std::size_t q) { return x < value(q, d); });
        order.insert(it, p);
    };
    for (auto p : begin_at[1]) insert_sorted(p, 1);

    for (std::int64_t d = 1; d < depth; ++d) {
        for (std::size_t i = 1; i + 1 < order.size(); ++i) {
            auto& v = own[order[i]];
            v.push_back(v.back() + sd * gauss(normals));
        }
        // resolve contacts between neighbours over the step d -> d + 1
        std::size_t i = 0;
        while (i + 1 < order.size()) {
            const std::size_t lo = order[i], hi = order[i + 1];
            if (lo == 1 && hi == 0) break;  // only the boundaries remain
            const double d0 = value(hi, d) - value(lo, d);
            const double d1 = value(hi, d + 1) - value(lo, d + 1);
            bool hit = d0 <= 0.0 || d1 <= 0.0;
            if (!hit && rule == CrossingRule::brownian_bridge) hit = unit(uniforms) < std::exp(-d0 * d1 / step);
            if (!hit) {
                ++i;
                continue;
            }
            const std::size_t loser = std::max(lo, hi);
            const std::size_t winner = std::min(lo, hi);
            target[loser] = static_cast<std::int64_t>(winner);
            mdepth[loser] = d + 1;
            own[loser].pop_back();
            order.erase(order.begin() + static_cast<std::ptrdiff_t>(i + (loser == lo ? 0 : 1)));
            if (i > 0) --i;
        }
        if (d + 1 < depth)
            for (auto p : begin_at[static_cast<std::size_t>(d + 1)]) insert_sorted(p, d + 1);
    }
    if (order.size() != 2) throw std::logic_error("backward_skeleton: path survived past the boundary meeting");
    target[1] = 0;
    mdepth[1] = depth;

    Skeleton s;
    s.orientation = Orientation::backward;
    s.step = step;
    s.boundary = b;
    s.starts = starts;
    s.family.orientation = Orientation::backward;
    s.family.step = step;
    s.family.paths.resize(np);
    for (std::size_t p = 0; p < np; ++p) {
        GridPath& g = s.family.paths[p];
        g.orientation = Orientation::backward;
        g.step = step;
        g.start_tick = -sdepth[p];
        g.values.reserve(static_cast<std::size_t>(depth - sdepth[p] + 1));
        for (std::int64_t d = sdepth[p]; d <= depth; ++d) {
            if (p < 2) g.values.push_back(value(p, d));
            else if (d < mdepth[p]) g.values.push_back(own[p][static_cast<std::size_t>(d - sdepth[p])]);
            else {
                const auto& t = s.family.paths[static_cast<std::size_t>(target[p])];
                g.values.push_back(t.at_tick(-d));
            }
        }
    }
    s.merge_target = target;
    s.merge_tick.resize(np);
    for (std::size_t p = 0; p < np; ++p) s.merge_tick[p] = mdepth[p] < 0 ? 0 : -mdepth[p];
    return s;
}

Skeleton forward_skeleton(const Skeleton& backward, std::size_t k, double density_multiple) {
    return forward_skeleton(backward, enumerate_region(backward.boundary, k), density_multiple);
}

Skeleton forward_skeleton(const Skeleton& backward, const std::vector<SkeletonStart>& starts,
                          double density_multiple) {
    if (backward.orientation != Orientation::backward)
        throw std::invalid_argument("forward_skeleton: needs a backward skeleton");
    const BoundaryPair& b = backward.boundary;
    check_starts(b, starts);
    const std::size_t interior = backward.family.paths.size() - 2;
    if (static_cast<double>(interior) < density_multiple * static_cast<double>(starts.size()))
        throw std::invalid_argument("forward_skeleton: backward skeleton too sparse (" + std::to_string(interior) +
                                    " paths for " + std::to_string(starts.size()) + " forward paths)");
    const std::int64_t depth = b.depth_ticks();
    const auto& fam = backward.family.paths;

    std::int64_t top = 0;
    for (const auto& s : starts) top = std::max(top, -s.tick);

    // backward path p is an edge of the tree between depths k and k-1 when it
    // exists at k-1 and has not joined another path before k; the step into
    // its merge depth m counts, since that segment is where it joins
    std::vector<std::vector<std::size_t>> add_at(static_cast<std::size_t>(top) + 1);
    for (std::size_t p = 2; p < fam.size(); ++p) {
        const std::int64_t s = -fam[p].start_tick;
        const std::int64_t m = -backward.merge_tick[p];
        const std::int64_t hi = std::min(m, top);
        if (hi >= s + 1) add_at[static_cast<std::size_t>(hi)].push_back(p);
    }

    std::vector<std::vector<double>> pos(starts.size());
    for (std::size_t f = 0; f < starts.size(); ++f) {
        pos[f].assign(static_cast<std::size_t>(-starts[f].tick) + 1, 0.0);
        pos[f].back() = starts[f].x;
    }

    std::vector<std::size_t> active;
    std::vector<std::pair<double, double>> rows;
    for (std::int64_t k = top; k >= 1; --k) {
        for (auto p : add_at[static_cast<std::size_t>(k)]) active.push_back(p);
        active.erase(std::remove_if(active.begin(), active.end(),
                                    [&](std::size_t p) { return -fam[p].start_tick > k - 1; }),
                     active.end());
        rows.clear();
        rows.emplace_back(b.lower.values[k], b.lower.values[k - 1]);
        rows.emplace_back(b.upper.values[k], b.upper.values[k - 1]);
        for (auto p : active) rows.emplace_back(fam[p].at_tick(-k), fam[p].at_tick(-(k - 1)));
        std::sort(rows.begin(), rows.end());
        for (std::size_t f = 0; f < starts.size(); ++f) {
            if (-starts[f].tick < k) continue;
            const double x = pos[f][static_cast<std::size_t>(k)];
            auto right = std::upper_bound(rows.begin(), rows.end(), x,
                                          [](double v, const std::pair<double, double>& r) { return v < r.first; });
            if (right == rows.begin() || right == rows.end())
                throw std::logic_error("forward_skeleton: forward path left the region");
            auto left = right - 1;
            pos[f][static_cast<std::size_t>(k - 1)] = 0.5 * (left->second + right->second);
        }
    }

    Skeleton s;
    s.orientation = Orientation::forward;
    s.step = b.step;
    s.boundary = b;
    s.starts = starts;
    s.family.orientation = Orientation::forward;
    s.family.step = b.step;
    for (std::size_t f = 0; f < starts.size(); ++f) {
        GridPath g;
        g.orientation = Orientation::forward;
        g.step = b.step;
        g.start_tick = starts[f].tick;
        g.values.assign(pos[f].rbegin(), pos[f].rend());
        s.family.paths.push_back(std::move(g));
    }
    // record the first earlier path each forward path runs into
    s.merge_target.assign(starts.size(), -1);
    s.merge_tick.assign(starts.size(), 0);
    for (std::size_t f = 0; f < starts.size(); ++f) {
        std::int64_t best_tick = 1;
        for (std::size_t g = 0; g < f; ++g) {
            const std::int64_t from = std::max(starts[f].tick, starts[g].tick);
            auto t = coalescence_tick(s.family.paths[f], s.family.paths[g], from);
            if (t && *t < best_tick) best_tick = *t, s.merge_target[f] = static_cast<std::int64_t>(g);
        }
        if (s.merge_target[f] >= 0) s.merge_tick[f] = best_tick;
    }
    (void)depth;
    return s;
}

FiniteMetricSpace skeleton_metric(const Skeleton& s, const std::vector<std::size_t>& paths, bool include_root) {
    std::vector<PathPoint> pts;
    std::vector<std::string> labels;
    if (s.family.paths.empty()) throw std::invalid_argument("skeleton_metric: empty skeleton");
    if (include_root) {
        if (s.orientation == Orientation::forward) pts.push_back({0, 0});
        else pts.push_back({0, s.boundary.meet_tick});
        labels.emplace_back("root");
    }
    for (auto p : paths) {
        if (p >= s.family.paths.size()) throw std::invalid_argument("skeleton_metric: path index out of range");
        pts.push_back({p, s.family.paths[p].start_tick});
        labels.push_back("p" + std::to_string(p));
    }
    return ancestor_metric(s.family, pts, std::move(labels));
}

FiniteMetricSpace skeleton_metric(const Skeleton& s, std::size_t m) {
    if (m > s.family.paths.size())
        throw std::invalid_argument("skeleton_metric: asked for " + std::to_string(m) + " points, skeleton has " +
                                    std::to_string(s.family.paths.size()));
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    return skeleton_metric(s, idx, s.orientation == Orientation::forward);
}

} // namespace drainage
