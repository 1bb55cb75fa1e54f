#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "drainage/diagnostics.hpp"
#include "drainage/parallel.hpp"

namespace drainage {

std::vector<std::string> summary_names() {
    return {"dual_diameter", "forward_height", "forward_root_ball", "dual_mean_root_distance", "dual_gh_reference"};
}

std::vector<double> tree_summaries(const TreeSample& s, const FiniteMetricSpace& reference, const SummaryOptions& opt) {
    const auto& f = s.forward;
    const auto& d = s.dual;
    if (f.size() < 2 || d.size() < 2) throw std::invalid_argument("tree_summaries: samples need a root and a point");
    double height = 0.0, ball = 0.0, mean_root = 0.0;
    for (std::size_t j = 1; j < f.size(); ++j) {
        height = std::max(height, f(0, j));
        if (f(0, j) <= opt.ball_radius) ball += 1.0;
    }
    for (std::size_t j = 1; j < d.size(); ++j) mean_root += d(0, j);
    auto head = [&](const FiniteMetricSpace& m) {
        std::vector<std::size_t> idx(std::min(opt.gh_points, m.size()));
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        return m.subspace(idx);
    };
    auto a = head(d), b = head(reference);
    double gh = (a.size() <= 8 && b.size() <= 8) ? gh_exact(a, b) : gh_bounds(a, b).midpoint();
    return {d.diameter(), height, ball / static_cast<double>(f.size() - 1),
            mean_root / static_cast<double>(d.size() - 1), gh};
}

SummaryReport summary_compare(const std::vector<TreeSample>& a, const std::vector<TreeSample>& b,
                              const FiniteMetricSpace& reference, const SummaryOptions& opt) {
    if (a.empty() || b.empty()) throw std::invalid_argument("summary_compare: empty sample");
    const auto names = summary_names();
    std::vector<std::vector<double>> sa(names.size()), sb(names.size());
    for (const auto& s : a) {
        auto v = tree_summaries(s, reference, opt);
        for (std::size_t k = 0; k < v.size(); ++k) sa[k].push_back(v[k]);
    }
    for (const auto& s : b) {
        auto v = tree_summaries(s, reference, opt);
        for (std::size_t k = 0; k < v.size(); ++k) sb[k].push_back(v[k]);
    }
    SummaryReport r;
    for (std::size_t k = 0; k < names.size(); ++k) {
        auto ks = stats::ks_two_sample(sa[k], sb[k]);
        r.rows.push_back({names[k], ks.statistic, ks.p_value, stats::mean_se(sa[k]).mean, stats::mean_se(sb[k]).mean});
    }
    return r;
}

nlohmann::json SummaryReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows)
        rows_json.push_back({{"summary", r.name},
                             {"ks_statistic", r.ks_statistic},
                             {"p_value", r.p_value},
                             {"mean_a", r.mean_a},
                             {"mean_b", r.mean_b}});
    return rows_json;
}

namespace {

std::vector<std::size_t> pick_distinct(std::vector<std::size_t> pool, std::size_t k, Rng& rng) {
    k = std::min(k, pool.size());
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> u(i, pool.size() - 1);
        std::swap(pool[i], pool[u(rng)]);
    }
    pool.resize(k);
    return pool;
}

} // namespace

TreeSample discrete_tree_sample(std::uint64_t seed, std::int64_t n, const ConvergeOptions& opt) {
    if (n < 1) throw std::invalid_argument("discrete_tree_sample: n must be at least 1");
    const auto cap = static_cast<std::int64_t>(std::floor(opt.meet_cap * static_cast<double>(n)));
    for (std::uint64_t a = 0; a < (1u << 24); ++a) {
        LatticeEnvironment env(derive_seed(seed, a));
        const EvenSite root(0, 0);
        const std::int64_t lhat = dual_meeting_step(env, root, cap);
        if (lhat <= n) continue;  // not met by the cap (-1) or met too early
        auto fwd = scale_tree(extract_cluster(env, root), n);
        auto dual = scale_tree(extract_dual_tree(env, root), n);
        Rng rng = make_rng(derive_seed(seed, a, 7));

        std::vector<std::size_t> pool(fwd.size() - 1);
        std::iota(pool.begin(), pool.end(), std::size_t{1});
        auto pick = pick_distinct(pool, opt.points, rng);
        pick.insert(pick.begin(), 0);

        std::vector<std::size_t> tips, rest;
        for (std::size_t v = 1; v < dual.size(); ++v) {
            const auto& c = dual.nodes[v];
            if (c.t == 0 && (c.x == -1 || c.x == 1)) tips.push_back(v);
            else rest.push_back(v);
        }
        if (tips.size() != 2) throw std::logic_error("discrete_tree_sample: dual tree tips not found");
        if (dual.nodes[tips[0]].x > dual.nodes[tips[1]].x) std::swap(tips[0], tips[1]);
        auto dpick = pick_distinct(rest, opt.points, rng);
        dpick.insert(dpick.begin(), {0, tips[1], tips[0]});
        return {tree_metric_subset(fwd, pick), tree_metric_subset(dual, dpick)};
    }
    throw std::runtime_error("discrete_tree_sample: conditioning event not reached");
}

TreeSample continuum_tree_sample(std::uint64_t seed, const ConvergeOptions& opt) {
    for (std::uint64_t a = 0; a < 4096; ++a) {
        auto b = sample_boundary(derive_seed(seed, a, 0), opt.step);
        if (-b.meet_time() > opt.meet_cap) continue;
        const auto want = static_cast<std::size_t>(std::ceil(opt.backward_multiple * static_cast<double>(opt.points)));
        const int finest = static_cast<int>(std::floor(std::log2(1.0 / opt.step) + 1e-9));
        std::vector<SkeletonStart> pts;
        for (int level = 0; level <= finest; ++level) {
            pts = region_points_through_level(b, level);
            if (pts.size() >= want) break;
        }
        if (pts.size() < want) throw std::runtime_error("continuum_tree_sample: region too small for the grid");
        Rng rng = make_rng(derive_seed(seed, a, 7));
        std::vector<std::size_t> pool(pts.size());
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        auto chosen = pick_distinct(pool, opt.points, rng);

        auto back = backward_skeleton(b, pts, derive_seed(seed, a, 1));
        std::vector<SkeletonStart> fstarts;
        std::vector<std::size_t> bidx{0, 1};  // the two boundary tips
        for (auto c : chosen) {
            fstarts.push_back(pts[c]);
            bidx.push_back(c + 2);
        }
        auto fwd = forward_skeleton(back, fstarts, opt.backward_multiple);
        std::vector<std::size_t> fidx(fstarts.size());
        std::iota(fidx.begin(), fidx.end(), std::size_t{0});
        return {skeleton_metric(fwd, fidx, true), skeleton_metric(back, bidx, true)};
    }
    throw std::runtime_error("continuum_tree_sample: no boundary within the depth cap");
}

nlohmann::json ConvergeReport::to_json() const {
    nlohmann::json j;
    j["schema"] = "drainage.converge/1";
    j["ns"] = ns;
    nlohmann::json per = nlohmann::json::array();
    for (std::size_t i = 0; i < ns.size(); ++i) per.push_back({{"n", ns[i]}, {"summaries", per_n[i].to_json()}});
    j["comparisons"] = per;
    nlohmann::json dec = nlohmann::json::object();
    auto names = summary_names();
    for (std::size_t k = 0; k < names.size() && k < decreasing.size(); ++k) dec[names[k]] = static_cast<bool>(decreasing[k]);
    j["ks_decreasing"] = dec;
    j["n_decreasing"] = n_decreasing;
    return j;
}

ConvergeReport converge(std::uint64_t seed, const ConvergeOptions& opt) {
    if (opt.ns.size() < 2) throw std::invalid_argument("converge: need at least two values of n");
    if (opt.samples < 2) throw std::invalid_argument("converge: need at least two samples");
    const unsigned workers = resolve_workers(opt.workers);
    const FiniteMetricSpace reference = continuum_tree_sample(derive_seed(seed, 0, 99), opt).dual;

    std::vector<TreeSample> cont(opt.samples);
    parallel_for(opt.samples, workers, [&](std::size_t i) { cont[i] = continuum_tree_sample(derive_seed(seed, i, 50), opt); });

    ConvergeReport r;
    r.ns = opt.ns;
    for (auto n : opt.ns) {
        std::vector<TreeSample> disc(opt.samples);
        parallel_for(opt.samples, workers, [&](std::size_t i) {
            disc[i] = discrete_tree_sample(derive_seed(seed, i, 100 + static_cast<std::uint64_t>(n)), n, opt);
        });
        r.per_n.push_back(summary_compare(disc, cont, reference, opt.summary));
    }
    const auto& first = r.per_n.front().rows;
    const auto& last = r.per_n.back().rows;
    for (std::size_t k = 0; k < first.size(); ++k) {
        bool dec = last[k].ks_statistic < first[k].ks_statistic;
        r.decreasing.push_back(dec);
        if (dec) ++r.n_decreasing;
    }
    return r;
}

} // namespace drainage
