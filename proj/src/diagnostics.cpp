#include "drainage/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "drainage/parallel.hpp"

namespace drainage {

std::int64_t eta_window_sites(std::int64_t n, bool closed_window) {
    if (n < 1) throw std::invalid_argument("eta: n must be at least 1");
    std::int64_t c = 0;
    for (std::int64_t x = 0; closed_window ? x * x <= n : x * x < n; x += 2) ++c;
    return c;
}

std::int64_t eta_sample(const LatticeEnvironment& env, std::int64_t n, const EtaOptions& opt) {
    if (n < 1) throw std::invalid_argument("eta: n must be at least 1");
    if (!(opt.pad >= 0)) throw std::invalid_argument("eta: pad must be non-negative");
    const double root = std::sqrt(static_cast<double>(n));
    auto lo = static_cast<std::int64_t>(std::floor(-opt.pad * root)) - 1;
    auto hi = static_cast<std::int64_t>(std::ceil(root + opt.pad * root)) + 1;
    if (((lo + n) & 1) != 0) --lo;  // even sites at time -n: x + n even
    std::vector<std::int64_t> xs;
    xs.reserve(static_cast<std::size_t>((hi - lo) / 2 + 1));
    for (std::int64_t x = lo; x <= hi; x += 2) xs.push_back(x);
    auto ev = evolve_slice(env, -n, xs, n);
    std::int64_t count = 0;
    for (auto p : ev.positions)
        if (p >= 0 && (opt.closed_window ? p * p <= n : p * p < n)) ++count;
    return count;
}

EtaReport eta_estimate(std::uint64_t seed, std::int64_t n, std::size_t replicates, const EtaOptions& opt) {
    if (replicates < 2) throw std::invalid_argument("eta: need at least two replicates");
    std::vector<double> v(replicates);
    parallel_for(replicates, resolve_workers(opt.workers), [&](std::size_t i) {
        LatticeEnvironment env(derive_seed(seed, i));
        v[i] = static_cast<double>(eta_sample(env, n, opt));
    });
    EtaReport r;
    r.n = n;
    r.eta = stats::mean_se(v);
    r.window_sites = eta_window_sites(n, opt.closed_window);
    r.exact_mean = static_cast<double>(r.window_sites) * depth_tail_oracle(n);
    r.limit = 1.0 / std::sqrt(std::numbers::pi);
    return r;
}

std::vector<double> depth_tail_table(std::int64_t n_max) {
    if (n_max < 0) throw std::invalid_argument("depth_tail_table: negative n");
    // g = half the gap between the dual walks; P(L >= n) = P(g_n > 0)
    std::vector<long double> p(static_cast<std::size_t>(n_max) + 3, 0.0L), q(p.size());
    p[1] = 1.0L;
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
    out[0] = 1.0;
    for (std::int64_t s = 1; s <= n_max; ++s) {
        std::fill(q.begin(), q.end(), 0.0L);
        q[0] = p[0];
        const auto top = static_cast<std::size_t>(std::min<std::int64_t>(s, n_max + 1));
        for (std::size_t g = 1; g <= top; ++g) {
            if (p[g] == 0.0L) continue;
            q[g - 1] += 0.25L * p[g];
            q[g] += 0.5L * p[g];
            q[g + 1] += 0.25L * p[g];
        }
        p.swap(q);
        out[static_cast<std::size_t>(s)] = static_cast<double>(1.0L - p[0]);
    }
    return out;
}

double depth_tail_oracle(std::int64_t n) { return depth_tail_table(n).back(); }

std::vector<TailRow> depth_tail_mc(std::uint64_t seed, const std::vector<std::int64_t>& ns, std::size_t replicates,
                                   unsigned workers) {
    if (ns.empty() || replicates < 2) throw std::invalid_argument("depth_tail_mc: need n values and replicates");
    std::int64_t top = 0;
    for (auto n : ns) {
        if (n < 1) throw std::invalid_argument("depth_tail_mc: n must be at least 1");
        top = std::max(top, n);
    }
    std::vector<std::int64_t> depth(replicates);
    parallel_for(replicates, resolve_workers(workers), [&](std::size_t i) {
        LatticeEnvironment env(derive_seed(seed, i));
        depth[i] = extract_cluster(env, EvenSite(0, 0), top).depth;
    });
    auto table = depth_tail_table(top);
    std::vector<TailRow> rows;
    for (auto n : ns) {
        std::vector<double> ind(replicates);
        for (std::size_t i = 0; i < replicates; ++i) ind[i] = depth[i] >= n ? 1.0 : 0.0;
        auto ms = stats::mean_se(ind);
        TailRow r{n, ms.mean, ms.se, table[static_cast<std::size_t>(n)], 0.0};
        double sd = std::sqrt(r.oracle * (1 - r.oracle) / static_cast<double>(replicates));
        r.z = sd > 0 ? (r.estimate - r.oracle) / sd : 0.0;
        rows.push_back(r);
    }
    return rows;
}

TreePairFunctional functional_by_name(const std::string& name) {
    if (name == "one") return {name, 1.0, [](const RootedTree&, const RootedTree&) { return 1.0; }};
    if (name == "tanh_diam_forward")
        return {name, 1.0, [](const RootedTree& t, const RootedTree&) { return std::tanh(tree_diameter(t)); }};
    if (name == "tanh_diam_dual")
        return {name, 1.0, [](const RootedTree&, const RootedTree& d) { return std::tanh(tree_diameter(d)); }};
    throw std::invalid_argument("unknown functional '" + name + "'");
}

std::vector<std::string> functional_names() { return {"one", "tanh_diam_forward", "tanh_diam_dual"}; }

ScaledPair scaled_tree_pair(const LatticeEnvironment& env, const EvenSite& root, std::int64_t n, std::int64_t cap) {
    return {scale_tree(extract_cluster(env, root, cap), n), scale_tree(extract_dual_tree(env, root, cap + 1), n)};
}

KappaReport kappa_estimate(std::uint64_t seed, std::int64_t n, std::size_t replicates, const TreePairFunctional& f,
                           const KappaOptions& opt) {
    if (n < 1 || replicates < 2) throw std::invalid_argument("kappa: need n >= 1 and at least two replicates");
    if (!(opt.depth_cap >= 1)) throw std::invalid_argument("kappa: depth cap must be at least 1");
    const auto cap = static_cast<std::int64_t>(std::ceil(opt.depth_cap * static_cast<double>(n)));
    const std::int64_t sites = eta_window_sites(n, false);
    const unsigned workers = resolve_workers(opt.workers);

    std::vector<double> direct(replicates), count(replicates), cond(replicates);
    parallel_for(replicates, workers, [&](std::size_t i) {
        LatticeEnvironment env(derive_seed(seed, i, 1));
        double s = 0.0;
        for (std::int64_t k = 0; k < 2 * sites; k += 2) {
            EvenSite root(k, 0);
            if (dual_meeting_step(env, root, n) != -1) continue;  // meeting step <= n means L < n
            auto pair = scaled_tree_pair(env, root, n, cap);
            double v = f.eval(pair.forward, pair.dual);
            if (!(std::fabs(v) <= f.bound)) throw std::runtime_error("kappa: functional exceeded its bound");
            s += v;
        }
        direct[i] = s;

        LatticeEnvironment env2(derive_seed(seed, i, 2));
        double c = 0.0;
        for (std::int64_t k = 0; k < 2 * sites; k += 2)
            if (dual_meeting_step(env2, EvenSite(k, 0), n) == -1) c += 1.0;
        count[i] = c;

        const std::uint64_t base = derive_seed(seed, i, 3);
        for (std::uint64_t a = 0;; ++a) {
            LatticeEnvironment env3(derive_seed(base, a));
            if (dual_meeting_step(env3, EvenSite(0, 0), n) != -1) continue;
            auto pair = scaled_tree_pair(env3, EvenSite(0, 0), n, cap);
            cond[i] = f.eval(pair.forward, pair.dual);
            break;
        }
    });

    KappaReport r;
    r.n = n;
    r.functional = f.name;
    r.direct = stats::mean_se(direct);
    r.count = stats::mean_se(count);
    r.conditional = stats::mean_se(cond);
    r.product = r.count.mean * r.conditional.mean;
    r.product_se = std::sqrt(std::pow(r.count.se * r.conditional.mean, 2) + std::pow(r.count.mean * r.conditional.se, 2));
    double sd = std::sqrt(r.direct.se * r.direct.se + r.product_se * r.product_se);
    r.z = sd > 0 ? (r.direct.mean - r.product) / sd : 0.0;
    return r;
}

std::vector<int> strahler_orders(const RootedTree& tree) {
    tree.check_structure();
    auto ch = tree.children();
    std::vector<std::size_t> bfs{0};
    for (std::size_t q = 0; q < bfs.size(); ++q)
        for (auto c : ch[bfs[q]]) bfs.push_back(c);
    std::vector<int> order(tree.size(), 0);
    for (auto it = bfs.rbegin(); it != bfs.rend(); ++it) {
        const auto v = *it;
        if (ch[v].empty()) {
            order[v] = 1;
            continue;
        }
        int best = 0, ties = 0;
        for (auto c : ch[v]) {
            if (order[c] > best) best = order[c], ties = 1;
            else if (order[c] == best) ++ties;
        }
        order[v] = ties >= 2 ? best + 1 : best;
    }
    return order;
}

HortonStats horton(const RootedTree& tree) {
    auto order = strahler_orders(tree);
    HortonStats h;
    h.max_order = *std::max_element(order.begin(), order.end());
    h.counts.assign(static_cast<std::size_t>(h.max_order), 0);
    for (std::size_t v = 0; v < tree.size(); ++v) {
        bool top = v == 0 || order[static_cast<std::size_t>(tree.parent[v])] != order[v];
        if (top) ++h.counts[static_cast<std::size_t>(order[v] - 1)];
    }
    for (std::size_t k = 0; k + 1 < h.counts.size(); ++k)
        h.ratios.push_back(static_cast<double>(h.counts[k]) / static_cast<double>(h.counts[k + 1]));
    return h;
}

RootedTree uniform_binary_tree(std::size_t leaves, std::uint64_t seed) {
    if (leaves < 1) throw std::invalid_argument("uniform_binary_tree: need at least one leaf");
    const std::size_t total = 2 * leaves - 1;
    std::vector<std::int64_t> parent(total, -1), left(total, -1), right(total, -1);
    std::size_t root = 0, used = 1;
    Rng rng = make_rng(seed);
    for (std::size_t i = 1; i < leaves; ++i) {
        std::uniform_int_distribution<std::size_t> pick(0, used - 1);
        const std::size_t u = pick(rng);
        const bool leaf_left = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
        const std::size_t w = used++, leaf = used++;
        const std::int64_t p = parent[u];
        if (p < 0) root = w;
        else if (left[static_cast<std::size_t>(p)] == static_cast<std::int64_t>(u)) left[static_cast<std::size_t>(p)] = static_cast<std::int64_t>(w);
        else right[static_cast<std::size_t>(p)] = static_cast<std::int64_t>(w);
        parent[w] = p;
        left[w] = static_cast<std::int64_t>(leaf_left ? leaf : u);
        right[w] = static_cast<std::int64_t>(leaf_left ? u : leaf);
        parent[u] = parent[leaf] = static_cast<std::int64_t>(w);
    }
    RootedTree t;
    t.orientation = Orientation::none;
    std::vector<std::size_t> bfs{root};
    std::vector<std::int64_t> newid(total, -1), depth(total, 0);
    newid[root] = 0;
    for (std::size_t q = 0; q < bfs.size(); ++q) {
        const auto v = bfs[q];
        t.nodes.push_back({static_cast<std::int64_t>(q), depth[v]});
        t.parent.push_back(parent[v] < 0 ? -1 : newid[static_cast<std::size_t>(parent[v])]);
        t.depth = std::max(t.depth, depth[v]);
        for (auto c : {left[v], right[v]}) {
            if (c < 0) continue;
            newid[static_cast<std::size_t>(c)] = static_cast<std::int64_t>(bfs.size());
            depth[static_cast<std::size_t>(c)] = depth[v] + 1;
            bfs.push_back(static_cast<std::size_t>(c));
        }
    }
    return t;
}

std::vector<HortonRatioRow> remy_horton_ratios(std::uint64_t seed, std::size_t leaves, std::size_t trees,
                                               int skip_top, unsigned workers) {
    if (trees < 2) throw std::invalid_argument("remy_horton_ratios: need at least two trees");
    std::vector<HortonStats> h(trees);
    parallel_for(trees, resolve_workers(workers),
                 [&](std::size_t i) { h[i] = horton(uniform_binary_tree(leaves, derive_seed(seed, i))); });
    int kmax = h[0].max_order;
    for (const auto& s : h) kmax = std::min(kmax, s.max_order);
    std::vector<HortonRatioRow> rows;
    for (int k = 1; k <= kmax - skip_top; ++k) {
        std::vector<double> r;
        for (const auto& s : h) r.push_back(s.ratios[static_cast<std::size_t>(k - 1)]);
        rows.push_back({k, stats::mean_se(r)});
    }
    return rows;
}

} // namespace drainage
