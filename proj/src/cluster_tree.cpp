#include "drainage/cluster_tree.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace drainage {

std::vector<std::vector<std::size_t>> RootedTree::children() const {
    std::vector<std::vector<std::size_t>> c(size());
    for (std::size_t v = 1; v < size(); ++v) c[static_cast<std::size_t>(parent[v])].push_back(v);
    return c;
}

std::vector<std::int64_t> RootedTree::hop_depths() const {
    // parents may appear after children in the node order, so walk by BFS
    std::vector<std::int64_t> d(size(), -1);
    if (size() == 0) return d;
    auto ch = children();
    std::vector<std::size_t> queue{0};
    d[0] = 0;
    for (std::size_t q = 0; q < queue.size(); ++q)
        for (auto c : ch[queue[q]]) {
            d[c] = d[queue[q]] + 1;
            queue.push_back(c);
        }
    return d;
}

void RootedTree::check_structure() const {
    if (nodes.empty()) throw std::invalid_argument("tree: no nodes");
    if (parent.size() != nodes.size()) throw std::invalid_argument("tree: parent array size mismatch");
    if (parent[0] != -1) throw std::invalid_argument("tree: node 0 must be the root");
    for (std::size_t v = 1; v < size(); ++v)
        if (parent[v] < 0 || static_cast<std::size_t>(parent[v]) >= size() || static_cast<std::size_t>(parent[v]) == v)
            throw std::invalid_argument("tree: bad parent index at node " + std::to_string(v));
    auto d = hop_depths();
    for (auto x : d)
        if (x < 0) throw std::invalid_argument("tree: parent links contain a cycle or a detached node");
    if (edge_weight <= 0) throw std::invalid_argument("tree: edge weight must be positive");
}

DualEnvelope dual_envelope(const LatticeEnvironment& env, const EvenSite& root, std::int64_t max_steps) {
    if (max_steps < 0) throw std::invalid_argument("dual_envelope: negative step count");
    DualEnvelope e;
    std::int64_t l = root.x() - 1, r = root.x() + 1;
    e.left.push_back(l);
    e.right.push_back(r);
    for (std::int64_t s = 1; s <= max_steps; ++s) {
        const std::int64_t time = root.t() - s;
        check_coordinate_range(l - 1, time);
        check_coordinate_range(r + 1, time);
        l -= env.arrow_unchecked(l, time);
        r -= env.arrow_unchecked(r, time);
        e.left.push_back(l);
        e.right.push_back(r);
        if (l == r) {
            e.met = true;
            e.meeting_step = s;
            break;
        }
    }
    return e;
}

std::int64_t dual_meeting_step(const LatticeEnvironment& env, const EvenSite& root, std::int64_t cap) {
    check_coordinate_range(root.x(), root.t() - cap);
    std::int64_t l = root.x() - 1, r = root.x() + 1;
    for (std::int64_t s = 1; s <= cap; ++s) {
        const std::int64_t time = root.t() - s;
        l -= env.arrow_unchecked(l, time);
        r -= env.arrow_unchecked(r, time);
        if (l == r) return s;
    }
    return -1;
}

RootedTree extract_cluster(const LatticeEnvironment& env, const EvenSite& root, std::int64_t max_depth) {
    RootedTree tree;
    tree.orientation = Orientation::forward;
    tree.nodes.push_back(root.coord());
    tree.parent.push_back(-1);

    std::vector<std::int64_t> prev{root.x()};
    std::vector<std::size_t> prev_index{0};
    std::vector<std::int64_t> cur;
    std::vector<std::size_t> cur_parent;
    for (std::int64_t s = 1;; ++s) {
        const std::int64_t time = root.t() - s;
        check_coordinate_range(prev.front() - 1, time);
        check_coordinate_range(prev.back() + 1, time);
        cur.clear();
        cur_parent.clear();
        // preimage of the previous level: p - 1 if it points right, p + 1 if it points left
        for (std::size_t k = 0; k < prev.size(); ++k) {
            const std::int64_t p = prev[k];
            if (env.arrow_unchecked(p - 1, time) == 1) cur.push_back(p - 1), cur_parent.push_back(prev_index[k]);
            if (env.arrow_unchecked(p + 1, time) == -1) cur.push_back(p + 1), cur_parent.push_back(prev_index[k]);
        }
        if (cur.empty()) break;
        if (max_depth >= 0 && s > max_depth) {
            tree.truncated = true;
            break;
        }
        prev_index.clear();
        for (std::size_t k = 0; k < cur.size(); ++k) {
            prev_index.push_back(tree.nodes.size());
            tree.nodes.push_back({cur[k], time});
            tree.parent.push_back(static_cast<std::int64_t>(cur_parent[k]));
        }
        prev.swap(cur);
        tree.depth = s;
    }
    tree.dual_length = dual_meeting_step(env, root, tree.depth + 1);
    return tree;
}

RootedTree extract_dual_tree(const LatticeEnvironment& env, const EvenSite& root, std::int64_t max_depth) {
    const std::int64_t cap = max_depth < 0 ? std::numeric_limits<std::int32_t>::max() : max_depth;
    DualEnvelope e = dual_envelope(env, root, cap);
    const std::int64_t top = e.met ? e.meeting_step : static_cast<std::int64_t>(e.left.size()) - 1;

    RootedTree tree;
    tree.orientation = Orientation::backward;
    tree.truncated = !e.met;
    tree.dual_length = e.met ? e.meeting_step : -1;

    // level s holds the odd sites left[s], left[s] + 2, ..., right[s]
    std::vector<std::size_t> level_base(static_cast<std::size_t>(top) + 1);
    auto width = [&](std::int64_t s) { return (e.right[s] - e.left[s]) / 2 + 1; };

    level_base[top] = 0;
    for (std::int64_t k = 0; k < width(top); ++k) {
        tree.nodes.push_back({e.left[top] + 2 * k, root.t() - top});
        tree.parent.push_back(k == 0 ? -1 : 0);
    }
    for (std::int64_t s = top - 1; s >= 0; --s) {
        level_base[s] = tree.nodes.size();
        const std::int64_t time = root.t() - s;
        for (std::int64_t k = 0; k < width(s); ++k) {
            const std::int64_t y = e.left[s] + 2 * k;
            const std::int64_t py = y - env.arrow_unchecked(y, time - 1);
            if (py < e.left[s + 1] || py > e.right[s + 1])
                throw std::logic_error("extract_dual_tree: dual step left the envelope");
            tree.nodes.push_back({y, time});
            tree.parent.push_back(static_cast<std::int64_t>(level_base[s + 1] + (py - e.left[s + 1]) / 2));
        }
    }
    auto d = tree.hop_depths();
    tree.depth = *std::max_element(d.begin(), d.end());
    return tree;
}

RootedTree scale_tree(RootedTree tree, std::int64_t n) {
    if (n <= 0) throw std::invalid_argument("scale_tree: n must be positive");
    tree.edge_weight = Rational(1, n);
    return tree;
}

std::int64_t tree_diameter_hops(const RootedTree& tree) {
    const std::size_t n = tree.size();
    if (n <= 1) return 0;
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t v = 1; v < n; ++v) {
        auto p = static_cast<std::size_t>(tree.parent[v]);
        adj[v].push_back(p);
        adj[p].push_back(v);
    }
    std::vector<std::int64_t> dist(n);
    auto farthest = [&](std::size_t src) {
        std::fill(dist.begin(), dist.end(), -1);
        std::vector<std::size_t> queue{src};
        dist[src] = 0;
        std::size_t far = src;
        for (std::size_t q = 0; q < queue.size(); ++q) {
            auto v = queue[q];
            if (dist[v] > dist[far]) far = v;
            for (auto w : adj[v])
                if (dist[w] < 0) dist[w] = dist[v] + 1, queue.push_back(w);
        }
        return far;
    };
    auto a = farthest(0);
    auto b = farthest(a);
    return dist[b];
}

std::string node_label(const SiteCoordinate& c) { return std::to_string(c.x) + "_" + std::to_string(c.t); }

FiniteMetricSpace tree_metric(const RootedTree& tree, std::size_t max_nodes) {
    tree.check_structure();
    const std::size_t n = tree.size();
    if (n > max_nodes)
        throw std::length_error("tree_metric: " + std::to_string(n) + " nodes exceeds the cap of " +
                                std::to_string(max_nodes) + "; use tree_metric_subset");
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t v = 1; v < n; ++v) {
        auto p = static_cast<std::size_t>(tree.parent[v]);
        adj[v].push_back(p);
        adj[p].push_back(v);
    }
    std::vector<std::int64_t> ticks(n * n, -1);
    std::vector<std::size_t> queue;
    for (std::size_t s = 0; s < n; ++s) {
        std::int64_t* row = &ticks[s * n];
        queue.assign(1, s);
        row[s] = 0;
        for (std::size_t q = 0; q < queue.size(); ++q)
            for (auto w : adj[queue[q]])
                if (row[w] < 0) row[w] = row[queue[q]] + 1, queue.push_back(w);
    }
    std::vector<std::string> labels;
    labels.reserve(n);
    for (const auto& c : tree.nodes) labels.push_back(node_label(c));
    return FiniteMetricSpace::from_ticks(std::move(labels), std::move(ticks), tree.weight());
}

FiniteMetricSpace tree_metric_subset(const RootedTree& tree, const std::vector<std::size_t>& nodes) {
    auto depth = tree.hop_depths();
    const std::size_t k = nodes.size();
    for (auto v : nodes)
        if (v >= tree.size()) throw std::out_of_range("tree_metric_subset: node index out of range");
    std::vector<std::int64_t> ticks(k * k, 0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            std::size_t a = nodes[i], b = nodes[j];
            std::int64_t hops = 0;
            while (a != b) {
                if (depth[a] >= depth[b]) a = static_cast<std::size_t>(tree.parent[a]);
                else b = static_cast<std::size_t>(tree.parent[b]);
                ++hops;
            }
            ticks[i * k + j] = ticks[j * k + i] = hops;
        }
    std::vector<std::string> labels;
    for (auto v : nodes) labels.push_back(node_label(tree.nodes[v]));
    return FiniteMetricSpace::from_ticks(std::move(labels), std::move(ticks), tree.weight());
}

} // namespace drainage
