#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "drainage/cluster_tree.hpp"

using namespace drainage;

namespace {

// L >= n at the root (0,0) iff some even site n levels down flows into it.
// Independent of the cluster extraction: follows each candidate's forward path.
bool reaches_depth(const LatticeEnvironment& env, std::int64_t n) {
    for (std::int64_t y = -n; y <= n; y += 2) {
        auto p = env.forward_path(EvenSite(y, -n), n);
        if (p.positions.back() == 0) return true;
    }
    return false;
}

// Sites of the backward light cone of (0,0) down to depth 3, one column wider
// than strictly needed on each side.
std::vector<SiteCoordinate> light_cone() {
    std::vector<SiteCoordinate> sites;
    for (std::int64_t s = 1; s <= 3; ++s)
        for (std::int64_t y = -(s + 2); y <= s + 2; ++y)
            if (((y - s) & 1) == 0) sites.push_back({y, -s});
    return sites;
}

LatticeEnvironment pinned_env(const std::vector<SiteCoordinate>& sites, unsigned mask) {
    std::vector<std::pair<SiteCoordinate, int>> pins;
    for (std::size_t i = 0; i < sites.size(); ++i) pins.push_back({sites[i], (mask >> i) & 1 ? 1 : -1});
    return LatticeEnvironment(12345, pins);
}

} // namespace

TEST_CASE("root with no children has depth 0 and a three-node dual tree") {
    LatticeEnvironment env(1, {{SiteCoordinate{-1, -1}, -1}, {SiteCoordinate{1, -1}, 1}});
    auto c = extract_cluster(env, EvenSite(0, 0));
    CHECK(c.size() == 1);
    CHECK(c.depth == 0);
    CHECK(c.dual_length == 1);
    auto d = extract_dual_tree(env, EvenSite(0, 0));
    REQUIRE(d.size() == 3);
    CHECK(d.nodes[0] == SiteCoordinate{0, -1});
    CHECK(d.depth == 1);
    CHECK(d.dual_length == 1);
    std::set<std::int64_t> tips{d.nodes[1].x, d.nodes[2].x};
    CHECK(tips == std::set<std::int64_t>{-1, 1});
}

TEST_CASE("two-bit enumeration gives P(L >= 1) = 3/4") {
    int hits = 0;
    for (int m = 0; m < 4; ++m) {
        LatticeEnvironment env(9, {{SiteCoordinate{-1, -1}, m & 1 ? 1 : -1}, {SiteCoordinate{1, -1}, m & 2 ? 1 : -1}});
        hits += extract_cluster(env, EvenSite(0, 0)).depth >= 1;
    }
    CHECK(hits == 3);
}

TEST_CASE("exhaustive light cone: depth and dual meeting step agree") {
    const auto sites = light_cone();
    REQUIRE(sites.size() <= 20);
    const unsigned total = 1u << sites.size();
    std::int64_t count[4] = {0, 0, 0, 0};
    for (unsigned mask = 0; mask < total; ++mask) {
        auto env = pinned_env(sites, mask);
        auto c = extract_cluster(env, EvenSite(0, 0), 3);
        const std::int64_t lhat = dual_meeting_step(env, EvenSite(0, 0), 4);
        for (std::int64_t n = 1; n <= 3; ++n) {
            const bool deep = reaches_depth(env, n);
            CHECK((c.depth >= n) == deep);
            CHECK(deep == (lhat == -1 || lhat > n));
            count[n] += deep;
        }
    }
    // exact probabilities 3/4, 5/8, 35/64
    CHECK(count[1] * 4 == 3 * std::int64_t(total));
    CHECK(count[2] * 8 == 5 * std::int64_t(total));
    CHECK(count[3] * 64 == 35 * std::int64_t(total));
}

TEST_CASE("depth equals dual meeting step minus one on random roots") {
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        LatticeEnvironment env(seed);
        auto c = extract_cluster(env, EvenSite(0, 0), 5000);
        if (c.truncated) continue;
        auto d = extract_dual_tree(env, EvenSite(0, 0));
        REQUIRE(d.dual_length > 0);
        CHECK(c.depth == d.dual_length - 1);
        CHECK(c.dual_length == d.dual_length);
    }
}

TEST_CASE("cluster levels fill the gap between the dual envelopes") {
    for (std::uint64_t seed = 100; seed < 300; ++seed) {
        LatticeEnvironment env(seed);
        const EvenSite root(6, 4);
        auto c = extract_cluster(env, root, 400);
        if (c.truncated) continue;
        auto e = dual_envelope(env, root, c.depth + 1);
        REQUIRE(e.met);
        std::vector<std::vector<std::int64_t>> level(static_cast<std::size_t>(c.depth) + 1);
        for (const auto& n : c.nodes) level[static_cast<std::size_t>(root.t() - n.t)].push_back(n.x);
        for (std::size_t s = 0; s < level.size(); ++s) {
            std::sort(level[s].begin(), level[s].end());
            std::vector<std::int64_t> expect;
            for (std::int64_t y = e.left[s] + 1; y < e.right[s]; y += 2) expect.push_back(y);
            CHECK(level[s] == expect);
        }
    }
}

TEST_CASE("cluster edges follow arrows; dual edges follow dual steps") {
    LatticeEnvironment env(77);
    auto c = extract_cluster(env, EvenSite(0, 0), 300);
    for (std::size_t v = 1; v < c.size(); ++v) {
        auto p = c.nodes[static_cast<std::size_t>(c.parent[v])];
        CHECK(env.step_forward(EvenSite(c.nodes[v])).coord() == p);
    }
    auto d = extract_dual_tree(env, EvenSite(0, 0), 300);
    for (std::size_t v = 1; v < d.size(); ++v) {
        auto p = d.nodes[static_cast<std::size_t>(d.parent[v])];
        if (d.truncated && p.t == d.nodes[0].t) continue;
        CHECK(env.step_dual(OddSite(d.nodes[v])).coord() == p);
    }
}

TEST_CASE("truncation flags and caps") {
    // find an environment with a deep cluster
    for (std::uint64_t seed = 0;; ++seed) {
        LatticeEnvironment env(seed);
        auto full = extract_cluster(env, EvenSite(0, 0), 2000);
        if (full.depth < 30) continue;
        auto cut = extract_cluster(env, EvenSite(0, 0), 10);
        CHECK(cut.truncated);
        CHECK(cut.depth == 10);
        auto exact = extract_cluster(env, EvenSite(0, 0), full.depth);
        CHECK(exact.truncated == full.truncated);
        auto dual_cut = extract_dual_tree(env, EvenSite(0, 0), 10);
        CHECK(dual_cut.truncated);
        CHECK_NOTHROW(dual_cut.check_structure());
        break;
    }
}

TEST_CASE("tree metric: exact hop distances and four-point condition") {
    RootedTree big;
    for (std::uint64_t s = 0;; ++s) {
        big = extract_cluster(LatticeEnvironment(s), EvenSite(0, 0), 200);
        if (big.size() >= 50 && big.size() <= 400) break;
    }
    auto m = tree_metric(scale_tree(big, 10));
    CHECK(m.has_exact());
    CHECK(m.unit == doctest::Approx(0.1));
    CHECK(four_point_check(m, 0.0));
    CHECK_NOTHROW(m.check_metric());
    auto depth = big.hop_depths();
    for (std::size_t v = 0; v < big.size(); ++v) CHECK(m.tick(0, v) == depth[v]);
    std::int64_t diam = 0;
    for (auto t : m.ticks) diam = std::max(diam, t);
    CHECK(tree_diameter_hops(big) == diam);
    CHECK_THROWS_AS(tree_metric(big, 10), std::length_error);

    std::vector<std::size_t> sub{0, 3, 7, big.size() - 1};
    auto ms = tree_metric_subset(big, sub);
    for (std::size_t i = 0; i < sub.size(); ++i)
        for (std::size_t j = 0; j < sub.size(); ++j) CHECK(ms.tick(i, j) == m.tick(sub[i], sub[j]));
}

TEST_CASE("scaling") {
    LatticeEnvironment env(3);
    auto t = extract_cluster(env, EvenSite(0, 0), 50);
    CHECK_THROWS_AS(scale_tree(t, 0), std::invalid_argument);
    auto s = scale_tree(t, 8);
    CHECK(s.edge_weight == Rational(1, 8));
    CHECK(tree_diameter(s) == doctest::Approx(tree_diameter_hops(t) / 8.0));
}

TEST_CASE("JSON and Newick round trips") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        LatticeEnvironment env(seed);
        for (auto tree : {scale_tree(extract_cluster(env, EvenSite(0, 0), 100), 7),
                          scale_tree(extract_dual_tree(env, EvenSite(0, 0), 100), 3)}) {
            auto j = tree_from_json(nlohmann::json::parse(tree_to_json(tree).dump()));
            CHECK(j.nodes == tree.nodes);
            CHECK(j.parent == tree.parent);
            CHECK(j.edge_weight == tree.edge_weight);
            CHECK(j.depth == tree.depth);
            CHECK(j.truncated == tree.truncated);
            CHECK(j.orientation == tree.orientation);

            auto text = tree_to_newick(tree);
            auto back = tree_from_newick(text);
            CHECK(tree_to_newick(back) == text);
            CHECK(back.edge_weight == tree.edge_weight);
            CHECK(back.orientation == tree.orientation);
            CHECK(back.depth == tree.depth);
            if (tree.size() <= 300) {
                auto a = tree_metric(tree), b = tree_metric(back);
                REQUIRE(a.size() == b.size());
                // same multiset of labelled distances
                std::vector<std::tuple<std::string, std::string, std::int64_t>> da, db;
                for (std::size_t i = 0; i < a.size(); ++i)
                    for (std::size_t k = 0; k < a.size(); ++k) {
                        da.emplace_back(a.labels[i], a.labels[k], a.tick(i, k));
                        db.emplace_back(b.labels[i], b.labels[k], b.tick(i, k));
                    }
                std::sort(da.begin(), da.end());
                std::sort(db.begin(), db.end());
                CHECK(da == db);
            }
        }
    }
    CHECK_THROWS_AS(tree_from_newick("(0_0:1,1_1:1"), std::invalid_argument);
    CHECK_THROWS_AS(tree_from_newick("(a:1)b;"), std::invalid_argument);
    CHECK_THROWS_AS(tree_from_json(nlohmann::json{{"schema", "other"}}), std::invalid_argument);
}
