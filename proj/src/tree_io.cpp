#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "drainage/cluster_tree.hpp"

namespace drainage {

using nlohmann::json;

json tree_to_json(const RootedTree& tree) {
    tree.check_structure();
    json nodes = json::array();
    for (const auto& c : tree.nodes) nodes.push_back({c.x, c.t});
    return json{{"schema", kTreeSchema},
                {"orientation", to_string(tree.orientation)},
                {"edge_weight", {{"num", tree.edge_weight.numerator()}, {"den", tree.edge_weight.denominator()}}},
                {"depth", tree.depth},
                {"truncated", tree.truncated},
                {"dual_length", tree.dual_length},
                {"nodes", nodes},
                {"parent", tree.parent}};
}

RootedTree tree_from_json(const json& j) {
    if (!j.is_object() || j.value("schema", "") != kTreeSchema)
        throw std::invalid_argument("tree json: missing or unsupported schema");
    RootedTree t;
    try {
        t.orientation = orientation_from_string(j.at("orientation").get<std::string>());
        t.edge_weight = Rational(j.at("edge_weight").at("num").get<std::int64_t>(),
                                 j.at("edge_weight").at("den").get<std::int64_t>());
        t.depth = j.at("depth").get<std::int64_t>();
        t.truncated = j.at("truncated").get<bool>();
        t.dual_length = j.at("dual_length").get<std::int64_t>();
        for (const auto& n : j.at("nodes")) t.nodes.push_back({n.at(0).get<std::int64_t>(), n.at(1).get<std::int64_t>()});
        t.parent = j.at("parent").get<std::vector<std::int64_t>>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("tree json: ") + e.what());
    } catch (const boost::bad_rational&) {
        throw std::invalid_argument("tree json: zero denominator in edge weight");
    }
    t.check_structure();
    return t;
}

namespace {

std::string format_length(double w) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", w);
    return buf;
}

// Continued-fraction recovery of a rational edge weight from its decimal form.
Rational rational_from_double(double w) {
    if (!(w > 0) || !std::isfinite(w)) throw std::invalid_argument("newick: branch length must be positive");
    std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double x = w;
    for (int it = 0; it < 64; ++it) {
        double a = std::floor(x);
        if (a > 1e12) break;
        auto ai = static_cast<std::int64_t>(a);
        std::int64_t h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        if (k2 > 1'000'000'000'000LL) break;
        h0 = h1, h1 = h2, k0 = k1, k1 = k2;
        if (std::fabs(static_cast<double>(h1) / static_cast<double>(k1) - w) <= 1e-15 * w) break;
        double frac = x - a;
        if (frac < 1e-15) break;
        x = 1.0 / frac;
    }
    return Rational(h1, k1);
}

Rational parse_rational(const std::string& s) {
    try {
        std::size_t used = 0;
        const auto slash = s.find('/');
        const auto num = std::stoll(s.substr(0, slash), &used);
        if (slash == std::string::npos) {
            if (used != s.size()) throw std::invalid_argument("trailing characters");
            return Rational(num);
        }
        std::size_t used_den = 0;
        const auto den = std::stoll(s.substr(slash + 1), &used_den);
        if (used != slash || used_den != s.size() - slash - 1 || num <= 0 || den <= 0)
            throw std::invalid_argument("bad fraction");
        return Rational(num, den);
    } catch (const std::exception&) {
        throw std::invalid_argument("newick: bad edge_weight '" + s + "'");
    }
}

SiteCoordinate parse_label(const std::string& s) {
    auto u = s.find('_', 1);
    if (u == std::string::npos) throw std::invalid_argument("newick: label '" + s + "' is not of the form x_t");
    try {
        std::size_t p1 = 0, p2 = 0;
        auto x = std::stoll(s.substr(0, u), &p1);
        auto t = std::stoll(s.substr(u + 1), &p2);
        if (p1 != u || p2 != s.size() - u - 1) throw std::invalid_argument("trailing characters");
        return {x, t};
    } catch (const std::exception&) {
        throw std::invalid_argument("newick: label '" + s + "' is not of the form x_t");
    }
}

} // namespace

std::string tree_to_newick(const RootedTree& tree) {
    tree.check_structure();
    auto ch = tree.children();
    const std::string len = ":" + format_length(tree.weight());
    // the exact weight travels in the comment; single-node trees have no branch to carry it
    std::string out = std::string("[&orientation=") + to_string(tree.orientation) +
                      ",edge_weight=" + std::to_string(tree.edge_weight.numerator()) + "/" +
                      std::to_string(tree.edge_weight.denominator()) + "]";
    // iterative post-order so that deep trees do not exhaust the stack
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto& [v, next] = stack.back();
        if (next == 0 && !ch[v].empty()) out += '(';
        if (next < ch[v].size()) {
            if (next > 0) out += ',';
            std::size_t c = ch[v][next++];
            stack.emplace_back(c, 0);
            continue;
        }
        if (!ch[v].empty()) out += ')';
        out += node_label(tree.nodes[v]);
        if (v != 0) out += len;
        stack.pop_back();
    }
    out += ';';
    return out;
}

RootedTree tree_from_newick(const std::string& text) {
    RootedTree t;
    std::optional<Rational> exact_weight;
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    skip_ws();
    if (i < text.size() && text[i] == '[') {
        auto close = text.find(']', i);
        if (close == std::string::npos) throw std::invalid_argument("newick: unterminated comment");
        std::string meta = text.substr(i + 1, close - i - 1);
        if (!meta.empty() && meta[0] == '&') meta.erase(0, 1);
        std::istringstream fields(meta);
        for (std::string kv; std::getline(fields, kv, ',');) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
            if (key == "orientation") t.orientation = orientation_from_string(value);
            else if (key == "edge_weight") exact_weight = parse_rational(value);
        }
        i = close + 1;
    }

    // Nodes are created in order of appearance; the root is renumbered to 0 at the end.
    std::vector<SiteCoordinate> coords;
    std::vector<std::int64_t> parent;
    std::vector<double> length;
    std::vector<std::int64_t> open;  // nodes whose child list is being read
    std::int64_t last = -1;
    auto new_node = [&](std::int64_t p) {
        coords.push_back({});
        parent.push_back(p);
        length.push_back(-1.0);
        return static_cast<std::int64_t>(coords.size() - 1);
    };
    auto read_label_and_length = [&](std::int64_t v) {
        std::size_t s = i;
        while (i < text.size() && std::string_view("(),:;").find(text[i]) == std::string_view::npos &&
               !std::isspace(static_cast<unsigned char>(text[i])))
            ++i;
        coords[v] = parse_label(text.substr(s, i - s));
        skip_ws();
        if (i < text.size() && text[i] == ':') {
            ++i;
            std::size_t used = 0;
            try {
                length[v] = std::stod(text.substr(i), &used);
            } catch (const std::exception&) {
                throw std::invalid_argument("newick: bad branch length");
            }
            i += used;
        }
        skip_ws();
    };

    skip_ws();
    std::int64_t pending = -1;  // node opened by '(' awaiting its label
    for (;;) {
        if (i >= text.size()) throw std::invalid_argument("newick: unexpected end of input");
        char c = text[i];
        if (c == '(') {
            ++i;
            std::int64_t v = new_node(open.empty() ? -1 : open.back());
            open.push_back(v);
            skip_ws();
            continue;
        }
        if (c == ')') {
            if (open.empty()) throw std::invalid_argument("newick: unbalanced parenthesis");
            ++i;
            pending = open.back();
            open.pop_back();
            read_label_and_length(pending);
            last = pending;
        } else if (c == ',') {
            ++i;
            skip_ws();
            continue;
        } else if (c == ';') {
            break;
        } else {
            std::int64_t v = new_node(open.empty() ? -1 : open.back());
            read_label_and_length(v);
            last = v;
        }
        if (open.empty()) {
            skip_ws();
            if (i >= text.size() || text[i] != ';') throw std::invalid_argument("newick: expected ';' after root");
            break;
        }
    }
    if (!open.empty() || last < 0) throw std::invalid_argument("newick: unbalanced parenthesis");
    const std::int64_t root = last;
    if (parent[root] != -1) throw std::invalid_argument("newick: malformed tree");

    // renumber with the root first, children in order of appearance
    const std::size_t n = coords.size();
    std::vector<std::vector<std::int64_t>> kids(n);
    for (std::size_t v = 0; v < n; ++v)
        if (parent[v] >= 0) kids[parent[v]].push_back(static_cast<std::int64_t>(v));
    std::vector<std::int64_t> order{root}, newid(n, -1);
    newid[root] = 0;
    for (std::size_t q = 0; q < order.size(); ++q)
        for (auto c : kids[order[q]]) {
            newid[c] = static_cast<std::int64_t>(order.size());
            order.push_back(c);
        }
    if (order.size() != n) throw std::invalid_argument("newick: more than one root");

    double w = -1.0;
    for (auto v : order) {
        t.nodes.push_back(coords[v]);
        t.parent.push_back(parent[v] < 0 ? -1 : newid[parent[v]]);
        if (v == root) continue;
        if (length[v] <= 0) throw std::invalid_argument("newick: missing branch length");
        if (w < 0) w = length[v];
        else if (std::fabs(length[v] - w) > 1e-12 * w)
            throw std::invalid_argument("newick: branch lengths differ; only uniform edge weights are supported");
    }
    if (exact_weight) {
        if (w > 0 && std::fabs(boost::rational_cast<double>(*exact_weight) - w) > 1e-12 * w)
            throw std::invalid_argument("newick: branch lengths disagree with the edge_weight comment");
        t.edge_weight = *exact_weight;
    } else {
        t.edge_weight = w < 0 ? Rational(1) : rational_from_double(w);
    }
    auto d = t.hop_depths();
    t.depth = 0;
    for (auto x : d) t.depth = std::max(t.depth, x);
    t.check_structure();
    return t;
}

} // namespace drainage
