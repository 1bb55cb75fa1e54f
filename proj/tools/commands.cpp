#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "drainage/brownian_skeleton.hpp"
#include "drainage/cluster_tree.hpp"
#include "drainage/diagnostics.hpp"
#include "drainage/parallel.hpp"
#include "json.hpp"

namespace drainage::cli {

namespace {

using nlohmann::json;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Runs fn on the named file, or on stdout for "" and "-".
void with_output(const std::string& path, const std::function<void(std::ostream&)>& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::invalid_argument("cannot open '" + path + "' for writing");
    fn(os);
    if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::invalid_argument("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct StatsRow {
    std::int64_t n;
    std::string statistic;
    double estimate, se, oracle, z;
};

void write_stats(std::ostream& os, const std::vector<StatsRow>& rows) {
    os << "schema,drainage.stats/1\n";
    os << "n,statistic,estimate,se,oracle,z\n";
    for (const auto& r : rows)
        os << r.n << ',' << r.statistic << ',' << num(r.estimate) << ',' << num(r.se) << ',' << num(r.oracle) << ','
           << num(r.z) << '\n';
}

void dry_run(const std::string& command, const Common& c, json params) {
    params["command"] = command;
    params["seed"] = c.seed;
    params["workers"] = c.workers;
    params["workers_resolved"] = resolve_workers(c.workers);
    std::cout << params.dump(2) << "\n";
}

// ---- simulate-tree ----------------------------------------------------------

struct SimulateTree {
    std::int64_t x = 0, t = 0, n = 1, max_depth = 100000;
    std::string format = "json", forward_out, dual_out, metric_out;
};

void simulate_tree(const SimulateTree& o, const Common& c) {
    if (o.n < 1) throw std::invalid_argument("--n must be at least 1");
    const EvenSite root(o.x, o.t);
    if (c.dry_run)
        return dry_run("simulate-tree", c,
                       {{"x", o.x}, {"t", o.t}, {"n", o.n}, {"max_depth", o.max_depth}, {"format", o.format},
                        {"forward_out", o.forward_out}, {"dual_out", o.dual_out}, {"metric_out", o.metric_out}});
    LatticeEnvironment env(c.seed);
    auto fwd = scale_tree(extract_cluster(env, root, o.max_depth), o.n);
    auto dual = scale_tree(extract_dual_tree(env, root, o.max_depth), o.n);
    auto emit = [&](const RootedTree& tree, std::ostream& os) {
        if (o.format == "newick") os << tree_to_newick(tree) << "\n";
        else os << tree_to_json(tree).dump() << "\n";
    };
    if (o.forward_out.empty() && o.dual_out.empty()) {
        if (o.format == "newick") {
            emit(fwd, std::cout);
            emit(dual, std::cout);
        } else {
            std::cout << json{{"forward", tree_to_json(fwd)}, {"dual", tree_to_json(dual)}}.dump() << "\n";
        }
    } else {
        if (!o.forward_out.empty()) with_output(o.forward_out, [&](std::ostream& os) { emit(fwd, os); });
        if (!o.dual_out.empty()) with_output(o.dual_out, [&](std::ostream& os) { emit(dual, os); });
    }
    if (!o.metric_out.empty())
        with_output(o.metric_out, [&](std::ostream& os) { write_metric_csv(os, tree_metric(fwd)); });
}

// ---- depth-tail ------------------------------------------------------------------

struct DepthTail {
    std::vector<std::int64_t> n{1, 2, 4, 16, 64};
    std::size_t replicates = 10000;
    std::string out;
};

void depth_tail(const DepthTail& o, const Common& c) {
    if (c.dry_run) return dry_run("depth-tail", c, {{"n", o.n}, {"replicates", o.replicates}, {"out", o.out}});
    auto rows = depth_tail_mc(c.seed, o.n, o.replicates, c.workers);
    std::vector<StatsRow> out;
    for (const auto& r : rows) out.push_back({r.n, "depth_tail", r.estimate, r.se, r.oracle, r.z});
    with_output(o.out, [&](std::ostream& os) { write_stats(os, out); });
}

// ---- eta ---------------------------------------------------------------------------

struct Eta {
    std::vector<std::int64_t> n{400};
    std::size_t replicates = 20000;
    double pad = 6.0;
    bool closed = false;
    std::string out;
};

void eta(const Eta& o, const Common& c) {
    if (c.dry_run)
        return dry_run("eta", c,
                       {{"n", o.n}, {"replicates", o.replicates}, {"pad", o.pad}, {"closed_window", o.closed},
                        {"out", o.out}});
    std::vector<StatsRow> out;
    for (auto n : o.n) {
        auto r = eta_estimate(derive_seed(c.seed, static_cast<std::uint64_t>(n), 11), n, o.replicates,
                              EtaOptions{o.pad, o.closed, c.workers});
        const double se = r.eta.se;
        out.push_back({n, "eta", r.eta.mean, se, r.limit, se > 0 ? (r.eta.mean - r.limit) / se : 0.0});
        out.push_back({n, "eta_finite_n", r.eta.mean, se, r.exact_mean, se > 0 ? (r.eta.mean - r.exact_mean) / se : 0.0});
    }
    with_output(o.out, [&](std::ostream& os) { write_stats(os, out); });
}

// ---- kappa -------------------------------------------------------------------------

struct Kappa {
    std::int64_t n = 100;
    std::size_t replicates = 10000;
    std::string functional = "tanh_diam_dual";
    double depth_cap = 10.0;
    std::string out;
};

void kappa(const Kappa& o, const Common& c) {
    auto f = functional_by_name(o.functional);
    if (c.dry_run)
        return dry_run("kappa", c,
                       {{"n", o.n}, {"replicates", o.replicates}, {"functional", o.functional},
                        {"depth_cap", o.depth_cap}, {"out", o.out}});
    auto r = kappa_estimate(c.seed, o.n, o.replicates, f, KappaOptions{o.depth_cap, c.workers});
    const double nan = std::nan("");
    std::vector<StatsRow> out{
        {o.n, "kappa_direct", r.direct.mean, r.direct.se, r.product, r.z},
        {o.n, "kappa_count", r.count.mean, r.count.se, nan, nan},
        {o.n, "kappa_conditional", r.conditional.mean, r.conditional.se, nan, nan},
        {o.n, "kappa_product", r.product, r.product_se, nan, nan},
    };
    with_output(o.out, [&](std::ostream& os) { write_stats(os, out); });
}

// ---- horton ------------------------------------------------------------------------

struct Horton {
    std::string tree;
    std::size_t leaves = 1 << 14, trees = 50;
    int skip_top = 3;
    std::string out;
};

RootedTree read_tree_file(const std::string& path) {
    const std::string text = slurp(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw std::invalid_argument("tree file '" + path + "': " + e.what());
        }
        return tree_from_json(j);
    }
    return tree_from_newick(text);
}

void horton_cmd(const Horton& o, const Common& c) {
    if (c.dry_run)
        return dry_run("horton", c,
                       {{"tree", o.tree}, {"leaves", o.leaves}, {"trees", o.trees}, {"skip_top", o.skip_top},
                        {"out", o.out}});
    if (!o.tree.empty()) {
        auto h = horton(read_tree_file(o.tree));
        with_output(o.out, [&](std::ostream& os) {
            os << "schema,drainage.horton/1\n";
            os << "order,branches,ratio\n";
            for (std::size_t k = 0; k < h.counts.size(); ++k)
                os << k + 1 << ',' << h.counts[k] << ',' << (k < h.ratios.size() ? num(h.ratios[k]) : "") << '\n';
        });
        return;
    }
    auto rows = remy_horton_ratios(c.seed, o.leaves, o.trees, o.skip_top, c.workers);
    std::vector<StatsRow> out;
    for (const auto& r : rows)
        out.push_back({r.order, "bifurcation_ratio", r.ratio.mean, r.ratio.se, 4.0,
                       r.ratio.se > 0 ? (r.ratio.mean - 4.0) / r.ratio.se : 0.0});
    with_output(o.out, [&](std::ostream& os) { write_stats(os, out); });
}

// ---- sample-crt --------------------------------------------------------------------

struct SampleCrt {
    double step = 1.0 / 256;
    std::size_t backward_k = 256, forward_k = 32, metric_points = 16;
    double max_depth = 64.0;
    int attempts = 16;
    std::string out, metric_out;
};

void sample_crt(const SampleCrt& o, const Common& c) {
    if (c.dry_run)
        return dry_run("sample-crt", c,
                       {{"step", o.step}, {"backward_k", o.backward_k}, {"forward_k", o.forward_k},
                        {"metric_points", o.metric_points}, {"max_depth", o.max_depth}, {"attempts", o.attempts},
                        {"out", o.out}, {"metric_out", o.metric_out}});
    BoundaryOptions bo;
    bo.max_depth = o.max_depth;
    BoundaryPair b;
    bool found = false;
    for (int a = 0; a < o.attempts && !found; ++a) {
        b = sample_boundary(derive_seed(c.seed, static_cast<std::uint64_t>(a), 21), o.step, bo);
        found = !b.censored;
    }
    if (!found)
        throw std::runtime_error("sample-crt: every boundary excursion outlived max_depth " + num(o.max_depth) +
                                 " in " + std::to_string(o.attempts) + " attempts");
    auto back = backward_skeleton(b, o.backward_k, derive_seed(c.seed, 0, 22));
    auto fwd = forward_skeleton(back, o.forward_k);
    with_output(o.out, [&](std::ostream& os) {
        os << json{{"schema", "drainage.crt/1"}, {"backward", skeleton_to_json(back)}, {"forward", skeleton_to_json(fwd)}}
                  .dump()
           << "\n";
    });
    if (!o.metric_out.empty()) {
        const std::size_t m = std::min(o.metric_points, back.family.paths.size());
        std::vector<std::size_t> idx(m);
        for (std::size_t i = 0; i < m; ++i) idx[i] = i;
        with_output(o.metric_out, [&](std::ostream& os) { write_metric_csv(os, skeleton_metric(back, idx, true)); });
    }
}

// ---- gh ----------------------------------------------------------------------------

struct Gh {
    std::string a, b;
    std::size_t cap = 8;
};

FiniteMetricSpace read_metric_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::invalid_argument("cannot open '" + path + "'");
    return read_metric_csv(is);
}

void gh(const Gh& o, const Common& c) {
    if (c.dry_run) return dry_run("gh", c, {{"a", o.a}, {"b", o.b}, {"cap", o.cap}});
    auto x = read_metric_file(o.a), y = read_metric_file(o.b);
    if (x.size() <= o.cap && y.size() <= o.cap) {
        std::cout << num(gh_exact(x, y, o.cap)) << "\n";
    } else {
        auto bounds = gh_bounds(x, y);
        std::cout << "lower," << num(bounds.lower) << "\nupper," << num(bounds.upper) << "\n";
    }
}

// ---- converge ----------------------------------------------------------------------

struct Converge {
    ConvergeOptions opt;
    std::string out, csv;
};

void converge_cmd(Converge o, const Common& c) {
    o.opt.workers = c.workers;
    if (c.dry_run)
        return dry_run("converge", c,
                       {{"ns", o.opt.ns}, {"samples", o.opt.samples}, {"points", o.opt.points},
                        {"meet_cap", o.opt.meet_cap}, {"step", o.opt.step}, {"backward_multiple", o.opt.backward_multiple},
                        {"ball_radius", o.opt.summary.ball_radius}, {"gh_points", o.opt.summary.gh_points},
                        {"out", o.out}, {"csv", o.csv}});
    auto r = converge(c.seed, o.opt);
    with_output(o.out, [&](std::ostream& os) { os << r.to_json().dump(2) << "\n"; });
    if (!o.csv.empty())
        with_output(o.csv, [&](std::ostream& os) {
            os << "schema,drainage.converge/1\n";
            os << "n,summary,ks_statistic,p_value,mean_discrete,mean_continuum\n";
            for (std::size_t i = 0; i < r.ns.size(); ++i)
                for (const auto& row : r.per_n[i].rows)
                    os << r.ns[i] << ',' << row.name << ',' << num(row.ks_statistic) << ',' << num(row.p_value) << ','
                       << num(row.mean_a) << ',' << num(row.mean_b) << '\n';
        });
}

} // namespace

void register_commands(CLI::App& app, Common& common, std::function<void()>& action) {
    {
        auto o = std::make_shared<SimulateTree>();
        auto* s = app.add_subcommand("simulate-tree", "extract the cluster tree and dual tree at a root");
        s->add_option("--x", o->x, "root x (x + t even)")->capture_default_str();
        s->add_option("--t", o->t, "root t")->capture_default_str();
        s->add_option("--n", o->n, "scale: edge length 1/n")->capture_default_str();
        s->add_option("--max-depth", o->max_depth, "depth cap (negative: none)")->capture_default_str();
        s->add_option("--format", o->format, "tree format")->check(CLI::IsMember({"json", "newick"}))->capture_default_str();
        s->add_option("--forward-out", o->forward_out, "file for the cluster tree");
        s->add_option("--dual-out", o->dual_out, "file for the dual tree");
        s->add_option("--metric-out", o->metric_out, "metric CSV of the cluster tree");
        s->callback([o, &common, &action] { action = [o, &common] { simulate_tree(*o, common); }; });
    }
    {
        auto o = std::make_shared<DepthTail>();
        auto* s = app.add_subcommand("depth-tail", "Monte Carlo of P(L >= n) against the exact tail");
        s->add_option("--n", o->n, "depths")->check(CLI::PositiveNumber)->capture_default_str();
        s->add_option("--replicates", o->replicates)->check(CLI::Range(2, 1 << 30))->capture_default_str();
        s->add_option("--out", o->out, "stats CSV (default stdout)");
        s->callback([o, &common, &action] { action = [o, &common] { depth_tail(*o, common); }; });
    }
    {
        auto o = std::make_shared<Eta>();
        auto* s = app.add_subcommand("eta", "occupied sites in [0, sqrt n) after n steps");
        s->add_option("--n", o->n, "values of n")->check(CLI::PositiveNumber)->capture_default_str();
        s->add_option("--replicates", o->replicates)->check(CLI::Range(2, 1 << 30))->capture_default_str();
        s->add_option("--pad", o->pad, "slice padding in units of sqrt n")->check(CLI::NonNegativeNumber)->capture_default_str();
        s->add_flag("--closed-window", o->closed, "count [0, sqrt n] instead");
        s->add_option("--out", o->out, "stats CSV (default stdout)");
        s->callback([o, &common, &action] { action = [o, &common] { eta(*o, common); }; });
    }
    {
        auto o = std::make_shared<Kappa>();
        auto* s = app.add_subcommand("kappa", "direct versus factorised estimate of the tree-pair identity");
        s->add_option("--n", o->n)->check(CLI::PositiveNumber)->capture_default_str();
        s->add_option("--replicates", o->replicates)->check(CLI::Range(2, 1 << 30))->capture_default_str();
        s->add_option("--functional", o->functional)->check(CLI::IsMember(functional_names()))->capture_default_str();
        s->add_option("--depth-cap", o->depth_cap, "trees cut at depth_cap * n")->check(CLI::Range(1.0, 1e6))->capture_default_str();
        s->add_option("--out", o->out, "stats CSV (default stdout)");
        s->callback([o, &common, &action] { action = [o, &common] { kappa(*o, common); }; });
    }
    {
        auto o = std::make_shared<Horton>();
        auto* s = app.add_subcommand("horton", "Horton-Strahler counts of a tree file or a random binary corpus");
        s->add_option("--tree", o->tree, "tree file (JSON or Newick)")->check(CLI::ExistingFile);
        s->add_option("--leaves", o->leaves)->check(CLI::Range(2, 1 << 26))->capture_default_str();
        s->add_option("--trees", o->trees)->check(CLI::Range(1, 1 << 20))->capture_default_str();
        s->add_option("--skip-top", o->skip_top, "orders dropped from the top")->check(CLI::Range(0, 64))->capture_default_str();
        s->add_option("--out", o->out, "CSV (default stdout)");
        s->callback([o, &common, &action] { action = [o, &common] { horton_cmd(*o, common); }; });
    }
    {
        auto o = std::make_shared<SampleCrt>();
        auto* s = app.add_subcommand("sample-crt", "boundary pair with backward and forward skeletons");
        s->add_option("--step", o->step, "time grid step (1/step an integer >= 2)")->capture_default_str();
        s->add_option("--backward-k", o->backward_k, "backward skeleton paths")->check(CLI::PositiveNumber)->capture_default_str();
        s->add_option("--forward-k", o->forward_k, "forward skeleton paths")->check(CLI::PositiveNumber)->capture_default_str();
        s->add_option("--max-depth", o->max_depth, "censoring depth for the boundary")->check(CLI::PositiveNumber)->capture_default_str();
        s->add_option("--attempts", o->attempts, "boundaries tried before giving up")->check(CLI::Range(1, 1 << 20))->capture_default_str();
        s->add_option("--metric-points", o->metric_points)->check(CLI::PositiveNumber)->capture_default_str();
        s->add_option("--out", o->out, "JSON (default stdout)");
        s->add_option("--metric-out", o->metric_out, "metric CSV of the backward skeleton");
        s->callback([o, &common, &action] { action = [o, &common] { sample_crt(*o, common); }; });
    }
    {
        auto o = std::make_shared<Gh>();
        auto* s = app.add_subcommand("gh", "Gromov-Hausdorff distance between two metric CSV files");
        s->add_option("--a", o->a)->required()->check(CLI::ExistingFile);
        s->add_option("--b", o->b)->required()->check(CLI::ExistingFile);
        s->add_option("--cap", o->cap, "exact search up to this many points")->check(CLI::Range(1, 12))->capture_default_str();
        s->callback([o, &common, &action] { action = [o, &common] { gh(*o, common); }; });
    }
    {
        auto o = std::make_shared<Converge>();
        auto* s = app.add_subcommand("converge", "discrete conditioned trees against continuum skeleton samples");
        s->add_option("--ns", o->opt.ns)->check(CLI::PositiveNumber)->capture_default_str();
        s->add_option("--samples", o->opt.samples)->check(CLI::Range(2, 1 << 24))->capture_default_str();
        s->add_option("--points", o->opt.points)->check(CLI::Range(1, 1 << 16))->capture_default_str();
        s->add_option("--meet-cap", o->opt.meet_cap)->check(CLI::Range(1.0, 1e6))->capture_default_str();
        s->add_option("--step", o->opt.step)->capture_default_str();
        s->add_option("--backward-multiple", o->opt.backward_multiple)->check(CLI::Range(1.0, 1e3))->capture_default_str();
        s->add_option("--ball-radius", o->opt.summary.ball_radius)->check(CLI::PositiveNumber)->capture_default_str();
        s->add_option("--gh-points", o->opt.summary.gh_points)->check(CLI::Range(1, 8))->capture_default_str();
        s->add_option("--out", o->out, "report JSON (default stdout)");
        s->add_option("--csv", o->csv, "plot-ready CSV");
        s->callback([o, &common, &action] { action = [o, &common] { converge_cmd(*o, common); }; });
    }
}

} // namespace drainage::cli
