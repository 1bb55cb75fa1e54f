#include "drainage/brownian_skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "drainage/parallel.hpp"

namespace drainage {

namespace {

std::int64_t ticks_per_unit(double step) {
    if (!(step > 0.0) || step > 0.5) throw std::invalid_argument("grid step must lie in (0, 0.5]");
    double m = 1.0 / step;
    auto r = std::llround(m);
    if (std::fabs(m - static_cast<double>(r)) > 1e-9 * m)
        throw std::invalid_argument("grid step must divide one time unit exactly");
    return r;
}

bool sign_crossed(double d0, double d1) { return (d0 > 0 && d1 <= 0) || (d0 < 0 && d1 >= 0); }

GridPath backward_path(double step, std::vector<double> values) {
    GridPath p;
    p.orientation = Orientation::backward;
    p.step = step;
    p.start_tick = 0;
    p.values = std::move(values);
    return p;
}

// Draws Brownian increments for two paths and decides contacts between grid points.
class PairStream {
public:
    PairStream(std::uint64_t seed, double step)
        : normals_(make_rng(derive_seed(seed, 0, 0))), uniforms_(make_rng(derive_seed(seed, 0, 1))),
          sd_(std::sqrt(step)), step_(step) {}

    void extend(std::vector<double>& a, std::vector<double>& b, std::int64_t count) {
        for (std::int64_t k = 0; k < count; ++k) {
            double z1 = gauss_(normals_);
            double z2 = gauss_(normals_);
            a.push_back(a.back() + sd_ * z1);
            b.push_back(b.back() + sd_ * z2);
        }
    }

    double gauss() { return gauss_(normals_); }

    // Contact of a pair whose difference moves from d0 to d1 over one step.
    bool contact(double d0, double d1, CrossingRule rule) {
        if (d0 == 0.0) return false;  // leaving a common point is not a new contact
        if (sign_crossed(d0, d1)) return true;
        if (rule == CrossingRule::sign_change) return false;
        return unit_(uniforms_) < std::exp(-d0 * d1 / step_);
    }

private:
    Rng normals_, uniforms_;
    std::normal_distribution<double> gauss_;
    std::uniform_real_distribution<double> unit_;
    double sd_, step_;
};

void check_pair_input(const GridPath& f1, const GridPath& f2) {
    if (f1.orientation != Orientation::backward || f2.orientation != Orientation::backward)
        throw std::invalid_argument("gamma map: inputs must be backward paths");
    if (f1.step != f2.step) throw std::invalid_argument("gamma map: inputs use different grid steps");
    if (f1.start_tick != 0 || f2.start_tick != 0) throw std::invalid_argument("gamma map: inputs must start at time 0");
    if (f1.values.empty() || f2.values.empty() || f1.values[0] != 0.0 || f2.values[0] != 0.0)
        throw std::invalid_argument("gamma map: inputs must start at value 0");
}

// Recentred pair starting at input index z with offset y0; ordered before the
// meeting at output index meet, both equal to the first input afterwards.
void fill_recentred(const std::vector<double>& a, const std::vector<double>& b, std::size_t z, double y0,
                    std::size_t meet, std::size_t len, std::vector<double>& up, std::vector<double>& lo) {
    up.resize(len);
    lo.resize(len);
    for (std::size_t i = 0; i < len; ++i) {
        double u = a[z + i] - y0, v = b[z + i] - y0;
        if (i >= meet) up[i] = lo[i] = u;
        else up[i] = std::max(u, v), lo[i] = std::min(u, v);
    }
}

} // namespace

BrownianPair sample_brownian_pair(std::uint64_t seed, double step, std::int64_t ticks) {
    ticks_per_unit(step);
    if (ticks < 0) throw std::invalid_argument("sample_brownian_pair: negative length");
    PairStream s(seed, step);
    std::vector<double> a{0.0}, b{0.0};
    s.extend(a, b, ticks);
    return {backward_path(step, std::move(a)), backward_path(step, std::move(b))};
}

BoundaryPair sample_boundary(std::uint64_t seed, double step, const BoundaryOptions& opt) {
    const std::int64_t m = ticks_per_unit(step);
    if (!(opt.horizon > 0)) throw std::invalid_argument("sample_boundary: horizon must be positive");
    const auto chunk = std::max<std::int64_t>(m, std::llround(opt.horizon / step));
    const auto max_ticks = std::max<std::int64_t>(m + 1, std::llround(opt.max_depth / step));
    PairStream s(seed, step);
    std::vector<double> a{0.0}, b{0.0};
    s.extend(a, b, chunk);
    int extensions = 0;
    std::size_t z = 0;
    for (std::size_t j = 0;; ++j) {
        if (j + 1 >= a.size()) {
            // once inside a qualifying excursion only the depth cap applies
            if (static_cast<std::int64_t>(j - z) <= m && ++extensions > opt.max_extensions)
                throw std::runtime_error("sample_boundary: no excursion longer than one unit within the horizon");
            s.extend(a, b, chunk);
        }
        const std::size_t c = j + 1;
        const bool hit = s.contact(a[j] - b[j], a[c] - b[c], opt.rule);
        const bool censor = !hit && static_cast<std::int64_t>(c - z) >= max_ticks;
        if (!hit && !censor) continue;
        if (static_cast<std::int64_t>(c - z) > m) {
            BoundaryPair out;
            out.step = step;
            out.censored = censor;
            out.meet_tick = -static_cast<std::int64_t>(c - z);
            const double y0 = z == 0 ? 0.0 : 0.5 * (a[z] + b[z]);
            std::vector<double> up, lo;
            fill_recentred(a, b, z, y0, censor ? c - z + 1 : c - z, c - z + 1, up, lo);
            up[0] = lo[0] = 0.0;
            out.upper = backward_path(step, std::move(up));
            out.lower = backward_path(step, std::move(lo));
            return out;
        }
        z = c;
    }
}

GammaResult gamma_map(const GridPath& f1, const GridPath& f2) {
    check_pair_input(f1, f2);
    const std::int64_t m = ticks_per_unit(f1.step);
    const auto& a = f1.values;
    const auto& b = f2.values;
    const std::size_t n = std::min(a.size(), b.size());
    GammaResult r{false, f1, f2, 0, 0};
    std::size_t z = 0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        double d0 = a[j] - b[j];
        if (d0 == 0.0 || !sign_crossed(d0, a[j + 1] - b[j + 1])) continue;
        const std::size_t c = j + 1;
        if (static_cast<std::int64_t>(c - z) > m) {
            const double y0 = z == 0 ? 0.0 : 0.5 * (a[z] + b[z]);
            std::vector<double> up, lo;
            fill_recentred(a, b, z, y0, c - z, n - z, up, lo);
            up[0] = lo[0] = 0.0;
            r.in_domain = true;
            r.upper = backward_path(f1.step, std::move(up));
            r.lower = backward_path(f1.step, std::move(lo));
            r.zero_tick = -static_cast<std::int64_t>(z);
            r.meet_tick = -static_cast<std::int64_t>(c - z);
            return r;
        }
        z = c;
    }
    return r;
}

GammaResult gamma_n_map(const GridPath& f1, const GridPath& f2, std::int64_t n_level) {
    check_pair_input(f1, f2);
    if (n_level < 1) throw std::invalid_argument("gamma_n_map: n must be at least 1");
    const std::int64_t m = ticks_per_unit(f1.step);
    const double level = 1.0 / static_cast<double>(n_level);
    const auto& a = f1.values;
    const auto& b = f2.values;
    const std::size_t n = std::min(a.size(), b.size());
    GammaResult r{false, f1, f2, 0, 0};

    std::size_t j = 0;
    while (j < n) {
        // first tick at or after j where the gap reaches the level
        std::size_t h = j;
        while (h < n && std::fabs(a[h] - b[h]) < level) ++h;
        if (h >= n) return r;
        // next contact after h
        std::size_t c = h;
        while (c + 1 < n) {
            double d0 = a[c] - b[c];
            if (d0 != 0.0 && sign_crossed(d0, a[c + 1] - b[c + 1])) break;
            ++c;
        }
        if (c + 1 >= n) return r;  // no coalescence inside the sampled range
        const std::size_t meet = c + 1;
        if (static_cast<std::int64_t>(meet - h) > m) {
            const double y0 = std::min(a[h], b[h]);
            std::vector<double> up, lo;
            fill_recentred(a, b, h, y0, meet - h, n - h, up, lo);
            r.in_domain = true;
            r.upper = backward_path(f1.step, std::move(up));
            r.lower = backward_path(f1.step, std::move(lo));
            r.zero_tick = -static_cast<std::int64_t>(h);
            r.meet_tick = -static_cast<std::int64_t>(meet - h);
            return r;
        }
        j = meet;
    }
    return r;
}

double pair_sup_distance(const GridPath& u1, const GridPath& l1, const GridPath& u2, const GridPath& l2,
                         std::int64_t depth_ticks) {
    double d = 0.0;
    for (std::int64_t k = 0; k <= depth_ticks; ++k) {
        const std::int64_t t = -k;
        if (!u1.has_tick(t) || !l1.has_tick(t) || !u2.has_tick(t) || !l2.has_tick(t)) break;
        d = std::max({d, std::fabs(u1.at_tick(t) - u2.at_tick(t)), std::fabs(l1.at_tick(t) - l2.at_tick(t))});
    }
    return d;
}

ConditionedPair sample_conditioned_pair(std::uint64_t seed, std::int64_t n, double step,
                                        const ConditionedPairOptions& opt) {
    const std::int64_t m = ticks_per_unit(step);
    if (n < 1) throw std::invalid_argument("sample_conditioned_pair: n must be at least 1");
    const auto horizon = std::max<std::int64_t>(m + 1, std::llround(opt.horizon / step));
    PairStream s(seed, step);
    const double start = 1.0 / static_cast<double>(n);
    const double sd = std::sqrt(step);
    ConditionedPair out;
    std::vector<double> up, lo;
    for (out.attempts = 1; out.attempts <= opt.max_attempts; ++out.attempts) {
        up.assign(1, start);
        lo.assign(1, 0.0);
        double u = start, l = 0.0;
        std::int64_t k = 0;
        bool met = false;
        while (k < horizon) {
            double nu = u + sd * s.gauss();
            double nl = l + sd * s.gauss();
            ++k;
            met = s.contact(u - l, nu - nl, opt.rule);
            u = nu, l = nl;
            if (opt.keep_paths || k <= m) {
                up.push_back(u);
                lo.push_back(met ? u : l);
            }
            if (met) break;
        }
        if (met && k <= m) continue;  // rejected: the pair met within one unit
        out.censored = !met;
        out.meet_tick = met ? -k : 0;
        if (opt.keep_paths) {
            out.upper = backward_path(step, std::move(up));
            out.lower = backward_path(step, std::move(lo));
        }
        return out;
    }
    throw std::runtime_error("sample_conditioned_pair: attempt budget exhausted");
}

AcceptanceCount conditioned_acceptance(std::uint64_t seed, std::int64_t n, double step, std::int64_t trials,
                                       CrossingRule rule) {
    const std::int64_t m = ticks_per_unit(step);
    if (n < 1 || trials < 0) throw std::invalid_argument("conditioned_acceptance: bad arguments");
    PairStream s(seed, step);
    const double sd = std::sqrt(2.0 * step);
    AcceptanceCount c;
    c.trials = trials;
    for (std::int64_t t = 0; t < trials; ++t) {
        double d = 1.0 / static_cast<double>(n);
        bool met = false;
        for (std::int64_t k = 0; k < m && !met; ++k) {
            double nd = d + sd * s.gauss();
            met = s.contact(d, nd, rule);
            d = nd;
        }
        if (!met) ++c.accepted;
    }
    return c;
}

nlohmann::json boundary_to_json(const BoundaryPair& b) {
    return nlohmann::json{{"step", b.step}, {"meet_tick", b.meet_tick}, {"censored", b.censored}, {"upper", b.upper.values}, {"lower", b.lower.values}};
}

nlohmann::json skeleton_to_json(const Skeleton& s) {
    nlohmann::json paths = nlohmann::json::array();
    for (std::size_t i = 0; i < s.family.paths.size(); ++i) {
        const auto& p = s.family.paths[i];
        paths.push_back({{"start_tick", p.start_tick},
                         {"values", p.values},
                         {"merge_target", s.merge_target[i]},
                         {"merge_tick", s.merge_tick[i]}});
    }
    nlohmann::json starts = nlohmann::json::array();
    for (const auto& st : s.starts) starts.push_back({st.x, st.tick});
    return nlohmann::json{{"schema", kSkeletonSchema},
                          {"orientation", to_string(s.orientation)},
                          {"step", s.step},
                          {"boundary", boundary_to_json(s.boundary)},
                          {"starts", starts},
                          {"paths", paths}};
}

} // namespace drainage
