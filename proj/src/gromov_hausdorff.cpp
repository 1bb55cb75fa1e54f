#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "drainage/metric_geometry.hpp"

namespace drainage {

double distortion(const FiniteMetricSpace& x, const FiniteMetricSpace& y,
                  const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    double d = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        for (std::size_t j = i + 1; j < pairs.size(); ++j)
            d = std::max(d, std::fabs(x(pairs[i].first, pairs[j].first) - y(pairs[i].second, pairs[j].second)));
    return d;
}

namespace {

// Is there a correspondence of distortion <= eps? Backtracking over the
// uncovered point with the fewest admissible partners. A subset of an
// admissible correspondence is admissible, so the search is complete.
class CorrespondenceSearch {
public:
    CorrespondenceSearch(const FiniteMetricSpace& x, const FiniteMetricSpace& y, double eps)
        : x_(x), y_(y), nx_(x.size()), ny_(y.size()), eps_(eps) {
        const std::size_t np = nx_ * ny_;
        compat_.assign(np * np, 0);
        for (std::size_t p = 0; p < np; ++p)
            for (std::size_t q = 0; q < np; ++q)
                compat_[p * np + q] =
                    std::fabs(x_(p / ny_, q / ny_) - y_(p % ny_, q % ny_)) <= eps_ ? 1 : 0;
        cover_x_.assign(nx_, 0);
        cover_y_.assign(ny_, 0);
    }

    bool run() { return search(); }

private:
    bool admissible(std::size_t p) const {
        const std::size_t np = nx_ * ny_;
        if (!compat_[p * np + p]) return false;
        for (auto q : chosen_)
            if (!compat_[p * np + q]) return false;
        return true;
    }

    bool search() {
        // pick the uncovered element with the fewest admissible pairs
        std::vector<std::size_t> best;
        bool found_uncovered = false;
        for (std::size_t a = 0; a < nx_ + ny_; ++a) {
            bool is_x = a < nx_;
            std::size_t e = is_x ? a : a - nx_;
            if (is_x ? cover_x_[e] : cover_y_[e]) continue;
            found_uncovered = true;
            std::vector<std::size_t> options;
            std::size_t other = is_x ? ny_ : nx_;
            for (std::size_t o = 0; o < other; ++o) {
                std::size_t p = is_x ? e * ny_ + o : o * ny_ + e;
                if (admissible(p)) options.push_back(p);
            }
            if (options.empty()) return false;
            if (best.empty() || options.size() < best.size()) best = std::move(options);
            if (best.size() == 1) break;
        }
        if (!found_uncovered) return true;
        for (auto p : best) {
            chosen_.push_back(p);
            ++cover_x_[p / ny_];
            ++cover_y_[p % ny_];
            if (search()) return true;
            --cover_x_[p / ny_];
            --cover_y_[p % ny_];
            chosen_.pop_back();
        }
        return false;
    }

    const FiniteMetricSpace& x_;
    const FiniteMetricSpace& y_;
    std::size_t nx_, ny_;
    double eps_;
    std::vector<char> compat_;
    std::vector<int> cover_x_, cover_y_;
    std::vector<std::size_t> chosen_;
};

std::vector<double> sorted_row(const FiniteMetricSpace& m, std::size_t i) {
    std::vector<double> r(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) r[j] = m(i, j);
    std::sort(r.begin(), r.end());
    return r;
}

// Hausdorff distance between two sorted sets of reals.
double hausdorff_1d(const std::vector<double>& a, const std::vector<double>& b) {
    auto one_side = [](const std::vector<double>& u, const std::vector<double>& v) {
        double worst = 0.0;
        std::size_t k = 0;
        for (double s : u) {
            while (k + 1 < v.size() && v[k + 1] <= s) ++k;
            double d = std::fabs(s - v[k]);
            if (k + 1 < v.size()) d = std::min(d, std::fabs(v[k + 1] - s));
            worst = std::max(worst, d);
        }
        return worst;
    };
    return std::max(one_side(a, b), one_side(b, a));
}

void require_nonempty(const FiniteMetricSpace& x, const FiniteMetricSpace& y) {
    if (x.size() == 0 || y.size() == 0) throw std::invalid_argument("Gromov-Hausdorff: empty space");
}

} // namespace

double gh_exact(const FiniteMetricSpace& x, const FiniteMetricSpace& y, std::size_t cap) {
    require_nonempty(x, y);
    if (x.size() > cap || y.size() > cap)
        throw std::length_error("gh_exact: more than " + std::to_string(cap) +
                                " points; use gh_bounds for larger spaces");
    // The optimal distortion is one of the values |dX(a,b) - dY(c,d)|.
    std::vector<double> cand;
    cand.reserve(x.dist.size() * y.dist.size());
    for (double a : x.dist)
        for (double b : y.dist) cand.push_back(std::fabs(a - b));
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    std::size_t lo = 0, hi = cand.size() - 1;  // the largest candidate is always feasible
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (CorrespondenceSearch(x, y, cand[mid]).run()) hi = mid;
        else lo = mid + 1;
    }
    return 0.5 * cand[lo];
}

GhBounds gh_bounds(const FiniteMetricSpace& x, const FiniteMetricSpace& y) {
    require_nonempty(x, y);
    const std::size_t nx = x.size(), ny = y.size();
    std::vector<std::vector<double>> rx(nx), ry(ny);
    for (std::size_t i = 0; i < nx; ++i) rx[i] = sorted_row(x, i);
    for (std::size_t j = 0; j < ny; ++j) ry[j] = sorted_row(y, j);

    // h[i][j]: Hausdorff distance between the distance profiles of x_i and y_j.
    // Any pair in a correspondence of distortion e has h <= e.
    std::vector<double> h(nx * ny);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) h[i * ny + j] = hausdorff_1d(rx[i], ry[j]);

    double lower = std::fabs(x.diameter() - y.diameter());
    std::vector<std::size_t> f(nx), g(ny);
    for (std::size_t i = 0; i < nx; ++i) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < ny; ++j)
            if (h[i * ny + j] < m) m = h[i * ny + j], f[i] = j;
        lower = std::max(lower, m);
    }
    for (std::size_t j = 0; j < ny; ++j) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < nx; ++i)
            if (h[i * ny + j] < m) m = h[i * ny + j], g[j] = i;
        lower = std::max(lower, m);
    }

    auto pairs_of = [&](const std::vector<std::size_t>& ff, const std::vector<std::size_t>& gg) {
        std::vector<std::pair<std::size_t, std::size_t>> p;
        p.reserve(nx + ny);
        for (std::size_t i = 0; i < nx; ++i) p.emplace_back(i, ff[i]);
        for (std::size_t j = 0; j < ny; ++j) p.emplace_back(gg[j], j);
        return p;
    };

    double upper = distortion(x, y, pairs_of(f, g));
    if (nx == ny) {
        std::vector<std::pair<std::size_t, std::size_t>> id;
        for (std::size_t i = 0; i < nx; ++i) id.emplace_back(i, i);
        double d = distortion(x, y, id);
        if (d < upper) {
            upper = d;
            for (std::size_t i = 0; i < nx; ++i) f[i] = g[i] = i;
        }
    }

    // Coordinate descent on single assignments of f and g; a few sweeps only.
    for (int sweep = 0; sweep < 3 && upper > lower; ++sweep) {
        bool improved = false;
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t j = 0; j < ny; ++j) {
                if (j == f[i] || h[i * ny + j] >= upper) continue;
                std::size_t keep = f[i];
                f[i] = j;
                double d = distortion(x, y, pairs_of(f, g));
                if (d < upper) upper = d, improved = true;
                else f[i] = keep;
            }
        }
        for (std::size_t j = 0; j < ny; ++j) {
            for (std::size_t i = 0; i < nx; ++i) {
                if (i == g[j] || h[i * ny + j] >= upper) continue;
                std::size_t keep = g[j];
                g[j] = i;
                double d = distortion(x, y, pairs_of(f, g));
                if (d < upper) upper = d, improved = true;
                else g[j] = keep;
            }
        }
        if (!improved) break;
    }
    return {0.5 * lower, 0.5 * std::max(upper, lower)};
}

} // namespace drainage
