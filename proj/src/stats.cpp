#include "drainage/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace drainage::stats {

double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe r;
    r.count = v.size();
    if (v.empty()) return r;
    r.mean = pairwise_sum(v) / static_cast<double>(v.size());
    if (v.size() < 2) return r;
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - r.mean) * (v[i] - r.mean);
    double var = pairwise_sum(sq) / static_cast<double>(v.size() - 1);
    r.se = std::sqrt(var / static_cast<double>(v.size()));
    return r;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 200; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

namespace {

// Asymptotic p-value with the usual small-sample correction to lambda.
double ks_p(double d, double ne) {
    double root = std::sqrt(ne);
    return kolmogorov_sf((root + 0.12 + 0.11 / root) * d);
}

} // namespace

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(i / na - j / nb));
    }
    return {d, ks_p(d, na * nb / (na + nb))};
}

KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
    if (a.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
    std::sort(a.begin(), a.end());
    const double n = static_cast<double>(a.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double f = cdf(a[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return {d, ks_p(d, n)};
}

double chi_square_sf(double x, double dof) {
    if (dof <= 0) throw std::invalid_argument("chi_square_sf: dof must be positive");
    if (x <= 0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), x));
}

KsResult chi_square_gof(const std::vector<double>& observed, const std::vector<double>& probs) {
    if (observed.size() != probs.size() || observed.size() < 2)
        throw std::invalid_argument("chi_square_gof: need matching category vectors");
    double total = 0.0;
    for (double o : observed) total += o;
    double stat = 0.0;
    for (std::size_t k = 0; k < observed.size(); ++k) {
        double e = total * probs[k];
        if (e <= 0) throw std::invalid_argument("chi_square_gof: zero expected count");
        stat += (observed[k] - e) * (observed[k] - e) / e;
    }
    return {stat, chi_square_sf(stat, static_cast<double>(observed.size() - 1))};
}

} // namespace drainage::stats
