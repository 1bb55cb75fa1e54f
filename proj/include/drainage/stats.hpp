#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace drainage::stats {

// Pairwise summation; the tree shape depends only on the length, so a fixed
// input order gives a fixed result.
double pairwise_sum(const double* v, std::size_t n);
double pairwise_sum(const std::vector<double>& v);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
    std::size_t count = 0;
};

MeanSe mean_se(const std::vector<double>& v);

double normal_cdf(double x);

// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_sf(double lambda);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf);

// Upper tail of chi-square with `dof` degrees of freedom.
double chi_square_sf(double x, double dof);

// Pearson statistic and p-value for observed counts against expected probabilities.
KsResult chi_square_gof(const std::vector<double>& observed, const std::vector<double>& probs);

} // namespace drainage::stats
