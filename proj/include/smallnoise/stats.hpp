#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace smallnoise {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased, n-1 denominator

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

// Ordinary least squares of y on x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Least squares of log(y) on log(x); inputs must be strictly positive.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

double normal_cdf(double x, double mu = 0.0, double sigma = 1.0);

// Kolmogorov limiting tail Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_tail(double lambda);

struct KsResult {
    double statistic = 0.0;
    double p_value = 0.0;
};

// One-sample KS test of `samples` against Normal(mu, sigma), p-value from the
// asymptotic tail with the Stephens small-sample correction.
KsResult ks_test_normal(std::vector<double> samples, double mu, double sigma);

}  // namespace smallnoise
