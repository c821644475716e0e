#pragma once

#include <span>
#include <vector>

namespace somrel {

double mean(std::span<const double> values);

// Sample standard deviation (n-1 denominator). Requires at least 2 values.
double sample_stddev(std::span<const double> values);

// Full probability mass function of Binomial(n, p), indices 0..n.
std::vector<double> binomial_pmf(int n, double p);

// P(X <= k) for X ~ Binomial(n, p). k < 0 gives 0, k >= n gives 1.
double binomial_cdf(int k, int n, double p);

// P(X >= k), summed from the top to avoid cancellation.
double binomial_upper_tail(int k, int n, double p);

// Inverse standard normal CDF for q in (0, 1). Acklam's rational
// approximation refined with one Halley step; good to ~1e-15.
double normal_quantile(double q);

}  // namespace somrel
