#include "somrel/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace somrel {

double mean(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean of empty range");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
    if (values.size() < 2) throw std::invalid_argument("sample_stddev needs at least 2 values");
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

static void check_binomial_args(int n, double p) {
    if (n < 0) throw std::invalid_argument("binomial trial count must be >= 0");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("binomial probability must be in (0, 1)");
}

std::vector<double> binomial_pmf(int n, double p) {
    check_binomial_args(n, p);
    std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    const double lg_n1 = std::lgamma(n + 1.0);
    for (int k = 0; k <= n; ++k) {
        const double log_pmf = lg_n1 - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                               k * log_p + (n - k) * log_q;
        pmf[static_cast<std::size_t>(k)] = std::exp(log_pmf);
    }
    return pmf;
}

double binomial_cdf(int k, int n, double p) {
    check_binomial_args(n, p);
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    const auto pmf = binomial_pmf(n, p);
    double sum = 0.0;
    for (int i = 0; i <= k; ++i) sum += pmf[static_cast<std::size_t>(i)];
    return sum;
}

double binomial_upper_tail(int k, int n, double p) {
    check_binomial_args(n, p);
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    const auto pmf = binomial_pmf(n, p);
    double sum = 0.0;
    for (int i = n; i >= k; --i) sum += pmf[static_cast<std::size_t>(i)];
    return sum;
}

double normal_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("normal_quantile argument must be in (0, 1)");

    // Acklam's rational approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;

    double x;
    if (q < p_low) {
        const double r = std::sqrt(-2.0 * std::log(q));
        x = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
            ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
    } else if (q <= 1.0 - p_low) {
        const double r = q - 0.5;
        const double s = r * r;
        x = (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * r /
            (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
    } else {
        const double r = std::sqrt(-2.0 * std::log(1.0 - q));
        x = -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
            ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
    }

    // One Halley refinement against erfc.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - q;
    const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

}  // namespace somrel
