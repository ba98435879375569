#pragma once

#include <cstddef>
#include <vector>

namespace apf {

double mean(const std::vector<double>& xs);
/// Unbiased sample variance (ddof = 1).
double sample_variance(const std::vector<double>& xs);

double log_normal_density(double x, double mu, double sigma);
double normal_pdf(double x, double mu, double sigma);
double normal_cdf(double z);

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Student-t CDF with df degrees of freedom.
double student_t_cdf(double t, double df);
/// Upper-tail quantile: P(T <= result) = p.
double student_t_quantile(double p, double df);

struct TTest {
    double statistic = 0.0;
    double df = 0.0;
    /// One-sided p-value for the alternative "mean difference < 0".
    double p_less = 1.0;
    /// One-sided p-value for the alternative "mean difference > 0".
    double p_greater = 1.0;
};

/// Paired t-test on differences a[i] - b[i].
TTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

/// Welch two-sample t-test on the difference of means (a vs b).
TTest welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double slope_t = 0.0;      // slope / stderr
    double df = 0.0;           // n - 2
};

/// Ordinary least-squares line fit with the classic slope t-statistic.
LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace apf
