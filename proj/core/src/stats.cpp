#include "apf/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace apf {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty input");
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) throw std::invalid_argument("sample_variance: need >= 2 values");
    double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return acc / static_cast<double>(xs.size() - 1);
}

double log_normal_density(double x, double mu, double sigma) {
    double z = (x - mu) / sigma;
    return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

double normal_pdf(double x, double mu, double sigma) {
    return std::exp(log_normal_density(x, mu, sigma));
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

namespace {

// Lentz continued fraction for the incomplete beta function.
double betacf(double a, double b, double x) {
    const int max_iter = 300;
    const double eps = 3.0e-14;
    const double fpmin = 1.0e-300;
    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
    double x = df / (df + t * t);
    double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double df) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("student_t_quantile: p in (0,1)");
    double lo = -1e3, hi = 1e3;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, df) < p) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

TTest one_sample_t(const std::vector<double>& d) {
    if (d.size() < 2) throw std::invalid_argument("t-test: need >= 2 observations");
    double n = static_cast<double>(d.size());
    double m = mean(d);
    double v = sample_variance(d);
    TTest out;
    out.df = n - 1.0;
    if (v <= 0.0) {
        out.statistic = m == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), m);
    } else {
        out.statistic = m / std::sqrt(v / n);
    }
    out.p_less = student_t_cdf(out.statistic, out.df);
    out.p_greater = 1.0 - out.p_less;
    return out;
}

}  // namespace

TTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("paired_t_test: size mismatch");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return one_sample_t(d);
}

TTest welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_t_test: need >= 2 per group");
    double na = static_cast<double>(a.size());
    double nb = static_cast<double>(b.size());
    double va = sample_variance(a) / na;
    double vb = sample_variance(b) / nb;
    TTest out;
    out.statistic = (mean(a) - mean(b)) / std::sqrt(va + vb);
    out.df = (va + vb) * (va + vb) /
             (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    out.p_less = student_t_cdf(out.statistic, out.df);
    out.p_greater = 1.0 - out.p_less;
    return out;
}

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 3) {
        throw std::invalid_argument("fit_line: need >= 3 paired points");
    }
    double n = static_cast<double>(xs.size());
    double mx = mean(xs), my = mean(ys);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("fit_line: degenerate x values");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = ys[i] - fit.intercept - fit.slope * xs[i];
        rss += r * r;
    }
    fit.df = n - 2.0;
    double sigma2 = rss / fit.df;
    fit.slope_stderr = std::sqrt(sigma2 / sxx);
    fit.slope_t = fit.slope_stderr > 0.0 ? fit.slope / fit.slope_stderr
                                         : std::numeric_limits<double>::infinity();
    return fit;
}

}  // namespace apf
