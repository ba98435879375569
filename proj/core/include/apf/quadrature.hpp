#pragma once

#include <functional>
#include <vector>

namespace apf {

/// Physicists' Gauss-Hermite rule: integral of exp(-t^2) f(t) dt
/// approximated by sum_i weights[i] * f(nodes[i]).
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> log_weights;
};

/// Cached rule of order n (n >= 1). Nodes/weights via Golub-Welsch.
const GaussHermiteRule& gauss_hermite(int n);

/// Integral of f against N(mean, stddev^2) using the given rule.
double integrate_gaussian(const GaussHermiteRule& rule, double mean,
                          double stddev, const std::function<double(double)>& f);

/// Uniform grid on [lo, hi] with `nodes` points (nodes >= 2).
struct UniformGrid {
    double lo = 0.0;
    double hi = 1.0;
    int nodes = 2;

    double step() const { return (hi - lo) / static_cast<double>(nodes - 1); }
    double point(int i) const { return lo + step() * static_cast<double>(i); }
    std::vector<double> points() const;
    /// Trapezoid weight of node i (step/2 at the ends, step inside).
    double weight(int i) const;
};

/// Trapezoid-rule integral of tabulated values on a uniform grid.
double trapezoid(const std::vector<double>& values, double step);

/// Numerically stable log(sum(exp(terms))); -inf for an empty or all -inf input.
double log_sum_exp(const std::vector<double>& terms);

}  // namespace apf
