#include "apf/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

namespace apf {

namespace {

constexpr double kSqrtPi = 1.7724538509055160272981674833411;  // sqrt(pi)
constexpr double kSqrt2 = 1.4142135623730950488016887242097;

GaussHermiteRule build_rule(int n) {
    // Golub-Welsch on the Jacobi matrix of the Hermite recurrence:
    // diagonal zero, off-diagonal sqrt(i/2).
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        double b = std::sqrt(static_cast<double>(i) / 2.0);
        jacobi(i, i - 1) = b;
        jacobi(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("gauss_hermite: eigendecomposition failed");
    }
    GaussHermiteRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    rule.log_weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
        double v0 = solver.eigenvectors()(0, i);
        double w = kSqrtPi * v0 * v0;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.log_weights[static_cast<std::size_t>(i)] = std::log(w);
    }
    return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
    static std::mutex mutex;
    static std::map<int, GaussHermiteRule> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
    return it->second;
}

double integrate_gaussian(const GaussHermiteRule& rule, double mean, double stddev,
                          const std::function<double(double)>& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        acc += rule.weights[i] * f(mean + kSqrt2 * stddev * rule.nodes[i]);
    }
    return acc / kSqrtPi;
}

std::vector<double> UniformGrid::points() const {
    std::vector<double> xs(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i) xs[static_cast<std::size_t>(i)] = point(i);
    return xs;
}

double UniformGrid::weight(int i) const {
    double h = step();
    return (i == 0 || i == nodes - 1) ? 0.5 * h : h;
}

double trapezoid(const std::vector<double>& values, double step) {
    if (values.size() < 2) throw std::invalid_argument("trapezoid: need >= 2 values");
    double acc = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) acc += values[i];
    return acc * step;
}

double log_sum_exp(const std::vector<double>& terms) {
    double m = -std::numeric_limits<double>::infinity();
    for (double t : terms) m = std::max(m, t);
    if (!std::isfinite(m)) return m;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - m);
    return m + std::log(acc);
}

}  // namespace apf
