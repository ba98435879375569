#include "apf/proposal.hpp"

#include <cmath>
#include <stdexcept>

#include "apf/stats.hpp"

namespace apf {

double ProposalKernel::log_dq_dr(double x, double y_next, double x_next) const {
    return model_.log_transition_density(x, x_next) - log_density(x, y_next, x_next);
}

double ProposalKernel::sample(double x, double y_next, RngStream& rng) const {
    GaussianLaw g = law(x, y_next);
    return g.mean + g.stddev * rng.normal();
}

double ProposalKernel::log_density(double x, double y_next, double x_next) const {
    GaussianLaw g = law(x, y_next);
    return log_normal_density(x_next, g.mean, g.stddev);
}

GaussianLaw OptimalGaussianProposal::law(double x, double y_next) const {
    double sv2 = additive_.observation_std() * additive_.observation_std();
    double sw = additive_.transition_std(x);
    double sw2 = sw * sw;
    double var_opt = sv2 * sw2 / (sv2 + sw2);
    double mean_opt = (y_next / sv2 + additive_.transition_mean(x) / sw2) * var_opt;
    return {mean_opt, std::sqrt(var_opt)};
}

double SvLaplaceProposal::log_target_derivative(double x, double y_next,
                                                double x_prime) const {
    // d/dx' [ log g(y|x') + log q(x,x') ] for the SV likelihood
    // g(y|x') = N(y; 0, beta^2 exp(x')).
    double beta2 = sv_.beta() * sv_.beta();
    double sigma2 = sv_.sigma() * sv_.sigma();
    return -0.5 + 0.5 * y_next * y_next * std::exp(-x_prime) / beta2 -
           (x_prime - sv_.phi() * x) / sigma2;
}

double SvLaplaceProposal::mode(double x, double y_next) const {
    double beta2 = sv_.beta() * sv_.beta();
    double sigma2 = sv_.sigma() * sv_.sigma();
    double m = sv_.phi() * x;  // Newton start: prior mean
    for (int iter = 0; iter < 50; ++iter) {
        double e = 0.5 * y_next * y_next * std::exp(-m) / beta2;
        double d1 = -0.5 + e - (m - sv_.phi() * x) / sigma2;
        double d2 = -e - 1.0 / sigma2;  // strictly negative: log-concave
        double step = d1 / d2;
        m -= step;
        if (std::fabs(step) < 1e-10) return m;
    }
    // Newton oscillated; the derivative is strictly decreasing, so bisect.
    double lo = sv_.phi() * x, hi = lo;
    double width = std::max(1.0, sv_.sigma());
    while (log_target_derivative(x, y_next, lo) < 0.0) lo -= width;
    while (log_target_derivative(x, y_next, hi) > 0.0) hi += width;
    for (int iter = 0; iter < 80; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (log_target_derivative(x, y_next, mid) > 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

GaussianLaw SvLaplaceProposal::law(double x, double y_next) const {
    double m = mode(x, y_next);
    double beta2 = sv_.beta() * sv_.beta();
    double sigma2 = sv_.sigma() * sv_.sigma();
    double curvature = 0.5 * y_next * y_next * std::exp(-m) / beta2 + 1.0 / sigma2;
    return {m, std::sqrt(1.0 / curvature)};
}

}  // namespace apf
