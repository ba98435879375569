#include "apf/models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "apf/stats.hpp"

namespace apf {

LinearGaussianAR1::LinearGaussianAR1(double phi, double sigma_w, double sigma_v,
                                     bool stationary_init)
    : phi_(phi), sigma_w_(sigma_w), sigma_v_(sigma_v), stationary_init_(stationary_init) {
    if (sigma_w <= 0.0 || sigma_v <= 0.0) {
        throw std::invalid_argument("LinearGaussianAR1: sigmas must be > 0");
    }
    if (stationary_init && std::fabs(phi) >= 1.0) {
        throw std::invalid_argument("LinearGaussianAR1: |phi| < 1 required for stationary init");
    }
    initial_std_ = stationary_init ? sigma_w / std::sqrt(1.0 - phi * phi) : sigma_w;
}

double LinearGaussianAR1::reference_std() const {
    return stationary_init_ ? initial_std_ : sigma_w_ / std::sqrt(std::max(1e-12, 1.0 - phi_ * phi_));
}

NoisyArch::NoisyArch(double beta0, double beta1, double sigma_v)
    : beta0_(beta0), beta1_(beta1), sigma_v_(sigma_v) {
    if (beta0 <= 0.0) throw std::invalid_argument("NoisyArch: beta0 must be > 0");
    if (beta1 < 0.0) throw std::invalid_argument("NoisyArch: beta1 must be >= 0");
    if (sigma_v <= 0.0) throw std::invalid_argument("NoisyArch: sigma_v must be > 0");
    initial_std_ = beta1 < 1.0 ? std::sqrt(beta0 / (1.0 - beta1)) : std::sqrt(beta0);
}

double NoisyArch::transition_std(double x) const {
    return std::sqrt(beta0_ + beta1_ * x * x);
}

StochasticVolatility::StochasticVolatility(double phi, double sigma, double beta,
                                           bool stationary_init)
    : phi_(phi), sigma_(sigma), beta_(beta) {
    if (sigma <= 0.0) throw std::invalid_argument("StochasticVolatility: sigma must be > 0");
    if (beta <= 0.0) throw std::invalid_argument("StochasticVolatility: beta must be > 0");
    if (stationary_init && std::fabs(phi) >= 1.0) {
        throw std::invalid_argument("StochasticVolatility: |phi| < 1 required for stationary init");
    }
    initial_std_ = stationary_init ? sigma / std::sqrt(1.0 - phi * phi) : sigma;
}

double StochasticVolatility::log_likelihood(double y, double x) const {
    // Y | X = x  ~  N(0, beta^2 exp(x))
    double obs_std = beta_ * std::exp(0.5 * x);
    return log_normal_density(y, 0.0, obs_std);
}

double StochasticVolatility::sample_observation(double x, RngStream& rng) const {
    return beta_ * std::exp(0.5 * x) * rng.normal();
}

TruncatedLinearGaussianAR1::TruncatedLinearGaussianAR1(double phi, double sigma_w,
                                                       double sigma_v, double bound)
    : phi_(phi), sigma_w_(sigma_w), sigma_v_(sigma_v), bound_(bound) {
    if (sigma_w <= 0.0 || sigma_v <= 0.0) {
        throw std::invalid_argument("TruncatedLinearGaussianAR1: sigmas must be > 0");
    }
    if (std::fabs(phi) >= 1.0) {
        throw std::invalid_argument("TruncatedLinearGaussianAR1: |phi| < 1 required");
    }
    if (bound <= 0.0) throw std::invalid_argument("TruncatedLinearGaussianAR1: bound must be > 0");
    initial_std_ = sigma_w / std::sqrt(1.0 - phi * phi);
}

double TruncatedLinearGaussianAR1::truncation_log_mass(double mean, double std) const {
    double hi = normal_cdf((bound_ - mean) / std);
    double lo = normal_cdf((-bound_ - mean) / std);
    double mass = hi - lo;
    if (mass <= 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(mass);
}

double TruncatedLinearGaussianAR1::sample_transition(double x, RngStream& rng) const {
    double m = transition_mean(x);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        double draw = m + sigma_w_ * rng.normal();
        if (draw >= -bound_ && draw <= bound_) return draw;
    }
    throw std::runtime_error("TruncatedLinearGaussianAR1: rejection sampler stalled");
}

double TruncatedLinearGaussianAR1::log_transition_density(double x, double x_next) const {
    if (x_next < -bound_ || x_next > bound_) {
        return -std::numeric_limits<double>::infinity();
    }
    double m = transition_mean(x);
    return log_normal_density(x_next, m, sigma_w_) - truncation_log_mass(m, sigma_w_);
}

double TruncatedLinearGaussianAR1::sample_initial(RngStream& rng) const {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        double draw = initial_std_ * rng.normal();
        if (draw >= -bound_ && draw <= bound_) return draw;
    }
    throw std::runtime_error("TruncatedLinearGaussianAR1: rejection sampler stalled");
}

double TruncatedLinearGaussianAR1::log_initial_density(double x) const {
    if (x < -bound_ || x > bound_) return -std::numeric_limits<double>::infinity();
    return log_normal_density(x, 0.0, initial_std_) -
           truncation_log_mass(0.0, initial_std_);
}

}  // namespace apf
