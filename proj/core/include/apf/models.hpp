#pragma once

#include "apf/state_space.hpp"

namespace apf {

/// First-order linear Gaussian autoregression observed in Gaussian noise:
///   X_{k+1} = phi X_k + sigma_w W_{k+1},   Y_k = X_k + sigma_v V_k.
/// With stationary_init, X_0 ~ N(0, sigma_w^2 / (1 - phi^2)).
class LinearGaussianAR1 : public AdditiveGaussianObservationModel {
public:
    LinearGaussianAR1(double phi, double sigma_w, double sigma_v,
                      bool stationary_init = true);

    std::string name() const override { return "linear-gaussian-ar1"; }
    double transition_mean(double x) const override { return phi_ * x; }
    double transition_std(double) const override { return sigma_w_; }
    double observation_std() const override { return sigma_v_; }
    double initial_mean() const override { return 0.0; }
    double initial_std() const override { return initial_std_; }
    double reference_std() const override;

    double phi() const { return phi_; }
    double sigma_w() const { return sigma_w_; }
    double sigma_v() const { return sigma_v_; }
    bool stationary_init() const { return stationary_init_; }

private:
    double phi_;
    double sigma_w_;
    double sigma_v_;
    bool stationary_init_;
    double initial_std_;
};

/// Gaussian ARCH(1) state observed in noise:
///   X_{k+1} = sqrt(beta0 + beta1 X_k^2) W_{k+1},   Y_k = X_k + sigma_v V_k.
/// No closed-form stationary law; X_0 ~ N(0, beta0 / (1 - beta1)) when
/// beta1 < 1, else N(0, beta0).
class NoisyArch : public AdditiveGaussianObservationModel {
public:
    NoisyArch(double beta0, double beta1, double sigma_v);

    std::string name() const override { return "noisy-arch"; }
    double transition_mean(double) const override { return 0.0; }
    double transition_std(double x) const override;
    double observation_std() const override { return sigma_v_; }
    double initial_mean() const override { return 0.0; }
    double initial_std() const override { return initial_std_; }

    double beta0() const { return beta0_; }
    double beta1() const { return beta1_; }

private:
    double beta0_;
    double beta1_;
    double sigma_v_;
    double initial_std_;
};

/// Canonical discrete-time stochastic volatility model:
///   X_{k+1} = phi X_k + sigma W_{k+1},   Y_k = beta exp(X_k / 2) V_k,
/// with the log-volatility chain started at stationarity.
class StochasticVolatility : public StateSpaceModel {
public:
    StochasticVolatility(double phi, double sigma, double beta,
                         bool stationary_init = true);

    std::string name() const override { return "stochastic-volatility"; }
    double transition_mean(double x) const override { return phi_ * x; }
    double transition_std(double) const override { return sigma_; }
    double log_likelihood(double y, double x) const override;
    double sample_observation(double x, RngStream& rng) const override;
    double initial_mean() const override { return 0.0; }
    double initial_std() const override { return initial_std_; }

    double phi() const { return phi_; }
    double sigma() const { return sigma_; }
    double beta() const { return beta_; }

private:
    double phi_;
    double sigma_;
    double beta_;
    double initial_std_;
};

/// Linear Gaussian AR(1) with the state clamped to a compact interval via
/// rejection on the transition/initial draws; the transition density is
/// renormalized per source state. The compact support gives the uniform
/// mixing needed for time-uniform stability experiments.
class TruncatedLinearGaussianAR1 : public AdditiveGaussianObservationModel {
public:
    TruncatedLinearGaussianAR1(double phi, double sigma_w, double sigma_v,
                               double bound);

    std::string name() const override { return "truncated-linear-gaussian-ar1"; }
    double transition_mean(double x) const override { return phi_ * x; }
    double transition_std(double) const override { return sigma_w_; }
    double observation_std() const override { return sigma_v_; }
    double initial_mean() const override { return 0.0; }
    double initial_std() const override { return initial_std_; }
    std::optional<Interval> support() const override {
        return Interval{-bound_, bound_};
    }

    double sample_transition(double x, RngStream& rng) const override;
    double log_transition_density(double x, double x_next) const override;
    double sample_initial(RngStream& rng) const override;
    double log_initial_density(double x) const override;

private:
    double truncation_log_mass(double mean, double std) const;

    double phi_;
    double sigma_w_;
    double sigma_v_;
    double bound_;
    double initial_std_;
};

}  // namespace apf
