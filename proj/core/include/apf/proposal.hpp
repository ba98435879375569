#pragma once

#include "apf/models.hpp"
#include "apf/rng.hpp"
#include "apf/state_space.hpp"

namespace apf {

struct GaussianLaw {
    double mean = 0.0;
    double stddev = 1.0;
};

/// One-step proposal kernel R_k(x, .): a conditionally Gaussian sampler for
/// the next state given the source state and the next observation, plus the
/// pointwise log Radon-Nikodym ratio log dQ(x,.)/dR_k(x,.).
class ProposalKernel {
public:
    explicit ProposalKernel(const StateSpaceModel& model) : model_(model) {}
    virtual ~ProposalKernel() = default;

    virtual GaussianLaw law(double x, double y_next) const = 0;

    virtual double log_dq_dr(double x, double y_next, double x_next) const;

    double sample(double x, double y_next, RngStream& rng) const;
    /// log r_k(x, x') w.r.t. Lebesgue measure.
    double log_density(double x, double y_next, double x_next) const;

    const StateSpaceModel& model() const { return model_; }

private:
    const StateSpaceModel& model_;
};

/// R_k = Q: propagate through the model transition; dQ/dR is identically one.
class PriorProposal : public ProposalKernel {
public:
    using ProposalKernel::ProposalKernel;
    GaussianLaw law(double x, double /*y_next*/) const override {
        return {model().transition_mean(x), model().transition_std(x)};
    }
    double log_dq_dr(double, double, double) const override { return 0.0; }
};

/// Exact optimal kernel (the law of X_{k+1} given X_k and Y_{k+1}) for
/// additive Gaussian observation models:
///   mu_opt(x)     = [y/sigma_v^2 + m(x)/sigma_w^2(x)] sigma_opt^2(x)
///   sigma_opt^2(x) = sigma_v^2 sigma_w^2(x) / (sigma_v^2 + sigma_w^2(x)).
class OptimalGaussianProposal : public ProposalKernel {
public:
    explicit OptimalGaussianProposal(const AdditiveGaussianObservationModel& model)
        : ProposalKernel(model), additive_(model) {}

    GaussianLaw law(double x, double y_next) const override;

    const AdditiveGaussianObservationModel& additive_model() const { return additive_; }

private:
    const AdditiveGaussianObservationModel& additive_;
};

/// Gaussian approximation of the optimal kernel for the SV model: a second
/// order Taylor expansion of log[g(y|x') q(x,x')] around its mode (found by
/// Newton iterations; the function is strictly log-concave).
class SvLaplaceProposal : public ProposalKernel {
public:
    explicit SvLaplaceProposal(const StochasticVolatility& model)
        : ProposalKernel(model), sv_(model) {}

    GaussianLaw law(double x, double y_next) const override;

    /// Mode of x' -> log[g(y|x') q(x,x')].
    double mode(double x, double y_next) const;
    /// Derivative of the log target at x' (for mode verification).
    double log_target_derivative(double x, double y_next, double x_prime) const;

    const StochasticVolatility& sv_model() const { return sv_; }

private:
    const StochasticVolatility& sv_;
};

}  // namespace apf
