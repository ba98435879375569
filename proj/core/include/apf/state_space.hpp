#pragma once

#include <optional>
#include <string>
#include <vector>

#include "apf/rng.hpp"

namespace apf {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Scalar state-space model with a conditionally Gaussian transition
///   X_{k+1} = transition_mean(X_k) + transition_std(X_k) * W_{k+1},
/// observation likelihood g(y | x), and Gaussian initial law.
class StateSpaceModel {
public:
    virtual ~StateSpaceModel() = default;

    virtual std::string name() const = 0;

    virtual double transition_mean(double x) const = 0;
    virtual double transition_std(double x) const = 0;

    /// log g(y | x)
    virtual double log_likelihood(double y, double x) const = 0;
    virtual double sample_observation(double x, RngStream& rng) const = 0;

    virtual double initial_mean() const = 0;
    virtual double initial_std() const = 0;

    /// Hard state support; nullopt means the whole real line.
    virtual std::optional<Interval> support() const { return std::nullopt; }

    virtual double sample_transition(double x, RngStream& rng) const;
    /// log q(x, x') w.r.t. Lebesgue measure.
    virtual double log_transition_density(double x, double x_next) const;
    virtual double sample_initial(RngStream& rng) const;
    virtual double log_initial_density(double x) const;

    /// Scale hint used to size quadrature grids.
    virtual double reference_std() const { return initial_std(); }
};

/// Models with Y_k = X_k + sigma_v V_k; these admit the closed-form optimal
/// (locally conditional) Gaussian proposal kernel.
class AdditiveGaussianObservationModel : public StateSpaceModel {
public:
    virtual double observation_std() const = 0;

    double log_likelihood(double y, double x) const override;
    double sample_observation(double x, RngStream& rng) const override;
};

struct Trajectory {
    std::vector<double> states;
    std::vector<double> observations;
};

/// Joint draw of (x_{0:n}, y_{0:n}); deterministic given the stream.
Trajectory simulate(const StateSpaceModel& model, int horizon, RngStream& rng);

}  // namespace apf
