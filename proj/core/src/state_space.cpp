#include "apf/state_space.hpp"

#include <cmath>
#include <stdexcept>

#include "apf/stats.hpp"

namespace apf {

double StateSpaceModel::sample_transition(double x, RngStream& rng) const {
    return transition_mean(x) + transition_std(x) * rng.normal();
}

double StateSpaceModel::log_transition_density(double x, double x_next) const {
    return log_normal_density(x_next, transition_mean(x), transition_std(x));
}

double StateSpaceModel::sample_initial(RngStream& rng) const {
    return initial_mean() + initial_std() * rng.normal();
}

double StateSpaceModel::log_initial_density(double x) const {
    return log_normal_density(x, initial_mean(), initial_std());
}

double AdditiveGaussianObservationModel::log_likelihood(double y, double x) const {
    return log_normal_density(y, x, observation_std());
}

double AdditiveGaussianObservationModel::sample_observation(double x, RngStream& rng) const {
    return x + observation_std() * rng.normal();
}

Trajectory simulate(const StateSpaceModel& model, int horizon, RngStream& rng) {
    if (horizon < 0) throw std::invalid_argument("simulate: horizon must be >= 0");
    Trajectory out;
    out.states.reserve(static_cast<std::size_t>(horizon) + 1);
    out.observations.reserve(static_cast<std::size_t>(horizon) + 1);
    double x = model.sample_initial(rng);
    out.states.push_back(x);
    out.observations.push_back(model.sample_observation(x, rng));
    for (int k = 1; k <= horizon; ++k) {
        x = model.sample_transition(x, rng);
        out.states.push_back(x);
        out.observations.push_back(model.sample_observation(x, rng));
    }
    return out;
}

}  // namespace apf
