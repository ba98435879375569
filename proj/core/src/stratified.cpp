#include "apf/stratified.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "apf/errors.hpp"
#include "apf/quadrature.hpp"
#include "apf/stats.hpp"

namespace apf {

GaussianDistribution::GaussianDistribution(double mean, double stddev)
    : mean_(mean), stddev_(stddev) {
    if (stddev <= 0.0) throw std::invalid_argument("GaussianDistribution: stddev must be > 0");
}

double GaussianDistribution::sample(RngStream& rng) const {
    return mean_ + stddev_ * rng.normal();
}

double GaussianDistribution::log_density(double x) const {
    return log_normal_density(x, mean_, stddev_);
}

void MixtureSpec::validate() const {
    if (components.empty()) throw std::invalid_argument("MixtureSpec: no components");
    if (allocation.size() != components.size()) {
        throw std::invalid_argument("MixtureSpec: allocation size mismatch");
    }
    double weight_total = 0.0, tau_total = 0.0;
    for (std::size_t i = 0; i < components.size(); ++i) {
        const MixtureComponent& c = components[i];
        if (!c.target || !c.proposal) throw std::invalid_argument("MixtureSpec: null measure");
        if (c.weight < 0.0) throw std::invalid_argument("MixtureSpec: negative weight");
        if (allocation[i] < 0.0) throw std::invalid_argument("MixtureSpec: negative allocation");
        if (c.weight > 0.0 && allocation[i] <= 0.0) {
            throw std::invalid_argument("MixtureSpec: allocation must be > 0 where weight > 0");
        }
        weight_total += c.weight;
        tau_total += allocation[i];
    }
    if (std::fabs(weight_total - 1.0) > 1e-9 || std::fabs(tau_total - 1.0) > 1e-9) {
        throw std::invalid_argument("MixtureSpec: weights and allocation must sum to 1");
    }
}

WeightedSample stratified_sample(const MixtureSpec& spec, int count, RngStream& rng) {
    spec.validate();
    if (count < 1) throw std::invalid_argument("stratified_sample: count must be >= 1");
    std::vector<double> cumulative(spec.allocation.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.allocation.size(); ++i) {
        acc += spec.allocation[i];
        cumulative[i] = acc;
    }
    cumulative.back() = 1.0;

    std::vector<double> states(static_cast<std::size_t>(count));
    std::vector<double> log_weights(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        double u = rng.uniform();
        std::size_t j = static_cast<std::size_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
        if (j >= spec.components.size()) j = spec.components.size() - 1;
        const MixtureComponent& comp = spec.components[j];
        double x = comp.proposal->sample(rng);
        states[static_cast<std::size_t>(i)] = x;
        log_weights[static_cast<std::size_t>(i)] =
            std::log(comp.weight) - std::log(spec.allocation[j]) +
            comp.target->log_density(x) - comp.proposal->log_density(x);
    }
    return WeightedSample::from_log(std::move(states), std::move(log_weights));
}

namespace {

UniformGrid quadrature_window(const MixtureSpec& spec, int nodes) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const MixtureComponent& c : spec.components) {
        for (const ScalarDistribution* d : {c.target.get(), c.proposal.get()}) {
            lo = std::min(lo, d->location() - 12.0 * d->scale());
            hi = std::max(hi, d->location() + 12.0 * d->scale());
        }
    }
    return UniformGrid{lo, hi, nodes};
}

}  // namespace

double mixture_expectation(const MixtureSpec& spec,
                           const std::function<double(double)>& f, int quad_nodes) {
    spec.validate();
    UniformGrid grid = quadrature_window(spec, quad_nodes);
    double acc = 0.0;
    for (std::size_t j = 0; j < spec.components.size(); ++j) {
        const MixtureComponent& c = spec.components[j];
        if (c.weight == 0.0) continue;
        // Normalize by the quadrature mass of mu_j so constants integrate to
        // themselves exactly.
        double integral = 0.0, mass = 0.0;
        for (int i = 0; i < grid.nodes; ++i) {
            double x = grid.point(i);
            double density = grid.weight(i) * std::exp(c.target->log_density(x));
            integral += density * f(x);
            mass += density;
        }
        acc += c.weight * integral / mass;
    }
    return acc;
}

std::vector<double> component_alpha(const MixtureSpec& spec,
                                    const std::function<double(double)>& f,
                                    int quad_nodes) {
    spec.validate();
    double pi_f = mixture_expectation(spec, f, quad_nodes);
    UniformGrid grid = quadrature_window(spec, quad_nodes);
    std::vector<double> alpha(spec.components.size(), 0.0);
    for (std::size_t j = 0; j < spec.components.size(); ++j) {
        const MixtureComponent& c = spec.components[j];
        double integral = 0.0;
        for (int i = 0; i < grid.nodes; ++i) {
            double x = grid.point(i);
            double centered = f(x) - pi_f;
            // Rounding leaves O(eps) residue when f is constant; treat values
            // far below the target scale as exact zeros.
            if (std::fabs(centered) <= 1e-12 * (std::fabs(f(x)) + std::fabs(pi_f))) {
                continue;
            }
            // (dmu/dnu)^2 dnu = exp(2 log mu - log nu)
            double log_term = 2.0 * c.target->log_density(x) - c.proposal->log_density(x);
            integral += grid.weight(i) * std::exp(log_term) * centered * centered;
        }
        alpha[j] = integral;
    }
    return alpha;
}

std::vector<double> optimal_allocation(const MixtureSpec& spec,
                                       const std::function<double(double)>& f,
                                       int quad_nodes) {
    std::vector<double> alpha = component_alpha(spec, f, quad_nodes);
    std::vector<double> tau(alpha.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        tau[i] = spec.components[i].weight * std::sqrt(alpha[i]);
        total += tau[i];
    }
    if (total <= 0.0) {
        throw DegenerateTarget("optimal_allocation: every alpha_i vanishes");
    }
    for (double& t : tau) t /= total;
    return tau;
}

double allocation_objective(const MixtureSpec& spec, const std::vector<double>& alpha,
                            const std::vector<double>& allocation) {
    if (alpha.size() != spec.components.size() || allocation.size() != alpha.size()) {
        throw std::invalid_argument("allocation_objective: size mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        double w = spec.components[i].weight;
        if (w == 0.0) continue;
        if (allocation[i] <= 0.0) return std::numeric_limits<double>::infinity();
        acc += w * w * alpha[i] / allocation[i];
    }
    return acc;
}

}  // namespace apf
