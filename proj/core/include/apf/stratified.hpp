#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "apf/rng.hpp"
#include "apf/weighted_sample.hpp"

namespace apf {

/// Scalar distribution usable both as a stratum target and a proposal.
class ScalarDistribution {
public:
    virtual ~ScalarDistribution() = default;
    virtual double sample(RngStream& rng) const = 0;
    virtual double log_density(double x) const = 0;
    /// Location/scale hints used to size quadrature windows.
    virtual double location() const = 0;
    virtual double scale() const = 0;
};

class GaussianDistribution : public ScalarDistribution {
public:
    GaussianDistribution(double mean, double stddev);
    double sample(RngStream& rng) const override;
    double log_density(double x) const override;
    double location() const override { return mean_; }
    double scale() const override { return stddev_; }
    double mean() const { return mean_; }
    double stddev() const { return stddev_; }

private:
    double mean_;
    double stddev_;
};

struct MixtureComponent {
    double weight = 0.0;  // w_i, mixture weight of the target stratum
    std::shared_ptr<const ScalarDistribution> target;    // mu_i
    std::shared_ptr<const ScalarDistribution> proposal;  // nu_i
};

/// Mixture target pi = sum_i w_i mu_i with per-stratum proposals nu_i and a
/// sampling allocation tau over strata.
struct MixtureSpec {
    std::vector<MixtureComponent> components;
    std::vector<double> allocation;  // tau_i, summing to one

    void validate() const;
};

/// Stratified importance sampling: draw J ~ tau, xi ~ nu_J, and weight
/// omega = (w_J / tau_J) dmu_J/dnu_J(xi). The self-normalized estimate is
/// consistent for pi f.
WeightedSample stratified_sample(const MixtureSpec& spec, int count, RngStream& rng);

/// pi f by quadrature over a window covering all components.
double mixture_expectation(const MixtureSpec& spec,
                           const std::function<double(double)>& f,
                           int quad_nodes = 8193);

/// alpha_i(f) = int (dmu_i/dnu_i)^2 (f - pi f)^2 dnu_i, by quadrature.
std::vector<double> component_alpha(const MixtureSpec& spec,
                                    const std::function<double(double)>& f,
                                    int quad_nodes = 8193);

/// Optimal allocation tau*_i proportional to w_i sqrt(alpha_i(f)); minimizes
/// sum_i w_i^2 alpha_i / tau_i over the simplex. Throws DegenerateTarget when
/// every alpha_i vanishes.
std::vector<double> optimal_allocation(const MixtureSpec& spec,
                                       const std::function<double(double)>& f,
                                       int quad_nodes = 8193);

/// Asymptotic variance objective sum_i w_i^2 alpha_i / tau_i.
double allocation_objective(const MixtureSpec& spec, const std::vector<double>& alpha,
                            const std::vector<double>& allocation);

}  // namespace apf
