#pragma once

#include <functional>
#include <vector>

namespace apf {

/// Weighted particle sample: scalar states with nonnegative weights.
///
/// Weights are stored unnormalized, either on linear or log scale;
/// normalization happens only at read time. On log scale all values must be
/// finite or -inf; on linear scale all values must be finite and >= 0.
class WeightedSample {
public:
    static WeightedSample from_linear(std::vector<double> states,
                                      std::vector<double> weights);
    static WeightedSample from_log(std::vector<double> states,
                                   std::vector<double> log_weights);
    /// All weights equal to one.
    static WeightedSample uniform(std::vector<double> states);

    std::size_t size() const { return states_.size(); }
    bool log_scale() const { return log_scale_; }
    const std::vector<double>& states() const { return states_; }
    /// Raw stored weights (log values when log_scale() is true).
    const std::vector<double>& raw_weights() const { return weights_; }

    /// Normalized weights (sum to one, order preserved).
    /// Throws AllWeightsZero when every weight is zero.
    std::vector<double> normalized_weights() const;

    /// Self-normalized estimate  sum_i wbar_i f(state_i).
    double estimate(const std::function<double(double)>& f) const;

    /// Filter-mean shortcut: estimate of the identity.
    double mean() const;

    /// Effective sample size (sum w)^2 / sum w^2, in [1, size()].
    double ess() const;

    /// New sample formed by indexing; resulting weights are all one.
    WeightedSample select(const std::vector<int>& indices) const;

private:
    WeightedSample(std::vector<double> states, std::vector<double> weights,
                   bool log_scale);

    std::vector<double> states_;
    std::vector<double> weights_;
    bool log_scale_ = false;
};

}  // namespace apf
