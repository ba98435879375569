#include "apf/weighted_sample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "apf/errors.hpp"

namespace apf {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

WeightedSample::WeightedSample(std::vector<double> states,
                               std::vector<double> weights, bool log_scale)
    : states_(std::move(states)), weights_(std::move(weights)), log_scale_(log_scale) {
    if (states_.empty() || states_.size() != weights_.size()) {
        throw std::invalid_argument("WeightedSample: states/weights size mismatch");
    }
    for (double w : weights_) {
        if (std::isnan(w)) throw std::invalid_argument("WeightedSample: NaN weight");
        if (log_scale_) {
            if (w == std::numeric_limits<double>::infinity()) {
                throw std::invalid_argument("WeightedSample: +inf log-weight");
            }
        } else if (!std::isfinite(w) || w < 0.0) {
            throw std::invalid_argument("WeightedSample: weights must be finite and >= 0");
        }
    }
}

WeightedSample WeightedSample::from_linear(std::vector<double> states,
                                           std::vector<double> weights) {
    return WeightedSample(std::move(states), std::move(weights), false);
}

WeightedSample WeightedSample::from_log(std::vector<double> states,
                                        std::vector<double> log_weights) {
    return WeightedSample(std::move(states), std::move(log_weights), true);
}

WeightedSample WeightedSample::uniform(std::vector<double> states) {
    std::vector<double> ones(states.size(), 1.0);
    return WeightedSample(std::move(states), std::move(ones), false);
}

std::vector<double> WeightedSample::normalized_weights() const {
    std::vector<double> out(weights_.size());
    if (log_scale_) {
        // Subtract the max log-weight before exponentiating; the SV
        // likelihood underflows in linear scale.
        double m = *std::max_element(weights_.begin(), weights_.end());
        if (m == kNegInf) throw AllWeightsZero();
        for (std::size_t i = 0; i < weights_.size(); ++i) {
            out[i] = std::exp(weights_[i] - m);
        }
    } else {
        out = weights_;
    }
    double total = 0.0;
    for (double w : out) total += w;
    if (total <= 0.0) throw AllWeightsZero();
    for (double& w : out) w /= total;
    return out;
}

double WeightedSample::estimate(const std::function<double(double)>& f) const {
    std::vector<double> w = normalized_weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < states_.size(); ++i) acc += w[i] * f(states_[i]);
    return acc;
}

double WeightedSample::mean() const {
    std::vector<double> w = normalized_weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < states_.size(); ++i) acc += w[i] * states_[i];
    return acc;
}

double WeightedSample::ess() const {
    std::vector<double> w = normalized_weights();
    double sumsq = 0.0;
    for (double v : w) sumsq += v * v;
    return 1.0 / sumsq;
}

WeightedSample WeightedSample::select(const std::vector<int>& indices) const {
    std::vector<double> states(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        states[i] = states_[static_cast<std::size_t>(indices[i])];
    }
    return uniform(std::move(states));
}

}  // namespace apf
