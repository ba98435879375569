#include "apf/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "apf/errors.hpp"

namespace apf {

namespace {

std::vector<double> cumulative(const std::vector<double>& probs) {
    std::vector<double> cum(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cum[i] = acc;
    }
    cum.back() = 1.0;  // guard against rounding in the last bin
    return cum;
}

int locate(const std::vector<double>& cum, double u) {
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    if (it == cum.end()) --it;
    return static_cast<int>(it - cum.begin());
}

}  // namespace

std::vector<int> resample_multinomial(const WeightedSample& sample, int count,
                                      RngStream& rng) {
    if (count < 1) throw std::invalid_argument("resample: count must be >= 1");
    std::vector<double> cum = cumulative(sample.normalized_weights());
    std::vector<int> idx(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = locate(cum, rng.uniform());
    return idx;
}

std::vector<int> resample_systematic(const WeightedSample& sample, int count,
                                     RngStream& rng) {
    if (count < 1) throw std::invalid_argument("resample: count must be >= 1");
    std::vector<double> probs = sample.normalized_weights();
    std::vector<int> idx;
    idx.reserve(static_cast<std::size_t>(count));
    double step = 1.0 / static_cast<double>(count);
    double u = rng.uniform() * step;
    double acc = probs[0];
    std::size_t j = 0;
    for (int i = 0; i < count; ++i) {
        double target = u + step * static_cast<double>(i);
        while (acc < target && j + 1 < probs.size()) {
            ++j;
            acc += probs[j];
        }
        idx.push_back(static_cast<int>(j));
    }
    return idx;
}

std::vector<int> resample_residual(const WeightedSample& sample, int count,
                                   RngStream& rng) {
    if (count < 1) throw std::invalid_argument("resample: count must be >= 1");
    std::vector<double> probs = sample.normalized_weights();
    std::vector<int> idx;
    idx.reserve(static_cast<std::size_t>(count));
    std::vector<double> residual(probs.size());
    double residual_total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        double expected = static_cast<double>(count) * probs[i];
        int copies = static_cast<int>(std::floor(expected));
        for (int c = 0; c < copies; ++c) idx.push_back(static_cast<int>(i));
        residual[i] = expected - static_cast<double>(copies);
        residual_total += residual[i];
    }
    int remaining = count - static_cast<int>(idx.size());
    if (remaining > 0) {
        if (residual_total <= 0.0) {
            // All mass was integral; fill from the normalized weights.
            residual = probs;
        }
        std::vector<double> dummy_states(residual.size(), 0.0);
        WeightedSample rest =
            WeightedSample::from_linear(std::move(dummy_states), std::move(residual));
        std::vector<int> extra = resample_multinomial(rest, remaining, rng);
        idx.insert(idx.end(), extra.begin(), extra.end());
    }
    return idx;
}

std::vector<int> resample(ResamplingScheme scheme, const WeightedSample& sample,
                          int count, RngStream& rng) {
    switch (scheme) {
        case ResamplingScheme::Multinomial: return resample_multinomial(sample, count, rng);
        case ResamplingScheme::Systematic: return resample_systematic(sample, count, rng);
        case ResamplingScheme::Residual: return resample_residual(sample, count, rng);
    }
    throw std::logic_error("unknown resampling scheme");
}

const char* to_string(ResamplingScheme scheme) {
    switch (scheme) {
        case ResamplingScheme::Multinomial: return "multinomial";
        case ResamplingScheme::Systematic: return "systematic";
        case ResamplingScheme::Residual: return "residual";
    }
    return "?";
}

}  // namespace apf
