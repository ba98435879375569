#pragma once

#include <vector>

#include "apf/rng.hpp"
#include "apf/weighted_sample.hpp"

namespace apf {

enum class ResamplingScheme { Multinomial, Systematic, Residual };

/// `count` indices drawn i.i.d. from the normalized weights.
std::vector<int> resample_multinomial(const WeightedSample& sample, int count,
                                      RngStream& rng);

/// Systematic (stratified with a single shared offset) resampling.
std::vector<int> resample_systematic(const WeightedSample& sample, int count,
                                     RngStream& rng);

/// Residual resampling: floor(count * wbar_i) deterministic copies plus a
/// multinomial pass over the remainders.
std::vector<int> resample_residual(const WeightedSample& sample, int count,
                                   RngStream& rng);

std::vector<int> resample(ResamplingScheme scheme, const WeightedSample& sample,
                          int count, RngStream& rng);

const char* to_string(ResamplingScheme scheme);

}  // namespace apf
