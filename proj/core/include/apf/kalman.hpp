#pragma once

#include <span>
#include <vector>

#include "apf/models.hpp"

namespace apf {

struct KalmanMoment {
    double mean = 0.0;
    double variance = 0.0;
};

/// Exact filtering moments E[X_k | y_{0:k}], Var[X_k | y_{0:k}] for the
/// linear Gaussian AR(1) model.
std::vector<KalmanMoment> kalman_filter(const LinearGaussianAR1& model,
                                        std::span<const double> observations);

}  // namespace apf
