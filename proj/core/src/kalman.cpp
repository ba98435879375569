#include "apf/kalman.hpp"

#include <stdexcept>

namespace apf {

std::vector<KalmanMoment> kalman_filter(const LinearGaussianAR1& model,
                                        std::span<const double> observations) {
    if (observations.empty()) throw std::invalid_argument("kalman_filter: empty record");
    std::vector<KalmanMoment> out;
    out.reserve(observations.size());
    double phi = model.phi();
    double q = model.sigma_w() * model.sigma_w();
    double r = model.sigma_v() * model.sigma_v();
    // Predictive moments of X_k given y_{0:k-1}; at k = 0 these are the prior.
    double pred_mean = model.initial_mean();
    double pred_var = model.initial_std() * model.initial_std();
    for (double y : observations) {
        double gain = pred_var / (pred_var + r);
        double mean = pred_mean + gain * (y - pred_mean);
        double var = (1.0 - gain) * pred_var;
        out.push_back({mean, var});
        pred_mean = phi * mean;
        pred_var = phi * phi * var + q;
    }
    return out;
}

}  // namespace apf
