#include "apf/grid_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "apf/errors.hpp"
#include "apf/models.hpp"

namespace apf {

namespace {

constexpr double kBoundaryTolerance = 1e-10;

// Normalize in place so the trapezoid integral is one; returns the max value.
double normalize_density(std::vector<double>& p, double step) {
    double total = trapezoid(p, step);
    if (!(total > 0.0)) throw AllWeightsZero();
    double max_val = 0.0;
    for (double& v : p) {
        v /= total;
        max_val = std::max(max_val, v);
    }
    return max_val;
}

void check_boundaries(const std::vector<double>& p, double max_val, int step_index) {
    if (p.front() > kBoundaryTolerance * max_val || p.back() > kBoundaryTolerance * max_val) {
        throw GridTooNarrow("grid_filter: boundary density not negligible at step " +
                            std::to_string(step_index));
    }
}

}  // namespace

double GridFilterResult::integrate(int k, const std::vector<double>& h) const {
    const std::vector<double>& p = densities[static_cast<std::size_t>(k)];
    double acc = 0.0;
    for (int i = 0; i < grid.nodes; ++i) {
        acc += grid.weight(i) * p[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i)];
    }
    return acc;
}

double GridFilterResult::variance(int k) const {
    const std::vector<double>& p = densities[static_cast<std::size_t>(k)];
    double m = means[static_cast<std::size_t>(k)];
    double acc = 0.0;
    for (int i = 0; i < grid.nodes; ++i) {
        double d = grid.point(i) - m;
        acc += grid.weight(i) * p[static_cast<std::size_t>(i)] * d * d;
    }
    return acc;
}

GridSpec default_grid_spec(const StateSpaceModel& model,
                           std::span<const double> observations, int nodes) {
    GridSpec spec;
    spec.nodes = nodes;
    if (auto sup = model.support()) {
        spec.lo = sup->lo;
        spec.hi = sup->hi;
        return spec;
    }
    double scale = std::max(model.reference_std(), 1e-6);
    spec.lo = model.initial_mean() - 8.0 * scale;
    spec.hi = model.initial_mean() + 8.0 * scale;
    // Additive observations pin the filter support near the record values.
    if (auto* additive = dynamic_cast<const AdditiveGaussianObservationModel*>(&model)) {
        double pad = 8.0 * additive->observation_std();
        for (double y : observations) {
            spec.lo = std::min(spec.lo, y - pad);
            spec.hi = std::max(spec.hi, y + pad);
        }
    }
    return spec;
}

GridFilterResult grid_filter(const StateSpaceModel& model,
                             std::span<const double> observations, GridSpec spec) {
    if (observations.empty()) throw std::invalid_argument("grid_filter: empty record");
    if (spec.nodes < 16) throw std::invalid_argument("grid_filter: too few nodes");
    if (!(spec.hi > spec.lo)) throw std::invalid_argument("grid_filter: bad bounds");

    const bool bounded_support = model.support().has_value();
    GridFilterResult result;
    result.grid = UniformGrid{spec.lo, spec.hi, spec.nodes};
    const int n = spec.nodes;
    const double h = result.grid.step();
    std::vector<double> xs = result.grid.points();

    // pi_{0|0} proportional to g(y_0 | x) nu(x).
    std::vector<double> log_post(static_cast<std::size_t>(n));
    double log_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        double lp = model.log_initial_density(xs[static_cast<std::size_t>(i)]) +
                    model.log_likelihood(observations[0], xs[static_cast<std::size_t>(i)]);
        log_post[static_cast<std::size_t>(i)] = lp;
        log_max = std::max(log_max, lp);
    }
    std::vector<double> post(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        post[static_cast<std::size_t>(i)] =
            std::exp(log_post[static_cast<std::size_t>(i)] - log_max);
    }
    double max_val = normalize_density(post, h);
    if (!bounded_support) check_boundaries(post, max_val, 0);
    result.densities.push_back(post);

    std::vector<double> pred(static_cast<std::size_t>(n));
    for (std::size_t k = 1; k < observations.size(); ++k) {
        std::fill(pred.begin(), pred.end(), 0.0);
        // Predictive density: integrate the transition kernel against the
        // current filter density, source-major with a 12-sigma cutoff.
        for (int i = 0; i < n; ++i) {
            double pi = post[static_cast<std::size_t>(i)];
            if (pi <= 0.0) continue;
            double contribution = result.grid.weight(i) * pi;
            double m = model.transition_mean(xs[static_cast<std::size_t>(i)]);
            double s = model.transition_std(xs[static_cast<std::size_t>(i)]);
            int jlo = 0, jhi = n - 1;
            if (!bounded_support) {
                jlo = std::max(0, static_cast<int>(std::ceil((m - 12.0 * s - spec.lo) / h)));
                jhi = std::min(n - 1, static_cast<int>(std::floor((m + 12.0 * s - spec.lo) / h)));
            }
            for (int j = jlo; j <= jhi; ++j) {
                pred[static_cast<std::size_t>(j)] +=
                    contribution *
                    std::exp(model.log_transition_density(xs[static_cast<std::size_t>(i)],
                                                          xs[static_cast<std::size_t>(j)]));
            }
        }
        log_max = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            log_max = std::max(log_max, model.log_likelihood(observations[k],
                                                             xs[static_cast<std::size_t>(i)]));
        }
        for (int i = 0; i < n; ++i) {
            post[static_cast<std::size_t>(i)] =
                pred[static_cast<std::size_t>(i)] *
                std::exp(model.log_likelihood(observations[k], xs[static_cast<std::size_t>(i)]) -
                         log_max);
        }
        max_val = normalize_density(post, h);
        if (!bounded_support) check_boundaries(post, max_val, static_cast<int>(k));
        result.densities.push_back(post);
    }

    result.means.reserve(result.densities.size());
    std::vector<double> weighted(static_cast<std::size_t>(n));
    for (const std::vector<double>& p : result.densities) {
        for (int i = 0; i < n; ++i) {
            weighted[static_cast<std::size_t>(i)] =
                xs[static_cast<std::size_t>(i)] * p[static_cast<std::size_t>(i)];
        }
        result.means.push_back(trapezoid(weighted, h));
    }
    return result;
}

GridFilterResult grid_filter_auto(const StateSpaceModel& model,
                                  std::span<const double> observations, int nodes) {
    GridSpec spec = default_grid_spec(model, observations, nodes);
    for (int attempt = 0;; ++attempt) {
        try {
            return grid_filter(model, observations, spec);
        } catch (const GridTooNarrow&) {
            if (attempt >= 3) throw;
            double center = 0.5 * (spec.lo + spec.hi);
            double half = 0.75 * (spec.hi - spec.lo);  // x1.5 widening
            spec.lo = center - half;
            spec.hi = center + half;
        }
    }
}

}  // namespace apf
