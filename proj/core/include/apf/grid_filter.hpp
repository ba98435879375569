#pragma once

#include <span>
#include <vector>

#include "apf/quadrature.hpp"
#include "apf/state_space.hpp"

namespace apf {

struct GridSpec {
    double lo = -1.0;
    double hi = 1.0;
    int nodes = 2048;
};

/// Deterministic reference filter: the Bayes recursion evaluated on a fixed
/// uniform grid with trapezoid quadrature. Densities are stored per step,
/// normalized so their trapezoid integral is one.
struct GridFilterResult {
    UniformGrid grid;
    std::vector<std::vector<double>> densities;
    std::vector<double> means;

    /// pi_{k|k} h for a grid-tabulated function h.
    double integrate(int k, const std::vector<double>& h) const;
    double variance(int k) const;
};

/// Bounds sized from the model scale (and the observation range for
/// additive-observation models): roughly +-8 marginal standard deviations.
GridSpec default_grid_spec(const StateSpaceModel& model,
                           std::span<const double> observations, int nodes);

/// Runs the recursion on the given grid. Throws GridTooNarrow when a filter
/// density has non-negligible boundary mass (skipped for models with hard
/// compact support).
GridFilterResult grid_filter(const StateSpaceModel& model,
                             std::span<const double> observations, GridSpec spec);

/// grid_filter with default bounds, widened x1.5 on GridTooNarrow (up to 3
/// retries).
GridFilterResult grid_filter_auto(const StateSpaceModel& model,
                                  std::span<const double> observations, int nodes);

}  // namespace apf
