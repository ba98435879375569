#pragma once

#include <span>
#include <string>
#include <vector>

#include "apf/filter.hpp"
#include "apf/grid_filter.hpp"

namespace apf {

/// Per-step asymptotic variances of the self-normalized filter-mean
/// estimate, for the projection target f_k(x_{0:k}) = x_k.
///
/// sigma2_ssapf follows the SSAPF variance recursion
///   sigma~^2_{k+1}(f) = { sigma~^2_k[U_k(., Lam f)]
///                        + pi_k[psi_k R_k(., Phi^2 Lam^2 f)] pi_k psi_k }
///                       / (pi_k U_k(1))^2
/// evaluated by tensor-grid quadrature, with the transported functions
/// U_k(., Lam f) tabulated on the same grid (scalar state, projection
/// target). sigma2_tsspf is the two-stage display evaluated on the same
/// history: posterior variance of f plus the braced term with the beta
/// factor, so at beta = 1 the gap sigma2_tsspf - sigma2_ssapf equals
/// Var_{pi_k}(f) identically. sigma2_tsspf_chained instead feeds the
/// two-stage functional through its own recursion (every past resampling
/// pass contributes), which upper-bounds the display value.
struct VarianceTable {
    std::vector<double> sigma2_ssapf;
    std::vector<double> sigma2_tsspf;
    std::vector<double> sigma2_tsspf_chained;
    std::vector<double> posterior_variance;
};

class VarianceRecursionEvaluator {
public:
    struct Options {
        int grid_nodes = 1024;
        double beta = 1.0;      // lim N / M_N
        int quad_nodes = 64;    // Gauss-Hermite order for optimal weights
        /// Relative tolerance for the optional refinement check.
        double refine_tol = 1e-5;
    };

    VarianceRecursionEvaluator(const StateSpaceModel& model,
                               std::span<const double> observations);
    VarianceRecursionEvaluator(const StateSpaceModel& model,
                               std::span<const double> observations, Options options);

    VarianceTable evaluate(ProposalChoice proposal, FirstStageKind strategy) const;

    /// evaluate() at grid_nodes and at 2x grid_nodes; throws
    /// QuadratureNotConverged when any sigma2_ssapf entry moves by more than
    /// options.refine_tol relatively.
    VarianceTable evaluate_checked(ProposalChoice proposal,
                                   FirstStageKind strategy) const;

    const GridFilterResult& filter() const { return filter_; }
    const Options& options() const { return options_; }

    /// pi_k[psi] * pi_k[psi^{-1} tau*^2] for a grid-tabulated psi: the
    /// psi-dependent part of the one-step variance increase (Theorem-4
    /// functional). psi and tau_star are tabulated on the filter grid.
    double one_step_variance_functional(int step, const std::vector<double>& psi,
                                        const std::vector<double>& tau_star) const;

    /// tau*_k tabulated on the filter grid for the given proposal.
    std::vector<double> tau_star_on_grid(int step, const ProposalKernel& proposal) const;

private:
    const StateSpaceModel& model_;
    std::vector<double> observations_;
    Options options_;
    GridFilterResult filter_;
};

struct StrategyArm {
    std::string label;
    ProposalChoice proposal = ProposalChoice::Prior;
    FirstStageKind strategy = FirstStageKind::Uniform;
};

struct StrategyComparison {
    std::vector<StrategyArm> arms;
    std::vector<VarianceTable> tables;
};

StrategyComparison compare_strategies(const StateSpaceModel& model,
                                      std::span<const double> observations,
                                      const std::vector<StrategyArm>& arms,
                                      VarianceRecursionEvaluator::Options options);
StrategyComparison compare_strategies(const StateSpaceModel& model,
                                      std::span<const double> observations,
                                      const std::vector<StrategyArm>& arms);

/// CSV with header `k,strategy,sigma2_ssapf,sigma2_tsspf` (%.12g, LF).
void write_variance_csv(const StrategyComparison& comparison, const std::string& path);

}  // namespace apf
