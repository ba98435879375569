#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "apf/proposal.hpp"

namespace apf {

/// Everything a first-stage weight function may consult at one filter step.
struct StepContext {
    const StateSpaceModel* model = nullptr;
    const ProposalKernel* proposal = nullptr;
    double y_next = 0.0;
    /// pi_{k+1|k+1} f, supplied by an oracle or a pilot run (optimal-* only).
    std::optional<double> target_mean;
    /// Target function f (optimal-* only).
    const std::function<double(double)>* target = nullptr;
    int quad_nodes = 64;
};

enum class FirstStageKind { Uniform, PsGeneric, FullyAdapted, OptimalExact, OptimalPilot };

const char* to_string(FirstStageKind kind);

/// First-stage (adjustment multiplier) weight function psi_k, evaluated on
/// the current state only. Values are returned on log scale and must be
/// finite or -inf; NaN or +inf raises NonpositiveFirstStageWeight.
class FirstStageStrategy {
public:
    virtual ~FirstStageStrategy() = default;
    virtual FirstStageKind kind() const = 0;
    virtual bool needs_target_mean() const { return false; }
    virtual double log_weight(const StepContext& ctx, double x) const = 0;
};

std::unique_ptr<FirstStageStrategy> make_strategy(FirstStageKind kind);

/// psi == 1: the bootstrap filter's first stage.
class UniformStrategy : public FirstStageStrategy {
public:
    FirstStageKind kind() const override { return FirstStageKind::Uniform; }
    double log_weight(const StepContext&, double) const override { return 0.0; }
};

/// Generic weights psi(x) = g(y_{k+1} | E[X_{k+1} | X_k = x]), defined for
/// the prior-proposal regime.
class PsGenericStrategy : public FirstStageStrategy {
public:
    FirstStageKind kind() const override { return FirstStageKind::PsGeneric; }
    double log_weight(const StepContext& ctx, double x) const override;
};

/// Weights that make the second-stage weights constant: the closed-form h_k
/// for additive Gaussian observations, or its Laplace analogue for SV.
class FullyAdaptedStrategy : public FirstStageStrategy {
public:
    FirstStageKind kind() const override { return FirstStageKind::FullyAdapted; }
    double log_weight(const StepContext& ctx, double x) const override;
};

/// Asymptotically optimal weights
///   tau*(x) = sqrt( int g^2(x') [dQ/dR]^2(x') (f(x') - m*)^2 R(x, dx') )
/// evaluated by Gauss-Hermite quadrature against the Gaussian proposal.
/// Values that vanish numerically are floored at 1e-300 so a single dead
/// region cannot zero out the selection weights.
class OptimalStrategy : public FirstStageStrategy {
public:
    explicit OptimalStrategy(FirstStageKind kind = FirstStageKind::OptimalExact);
    FirstStageKind kind() const override { return kind_; }
    bool needs_target_mean() const override { return true; }
    double log_weight(const StepContext& ctx, double x) const override;

private:
    FirstStageKind kind_;
};

/// Second-stage weight on log scale:
///   log Phi_{k+1} = log g(y_{k+1}|x_{k+1}) + log dQ/dR(x_{k+1}) - log psi_k(x_k).
double log_second_stage_weight(const FirstStageStrategy& strategy,
                               const StepContext& ctx, double x, double x_next);

/// Generic Pitt-Shephard weight on linear scale.
double ps_generic_weight(const StateSpaceModel& model, double x, double y_next);

/// log h_k(x) for additive Gaussian observation models:
///   h_k = (sigma_opt/sigma_w) exp( mu_opt^2/(2 sigma_opt^2) - m^2/(2 sigma_w^2) ).
double log_fully_adapted_weight(const AdditiveGaussianObservationModel& model,
                                double x, double y_next);

/// log of the SV near-full-adaptation weight
///   sigma_hat(x) g(y | m_hat(x)) q(x, m_hat(x)).
double log_fully_adapted_weight_sv(const SvLaplaceProposal& proposal, double x,
                                   double y_next);

/// Strict optimal weight (linear scale): throws DegenerateTarget when the
/// quadrature integrand vanishes at every node.
double optimal_first_stage_weight(const StepContext& ctx, double x);

/// Optimal weight evaluated at ctx.quad_nodes and twice that; throws
/// QuadratureNotConverged when the results differ by more than rel_tol.
double optimal_first_stage_weight_checked(const StepContext& ctx, double x,
                                          double rel_tol = 1e-8);

/// Closed form of the optimal weight under full adaptation (proposal = exact
/// optimal kernel, projection target):
///   tau*(x) = h_k(x) sqrt(sigma_opt^2 + mu_opt^2 - 2 mu_opt m* + m*^2).
double log_optimal_weight_fully_adapted(const AdditiveGaussianObservationModel& model,
                                        double x, double y_next, double target_mean);

/// SV analogue built from the Laplace approximation:
///   sigma_hat g(y|m_hat) q(x, m_hat) sqrt(sigma_hat^2 + m_hat^2 - 2 m_hat m* + m*^2).
double log_optimal_weight_sv(const SvLaplaceProposal& proposal, double x,
                             double y_next, double target_mean);

}  // namespace apf
