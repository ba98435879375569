#include "apf/first_stage.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "apf/errors.hpp"
#include "apf/quadrature.hpp"
#include "apf/stats.hpp"

namespace apf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogFloor = -690.77552789821368;  // log(1e-300)
constexpr double kSqrt2 = 1.4142135623730950488016887242097;
constexpr double kLogSqrtPi = 0.57236494292470008707171367567653;

void require_valid_log_weight(double lw) {
    if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity()) {
        throw NonpositiveFirstStageWeight("first-stage weight is NaN or +inf");
    }
}

// log tau*^2 via Gauss-Hermite against the Gaussian proposal law.
double log_optimal_weight_sq(const StepContext& ctx, double x, int nodes) {
    if (!ctx.model || !ctx.proposal) throw ConfigError("optimal weight: missing model/proposal");
    if (!ctx.target_mean) throw ConfigError("optimal weight: target mean not supplied");
    if (!ctx.target) throw ConfigError("optimal weight: target function not supplied");
    const GaussHermiteRule& rule = gauss_hermite(nodes);
    GaussianLaw law = ctx.proposal->law(x, ctx.y_next);
    double m_star = *ctx.target_mean;
    double lse_max = kNegInf;
    double lse_acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double x_next = law.mean + kSqrt2 * law.stddev * rule.nodes[i];
        double centered = (*ctx.target)(x_next) - m_star;
        if (centered == 0.0) continue;
        double log_term = rule.log_weights[i] +
                          2.0 * ctx.model->log_likelihood(ctx.y_next, x_next) +
                          2.0 * ctx.proposal->log_dq_dr(x, ctx.y_next, x_next) +
                          2.0 * std::log(std::fabs(centered));
        if (log_term == kNegInf) continue;
        // streaming log-sum-exp
        if (log_term > lse_max) {
            lse_acc = lse_acc * std::exp(lse_max - log_term) + 1.0;
            lse_max = log_term;
        } else {
            lse_acc += std::exp(log_term - lse_max);
        }
    }
    if (lse_max == kNegInf) return kNegInf;
    return lse_max + std::log(lse_acc) - kLogSqrtPi;
}

}  // namespace

const char* to_string(FirstStageKind kind) {
    switch (kind) {
        case FirstStageKind::Uniform: return "uniform";
        case FirstStageKind::PsGeneric: return "ps-generic";
        case FirstStageKind::FullyAdapted: return "fully-adapted";
        case FirstStageKind::OptimalExact: return "optimal-exact";
        case FirstStageKind::OptimalPilot: return "optimal-pilot";
    }
    return "?";
}

std::unique_ptr<FirstStageStrategy> make_strategy(FirstStageKind kind) {
    switch (kind) {
        case FirstStageKind::Uniform: return std::make_unique<UniformStrategy>();
        case FirstStageKind::PsGeneric: return std::make_unique<PsGenericStrategy>();
        case FirstStageKind::FullyAdapted: return std::make_unique<FullyAdaptedStrategy>();
        case FirstStageKind::OptimalExact:
        case FirstStageKind::OptimalPilot: return std::make_unique<OptimalStrategy>(kind);
    }
    throw std::logic_error("unknown strategy kind");
}

double PsGenericStrategy::log_weight(const StepContext& ctx, double x) const {
    double lw = ctx.model->log_likelihood(ctx.y_next, ctx.model->transition_mean(x));
    require_valid_log_weight(lw);
    return lw;
}

double FullyAdaptedStrategy::log_weight(const StepContext& ctx, double x) const {
    if (auto* sv = dynamic_cast<const SvLaplaceProposal*>(ctx.proposal)) {
        double lw = log_fully_adapted_weight_sv(*sv, x, ctx.y_next);
        require_valid_log_weight(lw);
        return lw;
    }
    if (dynamic_cast<const OptimalGaussianProposal*>(ctx.proposal) == nullptr) {
        throw ConfigError("fully-adapted strategy requires the optimal (or Laplace) proposal");
    }
    auto* model = dynamic_cast<const AdditiveGaussianObservationModel*>(ctx.model);
    if (!model) throw ConfigError("fully-adapted strategy requires additive Gaussian observations");
    double lw = log_fully_adapted_weight(*model, x, ctx.y_next);
    require_valid_log_weight(lw);
    return lw;
}

OptimalStrategy::OptimalStrategy(FirstStageKind kind) : kind_(kind) {
    if (kind != FirstStageKind::OptimalExact && kind != FirstStageKind::OptimalPilot) {
        throw std::invalid_argument("OptimalStrategy: kind must be optimal-exact/pilot");
    }
}

double OptimalStrategy::log_weight(const StepContext& ctx, double x) const {
    if (!ctx.target_mean) throw ConfigError("optimal weight: target mean not supplied");
    double lw;
    if (auto* sv = dynamic_cast<const SvLaplaceProposal*>(ctx.proposal)) {
        // The SV integrand is handled through the Laplace relation; the raw
        // quadrature form can diverge in the right tail for informative
        // observations.
        lw = log_optimal_weight_sv(*sv, x, ctx.y_next, *ctx.target_mean);
    } else {
        lw = 0.5 * log_optimal_weight_sq(ctx, x, ctx.quad_nodes);
    }
    require_valid_log_weight(lw);
    return std::max(lw, kLogFloor);
}

double log_second_stage_weight(const FirstStageStrategy& strategy,
                               const StepContext& ctx, double x, double x_next) {
    double log_psi = strategy.log_weight(ctx, x);
    if (log_psi == kNegInf) {
        throw NonpositiveFirstStageWeight("second-stage weight: psi(x) == 0");
    }
    return ctx.model->log_likelihood(ctx.y_next, x_next) +
           ctx.proposal->log_dq_dr(x, ctx.y_next, x_next) - log_psi;
}

double ps_generic_weight(const StateSpaceModel& model, double x, double y_next) {
    return std::exp(model.log_likelihood(y_next, model.transition_mean(x)));
}

double log_fully_adapted_weight(const AdditiveGaussianObservationModel& model,
                                double x, double y_next) {
    double sv2 = model.observation_std() * model.observation_std();
    double m = model.transition_mean(x);
    double sw = model.transition_std(x);
    double sw2 = sw * sw;
    double var_opt = sv2 * sw2 / (sv2 + sw2);
    double mu_opt = (y_next / sv2 + m / sw2) * var_opt;
    return 0.5 * std::log(var_opt / sw2) + mu_opt * mu_opt / (2.0 * var_opt) -
           m * m / (2.0 * sw2);
}

double log_fully_adapted_weight_sv(const SvLaplaceProposal& proposal, double x,
                                   double y_next) {
    GaussianLaw law = proposal.law(x, y_next);
    const StochasticVolatility& sv = proposal.sv_model();
    return std::log(law.stddev) + sv.log_likelihood(y_next, law.mean) +
           sv.log_transition_density(x, law.mean);
}

double optimal_first_stage_weight(const StepContext& ctx, double x) {
    double log_sq = log_optimal_weight_sq(ctx, x, ctx.quad_nodes);
    if (log_sq == kNegInf) {
        throw DegenerateTarget("optimal weight: integrand vanishes (constant target?)");
    }
    return std::exp(0.5 * log_sq);
}

double optimal_first_stage_weight_checked(const StepContext& ctx, double x,
                                          double rel_tol) {
    double coarse = optimal_first_stage_weight(ctx, x);
    StepContext fine = ctx;
    fine.quad_nodes = 2 * ctx.quad_nodes;
    double refined = optimal_first_stage_weight(fine, x);
    if (std::fabs(refined - coarse) > rel_tol * std::max(1.0, std::fabs(refined))) {
        throw QuadratureNotConverged("optimal weight: node doubling moved the result");
    }
    return refined;
}

double log_optimal_weight_fully_adapted(const AdditiveGaussianObservationModel& model,
                                        double x, double y_next, double target_mean) {
    double sv2 = model.observation_std() * model.observation_std();
    double m = model.transition_mean(x);
    double sw = model.transition_std(x);
    double sw2 = sw * sw;
    double var_opt = sv2 * sw2 / (sv2 + sw2);
    double mu_opt = (y_next / sv2 + m / sw2) * var_opt;
    double second_moment = var_opt + mu_opt * mu_opt - 2.0 * mu_opt * target_mean +
                           target_mean * target_mean;
    return log_fully_adapted_weight(model, x, y_next) + 0.5 * std::log(second_moment);
}

double log_optimal_weight_sv(const SvLaplaceProposal& proposal, double x,
                             double y_next, double target_mean) {
    GaussianLaw law = proposal.law(x, y_next);
    double second_moment = law.stddev * law.stddev + law.mean * law.mean -
                           2.0 * law.mean * target_mean + target_mean * target_mean;
    return log_fully_adapted_weight_sv(proposal, x, y_next) +
           0.5 * std::log(second_moment);
}

}  // namespace apf
