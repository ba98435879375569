#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "apf/first_stage.hpp"
#include "apf/proposal.hpp"
#include "apf/resampling.hpp"
#include "apf/weighted_sample.hpp"

namespace apf {

enum class FilterVariant { Bootstrap, Ssapf, Tsspf };

enum class ProposalChoice { Prior, OptimalGaussian, SvLaplace };

const char* to_string(FilterVariant variant);
const char* to_string(ProposalChoice choice);

struct FilterConfig {
    FilterVariant variant = FilterVariant::Ssapf;
    int particles = 4000;            // N: second-stage (output) sample size
    int first_stage_particles = 0;   // M_N (TSSPF only); 0 means M_N = N
    ResamplingScheme resampling = ResamplingScheme::Multinomial;
    ProposalChoice proposal = ProposalChoice::Prior;
    FirstStageKind strategy = FirstStageKind::Uniform;
    int pilot_particles = 0;         // R; 0 disables the pilot pass
    int quad_nodes = 64;
    bool keep_history = false;

    int first_stage_count() const {
        return first_stage_particles > 0 ? first_stage_particles : particles;
    }
    void validate() const;
};

struct FilterState {
    int step = 0;
    WeightedSample sample;
};

struct FilterResult {
    std::vector<double> estimates;       // pi_{k|k} f for k = 0..n
    std::vector<double> ess;             // effective sample size per step
    std::vector<double> log_normalizers; // log mean unnormalized weight per step
    std::vector<int> pilot_fallback_steps;
    std::vector<WeightedSample> history; // filled when keep_history is set
};

std::unique_ptr<ProposalKernel> make_proposal(ProposalChoice choice,
                                              const StateSpaceModel& model);

/// Initial sample: N draws from nu with log-weights log g(y_0 | x).
FilterState init_filter(const StateSpaceModel& model, double y0, int count,
                        RngStream& rng);

/// One SSAPF step: select N parents proportional to omega * psi, propagate
/// through the proposal, keep the second-stage weights Phi.
FilterState ssapf_step(const FilterState& state, const FirstStageStrategy& strategy,
                       const StepContext& ctx, ResamplingScheme scheme, int count,
                       RngStream& rng);

/// One TSSPF step: as SSAPF with M_N first-stage draws, then a concluding
/// resampling pass of N particles proportional to Phi; weights reset to one.
FilterState tsspf_step(const FilterState& state, const FirstStageStrategy& strategy,
                       const StepContext& ctx, ResamplingScheme scheme,
                       int first_stage_count, int count, RngStream& rng);

/// Full filter run; estimates are deterministic given the stream. If the
/// strategy is optimal-exact, `oracle_means` must hold pi_{k|k} f for
/// k = 0..n. Throws ReplicationDegenerate when every weight vanishes.
FilterResult run_filter(const FilterConfig& config, const StateSpaceModel& model,
                        std::span<const double> observations,
                        const std::function<double(double)>& f, RngStream& rng,
                        const std::vector<double>* oracle_means = nullptr);

/// Optimal-pilot run: a bootstrap pilot with R particles advances one step
/// ahead of the main filter and supplies the target mean estimate. The two
/// filters consume independent streams. When the pilot degenerates the main
/// filter falls back to ps-generic weights for the remaining steps; every
/// fallback step is logged in the result.
FilterResult run_with_pilot(const FilterConfig& config, const StateSpaceModel& model,
                            std::span<const double> observations,
                            const std::function<double(double)>& f,
                            RngStream& main_rng, RngStream& pilot_rng);

}  // namespace apf
