#include "apf/filter.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "apf/errors.hpp"
#include "apf/quadrature.hpp"

namespace apf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> selection_log_weights(const WeightedSample& sample,
                                          const std::vector<double>& log_psi) {
    std::vector<double> out(sample.size());
    const std::vector<double>& raw = sample.raw_weights();
    for (std::size_t i = 0; i < out.size(); ++i) {
        double lw = sample.log_scale() ? raw[i] : (raw[i] > 0.0 ? std::log(raw[i]) : kNegInf);
        out[i] = lw + log_psi[i];
        if (std::isnan(out[i])) out[i] = kNegInf;  // 0 * inf combinations
    }
    return out;
}

struct Propagated {
    std::vector<double> states;
    std::vector<double> log_phi;
};

// Shared first stage of both algorithms: selection ~ omega*psi, mutation
// through the proposal, second-stage weights Phi.
Propagated propagate(const FilterState& state, const FirstStageStrategy& strategy,
                     const StepContext& ctx, ResamplingScheme scheme, int count,
                     RngStream& rng) {
    const std::vector<double>& xs = state.sample.states();
    std::vector<double> log_psi(xs.size());
    double max_log_psi = kNegInf;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        log_psi[i] = strategy.log_weight(ctx, xs[i]);
        max_log_psi = std::max(max_log_psi, log_psi[i]);
    }
    if (strategy.needs_target_mean() && max_log_psi <= -690.0) {
        // Every tau* hit the numeric floor: the target is constant under the
        // proposal mixture.
        throw DegenerateTarget("optimal weights vanished for every particle");
    }
    WeightedSample selector = WeightedSample::from_log(
        xs, selection_log_weights(state.sample, log_psi));
    std::vector<int> parents = resample(scheme, selector, count, rng);

    Propagated out;
    out.states.resize(static_cast<std::size_t>(count));
    out.log_phi.resize(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
        int parent = parents[static_cast<std::size_t>(j)];
        double x = xs[static_cast<std::size_t>(parent)];
        double x_next = ctx.proposal->sample(x, ctx.y_next, rng);
        out.states[static_cast<std::size_t>(j)] = x_next;
        out.log_phi[static_cast<std::size_t>(j)] =
            ctx.model->log_likelihood(ctx.y_next, x_next) +
            ctx.proposal->log_dq_dr(x, ctx.y_next, x_next) -
            log_psi[static_cast<std::size_t>(parent)];
    }
    return out;
}

}  // namespace

const char* to_string(FilterVariant variant) {
    switch (variant) {
        case FilterVariant::Bootstrap: return "bootstrap";
        case FilterVariant::Ssapf: return "ssapf";
        case FilterVariant::Tsspf: return "tsspf";
    }
    return "?";
}

const char* to_string(ProposalChoice choice) {
    switch (choice) {
        case ProposalChoice::Prior: return "prior";
        case ProposalChoice::OptimalGaussian: return "optimal-gaussian";
        case ProposalChoice::SvLaplace: return "sv-laplace";
    }
    return "?";
}

void FilterConfig::validate() const {
    if (particles < 2) throw ConfigError("filter: N must be >= 2");
    if (first_stage_count() < 2) throw ConfigError("filter: M_N must be >= 2");
    if (pilot_particles > 0 && pilot_particles > particles) {
        throw ConfigError("filter: pilot size R must not exceed N");
    }
    if (quad_nodes < 2) throw ConfigError("filter: quadrature nodes must be >= 2");
    if (variant == FilterVariant::Bootstrap &&
        (strategy != FirstStageKind::Uniform || proposal != ProposalChoice::Prior)) {
        throw ConfigError("bootstrap is SSAPF with uniform weights and prior proposal");
    }
}

std::unique_ptr<ProposalKernel> make_proposal(ProposalChoice choice,
                                              const StateSpaceModel& model) {
    switch (choice) {
        case ProposalChoice::Prior:
            return std::make_unique<PriorProposal>(model);
        case ProposalChoice::OptimalGaussian: {
            auto* additive = dynamic_cast<const AdditiveGaussianObservationModel*>(&model);
            if (!additive) {
                throw ConfigError("optimal-gaussian proposal needs additive Gaussian observations");
            }
            return std::make_unique<OptimalGaussianProposal>(*additive);
        }
        case ProposalChoice::SvLaplace: {
            auto* sv = dynamic_cast<const StochasticVolatility*>(&model);
            if (!sv) throw ConfigError("sv-laplace proposal is defined for the SV model");
            return std::make_unique<SvLaplaceProposal>(*sv);
        }
    }
    throw std::logic_error("unknown proposal choice");
}

FilterState init_filter(const StateSpaceModel& model, double y0, int count,
                        RngStream& rng) {
    std::vector<double> states(static_cast<std::size_t>(count));
    std::vector<double> log_w(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        double x = model.sample_initial(rng);
        states[static_cast<std::size_t>(i)] = x;
        log_w[static_cast<std::size_t>(i)] = model.log_likelihood(y0, x);
    }
    return {0, WeightedSample::from_log(std::move(states), std::move(log_w))};
}

FilterState ssapf_step(const FilterState& state, const FirstStageStrategy& strategy,
                       const StepContext& ctx, ResamplingScheme scheme, int count,
                       RngStream& rng) {
    Propagated p = propagate(state, strategy, ctx, scheme, count, rng);
    return {state.step + 1,
            WeightedSample::from_log(std::move(p.states), std::move(p.log_phi))};
}

FilterState tsspf_step(const FilterState& state, const FirstStageStrategy& strategy,
                       const StepContext& ctx, ResamplingScheme scheme,
                       int first_stage_count, int count, RngStream& rng) {
    Propagated p = propagate(state, strategy, ctx, scheme, first_stage_count, rng);
    WeightedSample stage =
        WeightedSample::from_log(std::move(p.states), std::move(p.log_phi));
    std::vector<int> survivors = resample(scheme, stage, count, rng);
    return {state.step + 1, stage.select(survivors)};
}

namespace {

struct RunMachinery {
    std::unique_ptr<ProposalKernel> proposal;
    std::unique_ptr<FirstStageStrategy> strategy;
};

RunMachinery build_machinery(const FilterConfig& config, const StateSpaceModel& model) {
    RunMachinery m;
    if (config.variant == FilterVariant::Bootstrap) {
        m.proposal = make_proposal(ProposalChoice::Prior, model);
        m.strategy = make_strategy(FirstStageKind::Uniform);
    } else {
        m.proposal = make_proposal(config.proposal, model);
        m.strategy = make_strategy(config.strategy);
    }
    return m;
}

void record_step(FilterResult& result, const FilterConfig& config,
                 const FilterState& state, const std::function<double(double)>& f) {
    result.estimates.push_back(state.sample.estimate(f));
    result.ess.push_back(state.sample.ess());
    const std::vector<double>& raw = state.sample.raw_weights();
    double log_norm;
    if (state.sample.log_scale()) {
        log_norm = log_sum_exp(raw) - std::log(static_cast<double>(raw.size()));
    } else {
        double total = 0.0;
        for (double w : raw) total += w;
        log_norm = std::log(total / static_cast<double>(raw.size()));
    }
    result.log_normalizers.push_back(log_norm);
    if (config.keep_history) result.history.push_back(state.sample);
}

}  // namespace

FilterResult run_filter(const FilterConfig& config, const StateSpaceModel& model,
                        std::span<const double> observations,
                        const std::function<double(double)>& f, RngStream& rng,
                        const std::vector<double>* oracle_means) {
    config.validate();
    if (observations.empty()) throw ConfigError("run_filter: empty observation record");
    if (config.strategy == FirstStageKind::OptimalPilot) {
        throw ConfigError("optimal-pilot strategy requires run_with_pilot");
    }
    if (config.strategy == FirstStageKind::OptimalExact &&
        config.variant != FilterVariant::Bootstrap) {
        if (!oracle_means || oracle_means->size() != observations.size()) {
            throw ConfigError("optimal-exact strategy needs oracle means for every step");
        }
    }
    RunMachinery m = build_machinery(config, model);
    const int n = static_cast<int>(observations.size()) - 1;

    FilterResult result;
    FilterState state = init_filter(model, observations[0], config.particles, rng);
    try {
        record_step(result, config, state, f);
        for (int k = 0; k < n; ++k) {
            StepContext ctx;
            ctx.model = &model;
            ctx.proposal = m.proposal.get();
            ctx.y_next = observations[static_cast<std::size_t>(k + 1)];
            ctx.target = &f;
            ctx.quad_nodes = config.quad_nodes;
            if (config.strategy == FirstStageKind::OptimalExact && oracle_means) {
                ctx.target_mean = (*oracle_means)[static_cast<std::size_t>(k + 1)];
            }
            if (config.variant == FilterVariant::Tsspf) {
                state = tsspf_step(state, *m.strategy, ctx, config.resampling,
                                   config.first_stage_count(), config.particles, rng);
            } else {
                state = ssapf_step(state, *m.strategy, ctx, config.resampling,
                                   config.particles, rng);
            }
            record_step(result, config, state, f);
        }
    } catch (const AllWeightsZero&) {
        throw ReplicationDegenerate(state.step);
    }
    return result;
}

FilterResult run_with_pilot(const FilterConfig& config, const StateSpaceModel& model,
                            std::span<const double> observations,
                            const std::function<double(double)>& f,
                            RngStream& main_rng, RngStream& pilot_rng) {
    config.validate();
    if (observations.empty()) throw ConfigError("run_with_pilot: empty observation record");
    if (config.strategy != FirstStageKind::OptimalPilot) {
        throw ConfigError("run_with_pilot requires the optimal-pilot strategy");
    }
    if (config.pilot_particles < 50) {
        throw ConfigError("run_with_pilot: pilot size R must be >= 50");
    }
    RunMachinery m = build_machinery(config, model);
    auto pilot_proposal = make_proposal(ProposalChoice::Prior, model);
    UniformStrategy pilot_strategy;
    PsGenericStrategy fallback_strategy;
    const int n = static_cast<int>(observations.size()) - 1;

    FilterResult result;
    FilterState state = init_filter(model, observations[0], config.particles, main_rng);

    bool pilot_alive = true;
    FilterState pilot = init_filter(model, observations[0], config.pilot_particles,
                                    pilot_rng);
    try {
        record_step(result, config, state, f);
        for (int k = 0; k < n; ++k) {
            double y_next = observations[static_cast<std::size_t>(k + 1)];
            // Zero-stage pass: advance the pilot to k+1 and read off its
            // estimate of pi_{k+1|k+1} f.
            std::optional<double> pilot_mean;
            if (pilot_alive) {
                StepContext pilot_ctx;
                pilot_ctx.model = &model;
                pilot_ctx.proposal = pilot_proposal.get();
                pilot_ctx.y_next = y_next;
                try {
                    pilot = ssapf_step(pilot, pilot_strategy, pilot_ctx,
                                       ResamplingScheme::Multinomial,
                                       config.pilot_particles, pilot_rng);
                    pilot_mean = pilot.sample.estimate(f);
                } catch (const AllWeightsZero&) {
                    pilot_alive = false;
                }
            }

            StepContext ctx;
            ctx.model = &model;
            ctx.proposal = m.proposal.get();
            ctx.y_next = y_next;
            ctx.target = &f;
            ctx.quad_nodes = config.quad_nodes;
            const FirstStageStrategy* strategy = m.strategy.get();
            if (pilot_mean) {
                ctx.target_mean = *pilot_mean;
            } else {
                strategy = &fallback_strategy;
                result.pilot_fallback_steps.push_back(k + 1);
            }
            if (config.variant == FilterVariant::Tsspf) {
                state = tsspf_step(state, *strategy, ctx, config.resampling,
                                   config.first_stage_count(), config.particles,
                                   main_rng);
            } else {
                state = ssapf_step(state, *strategy, ctx, config.resampling,
                                   config.particles, main_rng);
            }
            record_step(result, config, state, f);
        }
    } catch (const AllWeightsZero&) {
        throw ReplicationDegenerate(state.step);
    }
    return result;
}

}  // namespace apf
