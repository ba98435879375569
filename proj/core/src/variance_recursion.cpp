#include "apf/variance_recursion.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "apf/errors.hpp"
#include "apf/quadrature.hpp"

namespace apf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

// Streaming log-sum-exp accumulator.
struct LogSum {
    double max_term = kNegInf;
    double acc = 0.0;

    void add(double log_term) {
        if (log_term == kNegInf) return;
        if (log_term > max_term) {
            acc = acc * std::exp(max_term - log_term) + 1.0;
            max_term = log_term;
        } else {
            acc += std::exp(log_term - max_term);
        }
    }
    double value() const {
        return max_term == kNegInf ? kNegInf : max_term + std::log(acc);
    }
};

}  // namespace

VarianceRecursionEvaluator::VarianceRecursionEvaluator(
    const StateSpaceModel& model, std::span<const double> observations)
    : VarianceRecursionEvaluator(model, observations, Options()) {}

VarianceRecursionEvaluator::VarianceRecursionEvaluator(
    const StateSpaceModel& model, std::span<const double> observations,
    Options options)
    : model_(model),
      observations_(observations.begin(), observations.end()),
      options_(options),
      filter_(grid_filter_auto(model, observations, options.grid_nodes)) {
    if (observations_.size() < 1) {
        throw std::invalid_argument("variance evaluator: empty record");
    }
    if (!(options_.beta >= 0.0 && options_.beta <= 1.0)) {
        throw std::invalid_argument("variance evaluator: beta must lie in [0, 1]");
    }
}

namespace {

// Per-transition tabulation shared by the c / d / pushdown quadratures.
struct StepTable {
    std::vector<double> log_g;   // log g(y_{j+1} | x_l)
    std::vector<double> log_psi; // log psi_j(x_i)
    // Proposal law per source node, with log(stddev) hoisted out of the loop.
    std::vector<double> r_mean, r_std, r_log_std;
    // Transition law per source node.
    std::vector<double> q_mean, q_std, q_log_std;
};

}  // namespace

std::vector<double> VarianceRecursionEvaluator::tau_star_on_grid(
    int step, const ProposalKernel& proposal) const {
    const UniformGrid& grid = filter_.grid;
    static const std::function<double(double)> identity = [](double v) { return v; };
    OptimalStrategy strategy;
    StepContext ctx;
    ctx.model = &model_;
    ctx.proposal = &proposal;
    ctx.y_next = observations_[static_cast<std::size_t>(step) + 1];
    ctx.target_mean = filter_.means[static_cast<std::size_t>(step) + 1];
    ctx.target = &identity;
    ctx.quad_nodes = options_.quad_nodes;
    std::vector<double> log_tau(static_cast<std::size_t>(grid.nodes));
    for (int i = 0; i < grid.nodes; ++i) {
        log_tau[static_cast<std::size_t>(i)] = strategy.log_weight(ctx, grid.point(i));
    }
    return log_tau;
}

double VarianceRecursionEvaluator::one_step_variance_functional(
    int step, const std::vector<double>& log_psi,
    const std::vector<double>& log_tau_star) const {
    const UniformGrid& grid = filter_.grid;
    const std::vector<double>& density = filter_.densities[static_cast<std::size_t>(step)];
    LogSum psi_mean;       // log pi[psi]
    LogSum inverse_part;   // log pi[psi^{-1} tau*^2]
    for (int i = 0; i < grid.nodes; ++i) {
        std::size_t u = static_cast<std::size_t>(i);
        double log_base = safe_log(grid.weight(i)) + safe_log(density[u]);
        if (log_base == kNegInf) continue;
        psi_mean.add(log_base + log_psi[u]);
        inverse_part.add(log_base - log_psi[u] + 2.0 * log_tau_star[u]);
    }
    return std::exp(psi_mean.value() + inverse_part.value());
}

VarianceTable VarianceRecursionEvaluator::evaluate(ProposalChoice proposal_choice,
                                                   FirstStageKind strategy_kind) const {
    if (strategy_kind == FirstStageKind::OptimalPilot) {
        // The recursion is defined for deterministic weight functions; the
        // pilot weights are evaluated at their exact-target limit.
        strategy_kind = FirstStageKind::OptimalExact;
    }
    const int n = static_cast<int>(observations_.size()) - 1;
    const UniformGrid& grid = filter_.grid;
    const int nodes = grid.nodes;
    std::vector<double> xs = grid.points();

    std::unique_ptr<ProposalKernel> proposal = make_proposal(proposal_choice, model_);
    std::unique_ptr<FirstStageStrategy> strategy = make_strategy(strategy_kind);
    static const std::function<double(double)> identity = [](double v) { return v; };

    // Tabulate likelihood rows, first-stage weights and kernel laws per step.
    std::vector<StepTable> tables(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        StepTable& t = tables[static_cast<std::size_t>(j)];
        double y_next = observations_[static_cast<std::size_t>(j) + 1];
        StepContext ctx;
        ctx.model = &model_;
        ctx.proposal = proposal.get();
        ctx.y_next = y_next;
        ctx.target_mean = filter_.means[static_cast<std::size_t>(j) + 1];
        ctx.target = &identity;
        ctx.quad_nodes = options_.quad_nodes;
        t.log_g.resize(static_cast<std::size_t>(nodes));
        t.log_psi.resize(static_cast<std::size_t>(nodes));
        t.r_mean.resize(static_cast<std::size_t>(nodes));
        t.r_std.resize(static_cast<std::size_t>(nodes));
        t.r_log_std.resize(static_cast<std::size_t>(nodes));
        t.q_mean.resize(static_cast<std::size_t>(nodes));
        t.q_std.resize(static_cast<std::size_t>(nodes));
        t.q_log_std.resize(static_cast<std::size_t>(nodes));
        for (int i = 0; i < nodes; ++i) {
            std::size_t u = static_cast<std::size_t>(i);
            t.log_g[u] = model_.log_likelihood(y_next, xs[u]);
            t.log_psi[u] = strategy->log_weight(ctx, xs[u]);
            GaussianLaw law = proposal->law(xs[u], y_next);
            t.r_mean[u] = law.mean;
            t.r_std[u] = law.stddev;
            t.r_log_std[u] = std::log(law.stddev);
            t.q_mean[u] = model_.transition_mean(xs[u]);
            t.q_std[u] = model_.transition_std(xs[u]);
            t.q_log_std[u] = std::log(t.q_std[u]);
        }
    }

    VarianceTable out;
    out.sigma2_ssapf.assign(static_cast<std::size_t>(n) + 1, 0.0);
    out.sigma2_tsspf.assign(static_cast<std::size_t>(n) + 1, 0.0);
    out.sigma2_tsspf_chained.assign(static_cast<std::size_t>(n) + 1, 0.0);
    out.posterior_variance.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 0; k <= n; ++k) {
        out.posterior_variance[static_cast<std::size_t>(k)] = filter_.variance(k);
    }

    // sigma0: self-normalized importance-sampling variance of the initial
    // weighted sample, nu[g0^2 (h - pi_0 h)^2] / (nu g0)^2.
    auto sigma0_base = [&](const std::vector<double>& h) {
        double centered_mean = filter_.integrate(0, h);
        double log_shift = kNegInf;
        std::vector<double> log_g0(static_cast<std::size_t>(nodes));
        std::vector<double> log_nu(static_cast<std::size_t>(nodes));
        for (int i = 0; i < nodes; ++i) {
            std::size_t u = static_cast<std::size_t>(i);
            log_g0[u] = model_.log_likelihood(observations_[0], xs[u]);
            log_nu[u] = model_.log_initial_density(xs[u]);
            if (log_nu[u] != kNegInf) log_shift = std::max(log_shift, log_g0[u]);
        }
        double num = 0.0, den = 0.0;
        for (int i = 0; i < nodes; ++i) {
            std::size_t u = static_cast<std::size_t>(i);
            if (log_nu[u] == kNegInf) continue;
            double w = grid.weight(i);
            double centered = h[u] - centered_mean;
            num += w * std::exp(log_nu[u] + 2.0 * (log_g0[u] - log_shift)) * centered * centered;
            den += w * std::exp(log_nu[u] + log_g0[u] - log_shift);
        }
        return num / (den * den);
    };

    {
        std::vector<double> projection = xs;
        double base = sigma0_base(projection);
        out.sigma2_ssapf[0] = base;
        out.sigma2_tsspf[0] = base;
        out.sigma2_tsspf_chained[0] = base;
    }

    // d_j = pi_j U_j(1) does not depend on the strategy or target.
    std::vector<double> d(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const StepTable& t = tables[static_cast<std::size_t>(j)];
        const std::vector<double>& density = filter_.densities[static_cast<std::size_t>(j)];
        double acc = 0.0;
        for (int i = 0; i < nodes; ++i) {
            std::size_t u = static_cast<std::size_t>(i);
            if (density[u] <= 0.0) continue;
            double inner = 0.0;
            for (int l = 0; l < nodes; ++l) {
                std::size_t v = static_cast<std::size_t>(l);
                double z = (xs[v] - t.q_mean[u]) / t.q_std[u];
                double log_q = -0.5 * z * z - t.q_log_std[u] - kLogSqrt2Pi;
                inner += grid.weight(l) * std::exp(t.log_g[v] + log_q);
            }
            acc += grid.weight(i) * density[u] * inner;
        }
        d[static_cast<std::size_t>(j)] = acc;
    }

    // Backward transport for each target step: center, accumulate the c and
    // posterior-variance terms, push the function one level down.
    std::vector<double> h(static_cast<std::size_t>(nodes));
    std::vector<double> lam(static_cast<std::size_t>(nodes));
    std::vector<double> h_prev(static_cast<std::size_t>(nodes));
    for (int k = 1; k <= n; ++k) {
        h = xs;
        std::vector<double> c(static_cast<std::size_t>(k), 0.0);
        std::vector<double> pv(static_cast<std::size_t>(k), 0.0);
        for (int j = k - 1; j >= 0; --j) {
            const StepTable& t = tables[static_cast<std::size_t>(j)];
            const std::vector<double>& density = filter_.densities[static_cast<std::size_t>(j)];
            const std::vector<double>& density_next =
                filter_.densities[static_cast<std::size_t>(j) + 1];
            double h_mean = filter_.integrate(j + 1, h);
            double pv_acc = 0.0;
            for (int l = 0; l < nodes; ++l) {
                std::size_t v = static_cast<std::size_t>(l);
                lam[v] = h[v] - h_mean;
                pv_acc += grid.weight(l) * density_next[v] * lam[v] * lam[v];
            }
            pv[static_cast<std::size_t>(j)] = pv_acc;

            LogSum part_a;  // log pi_j[psi^{-1} * int g^2 q^2 / r * lam^2]
            LogSum part_b;  // log pi_j[psi]
            for (int i = 0; i < nodes; ++i) {
                std::size_t u = static_cast<std::size_t>(i);
                double inner_c = 0.0;
                double inner_push = 0.0;
                for (int l = 0; l < nodes; ++l) {
                    std::size_t v = static_cast<std::size_t>(l);
                    double zq = (xs[v] - t.q_mean[u]) / t.q_std[u];
                    double log_q = -0.5 * zq * zq - t.q_log_std[u] - kLogSqrt2Pi;
                    double zr = (xs[v] - t.r_mean[u]) / t.r_std[u];
                    double log_r = -0.5 * zr * zr - t.r_log_std[u] - kLogSqrt2Pi;
                    double w = grid.weight(l);
                    inner_push += w * std::exp(t.log_g[v] + log_q) * lam[v];
                    inner_c += w * std::exp(2.0 * (t.log_g[v] + log_q) - log_r) *
                               lam[v] * lam[v];
                }
                h_prev[u] = inner_push;
                if (density[u] <= 0.0) continue;
                double log_base = safe_log(grid.weight(i)) + std::log(density[u]);
                part_a.add(log_base - t.log_psi[u] + safe_log(inner_c));
                part_b.add(log_base + t.log_psi[u]);
            }
            c[static_cast<std::size_t>(j)] = std::exp(part_a.value() + part_b.value());
            std::swap(h, h_prev);
        }

        double base = sigma0_base(h);
        double v_ssapf = base;
        double v_chained = base;
        double before_last = base;
        for (int j = 0; j < k; ++j) {
            before_last = v_ssapf;
            double dj = d[static_cast<std::size_t>(j)];
            double cj = c[static_cast<std::size_t>(j)];
            v_ssapf = (v_ssapf + cj) / (dj * dj);
            v_chained = pv[static_cast<std::size_t>(j)] +
                        (v_chained + options_.beta * cj) / (dj * dj);
        }
        out.sigma2_ssapf[static_cast<std::size_t>(k)] = v_ssapf;
        double d_last = d[static_cast<std::size_t>(k - 1)];
        out.sigma2_tsspf[static_cast<std::size_t>(k)] =
            pv[static_cast<std::size_t>(k - 1)] +
            (before_last + options_.beta * c[static_cast<std::size_t>(k - 1)]) /
                (d_last * d_last);
        out.sigma2_tsspf_chained[static_cast<std::size_t>(k)] = v_chained;
    }
    return out;
}

VarianceTable VarianceRecursionEvaluator::evaluate_checked(
    ProposalChoice proposal, FirstStageKind strategy) const {
    VarianceTable coarse = evaluate(proposal, strategy);
    Options refined_options = options_;
    refined_options.grid_nodes = 2 * options_.grid_nodes;
    VarianceRecursionEvaluator refined(model_, observations_, refined_options);
    VarianceTable fine = refined.evaluate(proposal, strategy);
    for (std::size_t k = 0; k < coarse.sigma2_ssapf.size(); ++k) {
        double a = coarse.sigma2_ssapf[k];
        double b = fine.sigma2_ssapf[k];
        if (std::fabs(a - b) > options_.refine_tol * std::max({1e-300, std::fabs(a), std::fabs(b)})) {
            throw QuadratureNotConverged("variance recursion: grid refinement moved sigma2 at k=" +
                                         std::to_string(k));
        }
    }
    return fine;
}

StrategyComparison compare_strategies(const StateSpaceModel& model,
                                      std::span<const double> observations,
                                      const std::vector<StrategyArm>& arms) {
    return compare_strategies(model, observations, arms,
                              VarianceRecursionEvaluator::Options());
}

StrategyComparison compare_strategies(const StateSpaceModel& model,
                                      std::span<const double> observations,
                                      const std::vector<StrategyArm>& arms,
                                      VarianceRecursionEvaluator::Options options) {
    VarianceRecursionEvaluator evaluator(model, observations, options);
    StrategyComparison out;
    out.arms = arms;
    out.tables.reserve(arms.size());
    for (const StrategyArm& arm : arms) {
        out.tables.push_back(evaluator.evaluate(arm.proposal, arm.strategy));
    }
    return out;
}

void write_variance_csv(const StrategyComparison& comparison, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError("cannot write variance CSV: " + path);
    file << "k,strategy,sigma2_ssapf,sigma2_tsspf\n";
    char buf[128];
    for (std::size_t a = 0; a < comparison.arms.size(); ++a) {
        const VarianceTable& table = comparison.tables[a];
        for (std::size_t k = 0; k < table.sigma2_ssapf.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%zu,%s,%.12g,%.12g\n", k,
                          comparison.arms[a].label.c_str(), table.sigma2_ssapf[k],
                          table.sigma2_tsspf[k]);
            file << buf;
        }
    }
}

}  // namespace apf
