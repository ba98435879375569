#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "apf/errors.hpp"
#include "apf/filter.hpp"
#include "apf/kalman.hpp"
#include "apf/models.hpp"
#include "apf/quadrature.hpp"
#include "apf/stats.hpp"
#include "apf/stratified.hpp"
#include "apf/variance_recursion.hpp"

using namespace apf;

namespace {

const std::function<double(double)> kIdentity = [](double x) { return x; };

std::vector<double> simulated_record(const StateSpaceModel& model, int horizon,
                                     std::uint64_t seed) {
    RngStream rng(seed, 404);
    return simulate(model, horizon, rng).observations;
}

// Closed-form/1-D-quadrature oracle for the one-step SSAPF variance of the
// bootstrap filter on the linear Gaussian model. Everything is derived from
// Gaussian product identities; only the final averages over x use a fine
// trapezoid rule, entirely independent of the evaluator's machinery.
struct OneStepOracle {
    double sigma2_1 = 0.0;       // sigma~^2_1(projection)
    double posterior_var_1 = 0.0;
};

OneStepOracle one_step_oracle(double phi, double sigma, double sigma_v, double y0,
                              double y1) {
    double p0 = sigma * sigma / (1.0 - phi * phi);
    double sv2 = sigma_v * sigma_v;
    double sw2 = sigma * sigma;

    double s0_sq = 1.0 / (1.0 / p0 + 1.0 / sv2);
    double mu0 = s0_sq * y0 / sv2;
    double pred_mean = phi * mu0;
    double pred_var = phi * phi * s0_sq + sw2;
    double s1_sq = 1.0 / (1.0 / pred_var + 1.0 / sv2);
    double target_mean = s1_sq * (y1 / sv2 + pred_mean / pred_var);

    double d0 = normal_pdf(y1, phi * mu0, std::sqrt(phi * phi * s0_sq + sw2 + sv2));

    double opt_var = sw2 * sv2 / (sw2 + sv2);
    auto u0 = [&](double x) {
        double kappa = normal_pdf(y1, phi * x, std::sqrt(sw2 + sv2));
        double mu_opt = opt_var * (y1 / sv2 + phi * x / sw2);
        return kappa * (mu_opt - target_mean);
    };

    double sp_sq = 1.0 / (2.0 / sv2 + 1.0 / sw2);
    auto inner_c = [&](double x) {
        double mass = normal_pdf(y1, phi * x, std::sqrt(sw2 + 0.5 * sv2));
        double mu_p = sp_sq * (2.0 * y1 / sv2 + phi * x / sw2);
        double quad = sp_sq + (mu_p - target_mean) * (mu_p - target_mean);
        return mass * quad / (2.0 * sigma_v * std::sqrt(3.14159265358979323846));
    };

    UniformGrid grid{-12.0 * std::sqrt(p0) + mu0, 12.0 * std::sqrt(p0) + mu0, 40001};
    auto pi0 = [&](double x) { return normal_pdf(x, mu0, std::sqrt(s0_sq)); };
    auto nu = [&](double x) { return normal_pdf(x, 0.0, std::sqrt(p0)); };
    auto g0 = [&](double x) { return normal_pdf(y0, x, sigma_v); };

    std::vector<double> values(static_cast<std::size_t>(grid.nodes));
    auto integrate = [&](const std::function<double(double)>& f) {
        for (int i = 0; i < grid.nodes; ++i) {
            values[static_cast<std::size_t>(i)] = f(grid.point(i));
        }
        return trapezoid(values, grid.step());
    };

    double c0 = integrate([&](double x) { return pi0(x) * inner_c(x); });
    double pi0_u0 = integrate([&](double x) { return pi0(x) * u0(x); });
    double nu_g0 = integrate([&](double x) { return nu(x) * g0(x); });
    double base_num = integrate([&](double x) {
        double centered = u0(x) - pi0_u0;
        return nu(x) * g0(x) * g0(x) * centered * centered;
    });
    double base = base_num / (nu_g0 * nu_g0);

    OneStepOracle out;
    out.sigma2_1 = (base + c0) / (d0 * d0);
    out.posterior_var_1 = s1_sq;
    return out;
}

}  // namespace

TEST_CASE("one-step recursion matches the closed-form Gaussian oracle") {
    double phi = 0.9, sigma = 0.1, sigma_v = 0.1;
    double y0 = 0.07, y1 = -0.12;
    OneStepOracle oracle = one_step_oracle(phi, sigma, sigma_v, y0, y1);

    LinearGaussianAR1 model(phi, sigma, sigma_v);
    std::vector<double> record = {y0, y1};
    VarianceRecursionEvaluator::Options options;
    options.grid_nodes = 2048;
    VarianceRecursionEvaluator evaluator(model, record, options);
    VarianceTable table = evaluator.evaluate(ProposalChoice::Prior, FirstStageKind::Uniform);

    CHECK(table.sigma2_ssapf[1] ==
          doctest::Approx(oracle.sigma2_1).epsilon(1e-5));
    CHECK(table.posterior_variance[1] ==
          doctest::Approx(oracle.posterior_var_1).epsilon(1e-6));
    // The two-stage display differs exactly by the posterior variance.
    CHECK(table.sigma2_tsspf[1] - table.sigma2_ssapf[1] ==
          doctest::Approx(oracle.posterior_var_1).epsilon(1e-6));
}

TEST_CASE("beta = 1 gap identity holds at every step") {
    LinearGaussianAR1 model(0.9, 0.1, 0.1);
    std::vector<double> record = simulated_record(model, 8, 51);
    VarianceRecursionEvaluator::Options options;
    options.grid_nodes = 1024;
    VarianceRecursionEvaluator evaluator(model, record, options);
    for (FirstStageKind strategy : {FirstStageKind::Uniform, FirstStageKind::PsGeneric,
                                    FirstStageKind::OptimalExact}) {
        VarianceTable table = evaluator.evaluate(ProposalChoice::Prior, strategy);
        for (std::size_t k = 1; k < table.sigma2_ssapf.size(); ++k) {
            double gap = table.sigma2_tsspf[k] - table.sigma2_ssapf[k];
            CHECK(gap == doctest::Approx(table.posterior_variance[k]).epsilon(1e-6));
            // The fully chained two-stage recursion accumulates at least as
            // much variance as the single extra resampling pass.
            CHECK(table.sigma2_tsspf_chained[k] >= table.sigma2_tsspf[k] - 1e-12);
        }
        CHECK(table.sigma2_tsspf_chained[1] ==
              doctest::Approx(table.sigma2_tsspf[1]).epsilon(1e-9));
    }
}

TEST_CASE("the two-stage penalty shrinks with beta") {
    LinearGaussianAR1 model(0.9, 0.1, 0.1);
    std::vector<double> record = simulated_record(model, 5, 52);
    VarianceRecursionEvaluator::Options half;
    half.grid_nodes = 1024;
    half.beta = 0.5;
    VarianceRecursionEvaluator::Options full;
    full.grid_nodes = 1024;
    full.beta = 1.0;
    VarianceTable t_half = VarianceRecursionEvaluator(model, record, half)
                               .evaluate(ProposalChoice::Prior, FirstStageKind::Uniform);
    VarianceTable t_full = VarianceRecursionEvaluator(model, record, full)
                               .evaluate(ProposalChoice::Prior, FirstStageKind::Uniform);
    for (std::size_t k = 1; k < t_half.sigma2_tsspf.size(); ++k) {
        CHECK(t_half.sigma2_tsspf[k] < t_full.sigma2_tsspf[k]);
        // the SSAPF column does not involve beta
        CHECK(t_half.sigma2_ssapf[k] == doctest::Approx(t_full.sigma2_ssapf[k]));
    }
}

TEST_CASE("grid refinement leaves the recursion values in place") {
    LinearGaussianAR1 model(0.9, 0.1, 0.1);
    std::vector<double> record = simulated_record(model, 4, 53);
    VarianceRecursionEvaluator::Options options;
    options.grid_nodes = 1024;
    VarianceRecursionEvaluator evaluator(model, record, options);
    CHECK_NOTHROW(evaluator.evaluate_checked(ProposalChoice::Prior, FirstStageKind::Uniform));
}

TEST_CASE("optimal weights minimize the recursion among the tested strategies") {
    LinearGaussianAR1 model(0.9, 0.1, 0.1);
    std::vector<double> record = simulated_record(model, 8, 54);
    std::vector<StrategyArm> arms = {
        {"uniform", ProposalChoice::Prior, FirstStageKind::Uniform},
        {"ps-generic", ProposalChoice::Prior, FirstStageKind::PsGeneric},
        {"optimal-exact", ProposalChoice::Prior, FirstStageKind::OptimalExact},
    };
    VarianceRecursionEvaluator::Options options;
    options.grid_nodes = 1024;
    StrategyComparison comparison = compare_strategies(model, record, arms, options);
    const VarianceTable& optimal = comparison.tables[2];
    for (std::size_t arm = 0; arm < 2; ++arm) {
        for (std::size_t k = 1; k < optimal.sigma2_ssapf.size(); ++k) {
            CHECK(optimal.sigma2_ssapf[k] <=
                  comparison.tables[arm].sigma2_ssapf[k] + 1e-9);
        }
    }
}

TEST_CASE("outlier record: optimal weights beat uniform at the outlier step") {
    LinearGaussianAR1 model(0.9, 0.1, 1.0);
    std::vector<double> record = {-0.652, -0.345, -0.676, 1.142, 0.721, 20.0};
    std::vector<StrategyArm> arms = {
        {"uniform", ProposalChoice::Prior, FirstStageKind::Uniform},
        {"optimal-exact", ProposalChoice::Prior, FirstStageKind::OptimalExact},
    };
    VarianceRecursionEvaluator::Options options;
    options.grid_nodes = 2048;
    StrategyComparison comparison = compare_strategies(model, record, arms, options);
    CHECK(comparison.tables[1].sigma2_ssapf[5] < comparison.tables[0].sigma2_ssapf[5]);
}

TEST_CASE("single strategy comparison emits a one-arm table") {
    LinearGaussianAR1 model(0.9, 0.1, 0.1);
    std::vector<double> record = simulated_record(model, 3, 55);
    std::vector<StrategyArm> arms = {
        {"uniform", ProposalChoice::Prior, FirstStageKind::Uniform}};
    StrategyComparison comparison = compare_strategies(model, record, arms);
    CHECK(comparison.tables.size() == 1);
    CHECK(comparison.tables[0].sigma2_ssapf.size() == record.size());
}

TEST_CASE("informative regime: fully adapted is within 5% of optimal") {
    LinearGaussianAR1 model(0.9, 1.0, 0.1);  // sigma_v << sigma
    std::vector<double> record = simulated_record(model, 10, 56);
    std::vector<StrategyArm> arms = {
        {"fully-adapted", ProposalChoice::OptimalGaussian, FirstStageKind::FullyAdapted},
        {"optimal-exact", ProposalChoice::OptimalGaussian, FirstStageKind::OptimalExact},
    };
    VarianceRecursionEvaluator::Options options;
    options.grid_nodes = 1024;
    StrategyComparison comparison = compare_strategies(model, record, arms, options);
    std::size_t last = record.size() - 1;
    double ratio = comparison.tables[0].sigma2_ssapf[last] /
                   comparison.tables[1].sigma2_ssapf[last];
    CHECK(ratio >= 1.0 - 1e-9);
    CHECK(ratio < 1.05);
}

TEST_CASE("Hoelder witness: perturbing tau* never lowers the one-step functional") {
    LinearGaussianAR1 model(0.9, 0.1, 0.1);
    std::vector<double> record = simulated_record(model, 6, 57);
    VarianceRecursionEvaluator::Options options;
    options.grid_nodes = 512;
    VarianceRecursionEvaluator evaluator(model, record, options);
    PriorProposal prior(model);
    RngStream rng(58, 0);
    const int nodes = evaluator.filter().grid.nodes;
    for (int step = 1; step <= 3; ++step) {
        std::vector<double> log_tau = evaluator.tau_star_on_grid(step - 1, prior);
        double v_star = evaluator.one_step_variance_functional(step - 1, log_tau, log_tau);
        for (double eps : {0.1, 0.5}) {
            for (int p = 0; p < 10; ++p) {
                double a0 = rng.normal();
                double a1 = rng.normal();
                double omega = 0.5 + 2.0 * rng.uniform();
                double shift = 6.283185307179586 * rng.uniform();
                std::vector<double> log_psi(log_tau);
                for (int i = 0; i < nodes; ++i) {
                    double x = evaluator.filter().grid.point(i);
                    log_psi[static_cast<std::size_t>(i)] +=
                        eps * (a0 + a1 * std::sin(omega * x + shift));
                }
                double v = evaluator.one_step_variance_functional(step - 1, log_psi,
                                                                  log_tau);
                CHECK(v >= v_star - 1e-9);
            }
        }
        // Equality at psi = tau*: the functional collapses to (pi tau*)^2.
        const auto& density = evaluator.filter().densities[static_cast<std::size_t>(step - 1)];
        double pi_tau = 0.0;
        for (int i = 0; i < nodes; ++i) {
            pi_tau += evaluator.filter().grid.weight(i) *
                      density[static_cast<std::size_t>(i)] *
                      std::exp(log_tau[static_cast<std::size_t>(i)]);
        }
        CHECK(v_star == doctest::Approx(pi_tau * pi_tau).epsilon(1e-9));
    }
}

TEST_CASE("empirical calibration: bootstrap errors match sigma~ at one step") {
    LinearGaussianAR1 model(0.9, 0.1, 0.1);
    std::vector<double> record = simulated_record(model, 3, 59);
    VarianceRecursionEvaluator::Options options;
    options.grid_nodes = 1024;
    VarianceRecursionEvaluator evaluator(model, record, options);
    VarianceTable table = evaluator.evaluate(ProposalChoice::Prior, FirstStageKind::Uniform);
    auto kalman = kalman_filter(model, record);

    const int reps = 4000;
    const int n_particles = 500;
    std::vector<double> scaled_errors;
    scaled_errors.reserve(reps);
    FilterConfig config;
    config.variant = FilterVariant::Bootstrap;
    config.particles = n_particles;
    for (int r = 0; r < reps; ++r) {
        RngStream rng = RngStream::derive(6000, static_cast<std::uint64_t>(r), "calib");
        FilterResult result = run_filter(config, model, record, kIdentity, rng);
        scaled_errors.push_back(std::sqrt(static_cast<double>(n_particles)) *
                                (result.estimates[3] - kalman[3].mean));
    }
    double empirical = sample_variance(scaled_errors);
    CHECK(empirical == doctest::Approx(table.sigma2_ssapf[3]).epsilon(0.25));
}

TEST_CASE("empirical normality: scaled errors pass Anderson-Darling at 1%") {
    LinearGaussianAR1 model(0.9, 0.1, 0.1);
    std::vector<double> record = simulated_record(model, 3, 60);
    auto kalman = kalman_filter(model, record);
    const int reps = 2000;
    std::vector<double> errors;
    errors.reserve(reps);
    FilterConfig config;
    config.variant = FilterVariant::Bootstrap;
    config.particles = 1000;
    for (int r = 0; r < reps; ++r) {
        RngStream rng = RngStream::derive(6100, static_cast<std::uint64_t>(r), "adtest");
        FilterResult result = run_filter(config, model, record, kIdentity, rng);
        errors.push_back(result.estimates[3] - kalman[3].mean);
    }
    double m = mean(errors);
    double sd = std::sqrt(sample_variance(errors));
    std::vector<double> z(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i) z[i] = (errors[i] - m) / sd;
    std::sort(z.begin(), z.end());
    double n = static_cast<double>(z.size());
    double a2 = -n;
    for (std::size_t i = 0; i < z.size(); ++i) {
        double u = normal_cdf(z[i]);
        u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
        double u_rev = normal_cdf(z[z.size() - 1 - i]);
        u_rev = std::min(std::max(u_rev, 1e-12), 1.0 - 1e-12);
        a2 -= (2.0 * static_cast<double>(i) + 1.0) / n *
              (std::log(u) + std::log1p(-u_rev));
    }
    double a2_star = a2 * (1.0 + 0.75 / n + 2.25 / (n * n));
    CHECK(a2_star < 1.092);  // 1% critical value with estimated parameters
}

TEST_CASE("stratified sampling: single component is ordinary importance sampling") {
    MixtureSpec spec;
    spec.components.push_back({1.0, std::make_shared<GaussianDistribution>(1.0, 1.0),
                               std::make_shared<GaussianDistribution>(0.0, 2.0)});
    spec.allocation = {1.0};
    RngStream rng(61, 0);
    WeightedSample sample = stratified_sample(spec, 2000, rng);
    // omega = dmu/dnu pointwise
    for (std::size_t i = 0; i < 10; ++i) {
        double x = sample.states()[i];
        double expected = log_normal_density(x, 1.0, 1.0) - log_normal_density(x, 0.0, 2.0);
        CHECK(sample.raw_weights()[i] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("stratified sampling: tau = w and nu = mu gives unit weights") {
    auto g1 = std::make_shared<GaussianDistribution>(-1.0, 0.7);
    auto g2 = std::make_shared<GaussianDistribution>(2.0, 1.3);
    MixtureSpec spec;
    spec.components.push_back({0.3, g1, g1});
    spec.components.push_back({0.7, g2, g2});
    spec.allocation = {0.3, 0.7};
    RngStream rng(62, 0);
    WeightedSample sample = stratified_sample(spec, 500, rng);
    for (double lw : sample.raw_weights()) CHECK(lw == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("stratified sampling: two-Gaussian mean lands in the 3-sigma band") {
    auto mu1 = std::make_shared<GaussianDistribution>(-1.0, 1.0);
    auto mu2 = std::make_shared<GaussianDistribution>(3.0, 0.5);
    auto nu1 = std::make_shared<GaussianDistribution>(-1.0, 1.4);
    auto nu2 = std::make_shared<GaussianDistribution>(3.0, 0.8);
    MixtureSpec spec;
    spec.components.push_back({0.4, mu1, nu1});
    spec.components.push_back({0.6, mu2, nu2});
    spec.allocation = {0.5, 0.5};
    double truth = 0.4 * (-1.0) + 0.6 * 3.0;

    const int draws = 100000;
    RngStream rng(63, 0);
    WeightedSample sample = stratified_sample(spec, draws, rng);
    double estimate = sample.estimate(kIdentity);

    std::vector<double> alpha = component_alpha(spec, kIdentity);
    double asym_var = allocation_objective(spec, alpha, spec.allocation);
    double band = 3.0 * std::sqrt(asym_var / draws);
    CHECK(std::fabs(estimate - truth) <= band);
}

TEST_CASE("optimal allocation: alpha ratio of 4 gives tau* = (2/3, 1/3)") {
    auto wide = std::make_shared<GaussianDistribution>(-1.0, std::sqrt(7.0));
    auto narrow = std::make_shared<GaussianDistribution>(1.0, 1.0);
    MixtureSpec spec;
    spec.components.push_back({0.5, wide, wide});
    spec.components.push_back({0.5, narrow, narrow});
    spec.allocation = {0.5, 0.5};
    // pi f = 0, alpha_1 = 7 + 1 = 8, alpha_2 = 1 + 1 = 2.
    std::vector<double> alpha = component_alpha(spec, kIdentity);
    CHECK(alpha[0] == doctest::Approx(8.0).epsilon(1e-6));
    CHECK(alpha[1] == doctest::Approx(2.0).epsilon(1e-6));
    std::vector<double> tau = optimal_allocation(spec, kIdentity);
    CHECK(tau[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(tau[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("optimal allocation beats a coarse simplex sweep") {
    auto c1 = std::make_shared<GaussianDistribution>(-2.0, 0.8);
    auto c2 = std::make_shared<GaussianDistribution>(0.5, 1.5);
    auto c3 = std::make_shared<GaussianDistribution>(3.0, 0.6);
    MixtureSpec spec;
    spec.components.push_back({0.25, c1, std::make_shared<GaussianDistribution>(-2.0, 1.1)});
    spec.components.push_back({0.45, c2, std::make_shared<GaussianDistribution>(0.5, 1.9)});
    spec.components.push_back({0.30, c3, std::make_shared<GaussianDistribution>(3.0, 0.9)});
    spec.allocation = {1.0 / 3, 1.0 / 3, 1.0 / 3};

    std::vector<double> alpha = component_alpha(spec, kIdentity);
    std::vector<double> tau_star = optimal_allocation(spec, kIdentity);
    double best = allocation_objective(spec, alpha, tau_star);
    const int steps = 100;  // 0.01 resolution sweep
    for (int i = 1; i < steps; ++i) {
        for (int j = 1; j < steps - i; ++j) {
            std::vector<double> tau = {i / 100.0, j / 100.0, 1.0 - (i + j) / 100.0};
            CHECK(allocation_objective(spec, alpha, tau) >= best - 1e-9);
        }
    }
}

TEST_CASE("optimal allocation rejects a constant target") {
    auto g = std::make_shared<GaussianDistribution>(0.0, 1.0);
    MixtureSpec spec;
    spec.components.push_back({0.5, g, g});
    spec.components.push_back({0.5, std::make_shared<GaussianDistribution>(1.0, 1.0),
                               std::make_shared<GaussianDistribution>(1.0, 1.0)});
    spec.allocation = {0.5, 0.5};
    const std::function<double(double)> constant = [](double) { return 2.5; };
    CHECK_THROWS_AS(optimal_allocation(spec, constant), DegenerateTarget);
}

TEST_CASE("mixture spec validation") {
    auto g = std::make_shared<GaussianDistribution>(0.0, 1.0);
    MixtureSpec spec;
    spec.components.push_back({1.0, g, g});
    spec.allocation = {0.0};  // zero allocation on a positive-weight stratum
    CHECK_THROWS(spec.validate());
    spec.allocation = {1.0};
    CHECK_NOTHROW(spec.validate());
}
