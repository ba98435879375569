#include "apf/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "apf/errors.hpp"
#include "apf/grid_filter.hpp"
#include "apf/kalman.hpp"
#include "apf/observations.hpp"

namespace apf {

Trajectory simulate_from_state(const StateSpaceModel& model, double x0, int horizon,
                               RngStream& rng) {
    Trajectory out;
    out.states.push_back(x0);
    out.observations.push_back(model.sample_observation(x0, rng));
    double x = x0;
    for (int k = 1; k <= horizon; ++k) {
        x = model.sample_transition(x, rng);
        out.states.push_back(x);
        out.observations.push_back(model.sample_observation(x, rng));
    }
    return out;
}

namespace {

constexpr std::uint64_t kRecordSeed = 902171u;

std::vector<double> simulated_record(const StateSpaceModel& model, int horizon,
                                     std::string_view tag) {
    RngStream rng = RngStream::derive(kRecordSeed, 0, tag);
    return simulate(model, horizon, rng).observations;
}

std::vector<ExperimentSpec> build_experiments() {
    std::vector<ExperimentSpec> out;

    // Common arm sets.
    ArmSpec bootstrap{"bootstrap", FilterVariant::Bootstrap, ProposalChoice::Prior,
                      FirstStageKind::Uniform};
    ArmSpec ps_prior{"ps-generic", FilterVariant::Ssapf, ProposalChoice::Prior,
                     FirstStageKind::PsGeneric};
    ArmSpec optimal_prior{"optimal-exact", FilterVariant::Ssapf, ProposalChoice::Prior,
                          FirstStageKind::OptimalExact};
    ArmSpec fa_gauss{"fully-adapted", FilterVariant::Ssapf,
                     ProposalChoice::OptimalGaussian, FirstStageKind::FullyAdapted};
    ArmSpec optimal_gauss{"optimal-exact", FilterVariant::Ssapf,
                          ProposalChoice::OptimalGaussian, FirstStageKind::OptimalExact};
    ArmSpec pilot_gauss{"optimal-pilot", FilterVariant::Ssapf,
                        ProposalChoice::OptimalGaussian, FirstStageKind::OptimalPilot};
    ArmSpec fa_sv{"fully-adapted", FilterVariant::Ssapf, ProposalChoice::SvLaplace,
                  FirstStageKind::FullyAdapted};
    ArmSpec pilot_sv{"optimal-pilot", FilterVariant::Ssapf, ProposalChoice::SvLaplace,
                     FirstStageKind::OptimalPilot};

    {
        ExperimentSpec spec;
        spec.id = "lingauss-basic";
        spec.description =
            "AR(1) phi=0.9, sigma=sigma_v=0.1, n=10; prior proposal; Kalman oracle";
        spec.model = std::make_shared<LinearGaussianAR1>(0.9, 0.1, 0.1);
        spec.record = simulated_record(*spec.model, 10, "record/lingauss-basic/9");
        spec.arms = {bootstrap, ps_prior, optimal_prior};
        spec.seed = 7101;
        out.push_back(std::move(spec));
    }
    {
        ExperimentSpec spec;
        spec.id = "outlier";
        spec.description =
            "AR(1) phi=0.9, sigma=0.1, sigma_v=1 with a 20-standard-deviation outlier at k=5";
        spec.model = std::make_shared<LinearGaussianAR1>(0.9, 0.1, 1.0);
        spec.record = {-0.652, -0.345, -0.676, 1.142, 0.721, 20.0};
        spec.arms = {bootstrap, ps_prior, optimal_prior};
        spec.seed = 7102;
        out.push_back(std::move(spec));
    }
    {
        ExperimentSpec spec;
        spec.id = "lingauss-fa-informative";
        spec.description =
            "AR(1) phi=0.9, sigma=1, sigma_v=0.1 (informative); fully adapted vs optimal";
        spec.model = std::make_shared<LinearGaussianAR1>(0.9, 1.0, 0.1);
        spec.record = simulated_record(*spec.model, 10, "record/lingauss-fa-informative");
        spec.arms = {bootstrap, ps_prior, fa_gauss, optimal_gauss};
        spec.seed = 7103;
        out.push_back(std::move(spec));
    }
    {
        ExperimentSpec spec;
        spec.id = "lingauss-fa-noninformative";
        spec.description =
            "AR(1) phi=0.9, sigma=0.1, sigma_v=1 (non-informative); fully adapted vs optimal";
        spec.model = std::make_shared<LinearGaussianAR1>(0.9, 0.1, 1.0);
        spec.record = simulated_record(*spec.model, 10, "record/lingauss-fa-noninformative");
        spec.arms = {bootstrap, ps_prior, fa_gauss, optimal_gauss};
        spec.seed = 7104;
        out.push_back(std::move(spec));
    }
    {
        ExperimentSpec spec;
        spec.id = "arch-informative";
        spec.description =
            "Noisy ARCH (beta0,beta1,sigma_v)=(9,5,1); optimal weights from a pilot pass";
        spec.model = std::make_shared<NoisyArch>(9.0, 5.0, 1.0);
        spec.record = simulated_record(*spec.model, 10, "record/arch-informative/10");
        spec.arms = {bootstrap, ps_prior, fa_gauss, pilot_gauss};
        spec.pilot_particles = 400;  // R = N/10 at the desk-scale default N
        spec.seed = 7105;
        spec.oracle = OracleKind::Grid;
        out.push_back(std::move(spec));
    }
    {
        ExperimentSpec spec;
        spec.id = "arch-noninformative";
        spec.description =
            "Noisy ARCH (beta0,beta1,sigma_v)=(0.1,1,3); optimal weights from a pilot pass";
        spec.model = std::make_shared<NoisyArch>(0.1, 1.0, 3.0);
        spec.record = simulated_record(*spec.model, 10, "record/arch-noninformative");
        spec.arms = {bootstrap, ps_prior, fa_gauss, pilot_gauss};
        spec.pilot_particles = 400;
        spec.seed = 7106;
        spec.oracle = OracleKind::Grid;
        out.push_back(std::move(spec));
    }
    {
        ExperimentSpec spec;
        spec.id = "sv-pound";
        spec.description =
            "Stochastic volatility (phi,beta,sigma)=(0.9702,0.5992,0.178), record started "
            "at x0=2.19; Laplace proposal";
        auto model = std::make_shared<StochasticVolatility>(0.9702, 0.178, 0.5992);
        RngStream rng = RngStream::derive(kRecordSeed, 0, "record/sv-pound");
        spec.record = simulate_from_state(*model, 2.19, 10, rng).observations;
        spec.model = std::move(model);
        spec.arms = {bootstrap, ps_prior, fa_sv, pilot_sv};
        spec.pilot_particles = 800;  // R = N/5 at the desk-scale default N
        spec.seed = 7107;
        spec.oracle = OracleKind::Grid;
        out.push_back(std::move(spec));
    }
    return out;
}

void parallel_over_replications(int runs, const std::function<void(int)>& body) {
    unsigned hw = std::thread::hardware_concurrency();
    int workers = static_cast<int>(std::max(1u, hw));
    workers = std::min(workers, runs);
    if (workers <= 1) {
        for (int r = 0; r < runs; ++r) body(r);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (int r = w; r < runs; r += workers) body(r);
        });
    }
    for (std::thread& t : pool) t.join();
}

}  // namespace

const std::vector<ExperimentSpec>& builtin_experiments() {
    static const std::vector<ExperimentSpec> experiments = build_experiments();
    return experiments;
}

const ExperimentSpec& find_experiment(const std::string& id) {
    for (const ExperimentSpec& spec : builtin_experiments()) {
        if (spec.id == id) return spec;
    }
    throw ConfigError("unknown experiment: " + id);
}

std::vector<double> oracle_means(const ExperimentSpec& spec,
                                 std::span<const double> record) {
    if (spec.oracle == OracleKind::Kalman) {
        auto* lg = dynamic_cast<const LinearGaussianAR1*>(spec.model.get());
        if (!lg) throw ConfigError("Kalman oracle requires the linear Gaussian model");
        std::vector<double> means;
        for (const KalmanMoment& m : kalman_filter(*lg, record)) means.push_back(m.mean);
        return means;
    }
    return grid_filter_auto(*spec.model, record, spec.oracle_grid_nodes).means;
}

std::vector<double> MseReport::squared_errors(const std::string& arm, int step) const {
    for (const ArmResult& result : arms) {
        if (result.name != arm) continue;
        std::vector<double> out;
        out.reserve(result.estimates.size());
        for (const std::vector<double>& est : result.estimates) {
            double err = est[static_cast<std::size_t>(step)] -
                         oracle_means[static_cast<std::size_t>(step)];
            out.push_back(err * err);
        }
        return out;
    }
    throw ConfigError("no such arm in report: " + arm);
}

MseReport run_experiment(const ExperimentSpec& spec, const RunOverrides& overrides) {
    MseReport report;
    report.experiment = spec.id;
    report.runs = overrides.runs.value_or(spec.runs);
    report.particles = overrides.particles.value_or(spec.particles);
    report.seed = overrides.seed.value_or(spec.seed);
    if (report.runs < 2) throw ConfigError("experiment: replication count must be >= 2");
    if (report.particles < 2) throw ConfigError("experiment: particle count must be >= 2");

    report.record = spec.record;
    if (overrides.observation_file) {
        report.record = read_observation_csv(*overrides.observation_file);
    }
    report.oracle_means = oracle_means(spec, report.record);
    const int steps = static_cast<int>(report.record.size());
    const std::function<double(double)> projection = [](double x) { return x; };

    int pilot = overrides.pilot_particles.value_or(spec.pilot_particles);
    int first_stage = overrides.first_stage_particles.value_or(spec.first_stage_particles);

    for (const ArmSpec& arm : spec.arms) {
        auto t0 = std::chrono::steady_clock::now();
        FilterConfig config;
        config.variant = arm.variant;
        config.particles = report.particles;
        config.first_stage_particles = first_stage;
        config.proposal = arm.proposal;
        config.strategy = arm.strategy;
        config.pilot_particles =
            arm.strategy == FirstStageKind::OptimalPilot ? pilot : 0;
        if (arm.variant == FilterVariant::Bootstrap) {
            config.proposal = ProposalChoice::Prior;
            config.strategy = FirstStageKind::Uniform;
        }
        config.validate();
        if (config.strategy == FirstStageKind::OptimalPilot && config.pilot_particles < 50) {
            throw ConfigError("experiment arm '" + arm.name + "' needs a pilot size >= 50");
        }

        struct Slot {
            bool ok = false;
            int fallbacks = 0;
            std::vector<double> estimates;
        };
        std::vector<Slot> slots(static_cast<std::size_t>(report.runs));
        parallel_over_replications(report.runs, [&](int rep) {
            RngStream main_rng = RngStream::derive(
                report.seed, static_cast<std::uint64_t>(rep), spec.id + "/" + arm.name);
            Slot& slot = slots[static_cast<std::size_t>(rep)];
            try {
                FilterResult result;
                if (config.strategy == FirstStageKind::OptimalPilot) {
                    RngStream pilot_rng = RngStream::derive(
                        report.seed, static_cast<std::uint64_t>(rep),
                        spec.id + "/" + arm.name + "/pilot");
                    result = run_with_pilot(config, *spec.model, report.record,
                                            projection, main_rng, pilot_rng);
                } else {
                    result = run_filter(config, *spec.model, report.record, projection,
                                        main_rng, &report.oracle_means);
                }
                slot.ok = true;
                slot.fallbacks = static_cast<int>(result.pilot_fallback_steps.size());
                slot.estimates = std::move(result.estimates);
            } catch (const ReplicationDegenerate&) {
                slot.ok = false;
            }
        });

        ArmResult result;
        result.name = arm.name;
        result.mse.assign(static_cast<std::size_t>(steps), 0.0);
        result.stderr_mse.assign(static_cast<std::size_t>(steps), 0.0);
        for (int rep = 0; rep < report.runs; ++rep) {
            Slot& slot = slots[static_cast<std::size_t>(rep)];
            if (!slot.ok) {
                ++result.degenerate;
                continue;
            }
            result.pilot_fallbacks += slot.fallbacks;
            result.estimates.push_back(std::move(slot.estimates));
            result.replication_ids.push_back(rep);
        }
        int completed = static_cast<int>(result.estimates.size());
        if (completed > 0) {
            for (int k = 0; k < steps; ++k) {
                double acc = 0.0, acc2 = 0.0;
                for (const std::vector<double>& est : result.estimates) {
                    double err = est[static_cast<std::size_t>(k)] -
                                 report.oracle_means[static_cast<std::size_t>(k)];
                    double sq = err * err;
                    acc += sq;
                    acc2 += sq * sq;
                }
                double n = static_cast<double>(completed);
                double mse = acc / n;
                result.mse[static_cast<std::size_t>(k)] = mse;
                if (completed > 1) {
                    double var = (acc2 - n * mse * mse) / (n - 1.0);
                    result.stderr_mse[static_cast<std::size_t>(k)] =
                        std::sqrt(std::max(0.0, var) / n);
                }
            }
        }
        result.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.arms.push_back(std::move(result));
    }
    return report;
}

void write_mse_csv(const MseReport& report, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError("cannot write MSE CSV: " + path);
    file << "k,arm,mse,stderr\n";
    char buf[160];
    for (const ArmResult& arm : report.arms) {
        for (std::size_t k = 0; k < arm.mse.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%zu,%s,%.12g,%.12g\n", k, arm.name.c_str(),
                          arm.mse[k], arm.stderr_mse[k]);
            file << buf;
        }
    }
}

std::vector<PlotRow> plot_rows(const MseReport& report) {
    std::vector<PlotRow> rows;
    for (const ArmResult& arm : report.arms) {
        for (std::size_t k = 0; k < arm.mse.size(); ++k) {
            rows.push_back({static_cast<int>(k), arm.name, std::log10(arm.mse[k]),
                            arm.stderr_mse[k]});
        }
    }
    return rows;
}

void write_plot_csv(const MseReport& report, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError("cannot write plot CSV: " + path);
    file << "k,arm,log10_mse,stderr\n";
    char buf[160];
    for (const PlotRow& row : plot_rows(report)) {
        std::snprintf(buf, sizeof(buf), "%d,%s,%.12g,%.12g\n", row.k, row.arm.c_str(),
                      row.log10_mse, row.stderr_mse);
        file << buf;
    }
}

std::vector<PlotRow> read_plot_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ConfigError("cannot read plot CSV: " + path);
    std::string line;
    if (!std::getline(file, line)) throw ConfigError("empty plot CSV: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "k,arm,log10_mse,stderr") {
        throw ConfigError("bad plot CSV header: " + line);
    }
    std::vector<PlotRow> rows;
    while (std::getline(file, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string k_field, arm, mse_field, err_field;
        if (!std::getline(ss, k_field, ',') || !std::getline(ss, arm, ',') ||
            !std::getline(ss, mse_field, ',') || !std::getline(ss, err_field)) {
            throw ConfigError("malformed plot CSV row: " + line);
        }
        PlotRow row;
        row.k = std::stoi(k_field);
        row.arm = arm;
        row.log10_mse = std::stod(mse_field);
        row.stderr_mse = std::stod(err_field);
        rows.push_back(std::move(row));
    }
    return rows;
}

StrategyComparison experiment_variance_tables(const ExperimentSpec& spec,
                                              int grid_nodes) {
    std::vector<StrategyArm> arms;
    for (const ArmSpec& arm : spec.arms) {
        StrategyArm entry;
        entry.label = arm.name;
        if (arm.variant == FilterVariant::Bootstrap) {
            entry.proposal = ProposalChoice::Prior;
            entry.strategy = FirstStageKind::Uniform;
        } else {
            entry.proposal = arm.proposal;
            entry.strategy = arm.strategy;
        }
        arms.push_back(std::move(entry));
    }
    VarianceRecursionEvaluator::Options options;
    options.grid_nodes = grid_nodes;
    return compare_strategies(*spec.model, spec.record, arms, options);
}

}  // namespace apf
