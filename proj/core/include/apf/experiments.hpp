#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "apf/filter.hpp"
#include "apf/state_space.hpp"
#include "apf/variance_recursion.hpp"

namespace apf {

enum class OracleKind { Kalman, Grid };

struct ArmSpec {
    std::string name;
    FilterVariant variant = FilterVariant::Ssapf;
    ProposalChoice proposal = ProposalChoice::Prior;
    FirstStageKind strategy = FirstStageKind::Uniform;
};

/// A benchmark experiment: a model, a fixed observation record, the filter
/// arms under comparison, and desk-scale defaults. Records are regenerated
/// bit-exactly from (model, seed) where simulated; canonical copies live
/// under data/records/.
struct ExperimentSpec {
    std::string id;
    std::string description;
    std::shared_ptr<const StateSpaceModel> model;
    std::vector<double> record;
    std::vector<ArmSpec> arms;
    int particles = 4000;
    int first_stage_particles = 0;
    int pilot_particles = 0;
    int runs = 200;
    std::uint64_t seed = 0;
    OracleKind oracle = OracleKind::Kalman;
    int oracle_grid_nodes = 4096;
};

const std::vector<ExperimentSpec>& builtin_experiments();
const ExperimentSpec& find_experiment(const std::string& id);

/// Like simulate() but with the initial state pinned to x0.
Trajectory simulate_from_state(const StateSpaceModel& model, double x0, int horizon,
                               RngStream& rng);

struct RunOverrides {
    std::optional<int> particles;
    std::optional<int> first_stage_particles;
    std::optional<int> pilot_particles;
    std::optional<int> runs;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> observation_file;
};

struct ArmResult {
    std::string name;
    std::vector<double> mse;            // per step
    std::vector<double> stderr_mse;     // stderr of the squared errors
    std::vector<std::vector<double>> estimates;  // per completed replication
    std::vector<int> replication_ids;   // replication index per estimates row
    int degenerate = 0;
    int pilot_fallbacks = 0;
    double seconds = 0.0;
};

struct MseReport {
    std::string experiment;
    std::vector<double> record;
    std::vector<double> oracle_means;
    std::vector<ArmResult> arms;
    int runs = 0;
    int particles = 0;
    std::uint64_t seed = 0;

    /// Squared errors at one step for a named arm (one entry per completed
    /// replication, in replication order).
    std::vector<double> squared_errors(const std::string& arm, int step) const;
};

/// Runs every arm over the shared record; replications run in parallel with
/// streams derived from (seed, replication, arm). Degenerate replications
/// are excluded from the MSE and counted separately.
MseReport run_experiment(const ExperimentSpec& spec, const RunOverrides& overrides = {});

/// Oracle filter means for the experiment's record (Kalman or grid).
std::vector<double> oracle_means(const ExperimentSpec& spec,
                                 std::span<const double> record);

/// CSV `k,arm,mse,stderr` (%.12g, LF, UTF-8).
void write_mse_csv(const MseReport& report, const std::string& path);

struct PlotRow {
    int k = 0;
    std::string arm;
    double log10_mse = 0.0;
    double stderr_mse = 0.0;
};

/// Long-format plot data `k,arm,log10_mse,stderr`, one row per (k, arm).
std::vector<PlotRow> plot_rows(const MseReport& report);
void write_plot_csv(const MseReport& report, const std::string& path);
std::vector<PlotRow> read_plot_csv(const std::string& path);

/// Variance-recursion arms matching the experiment's filter arms.
StrategyComparison experiment_variance_tables(const ExperimentSpec& spec,
                                              int grid_nodes = 1024);

}  // namespace apf
