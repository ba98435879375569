// apf-lab: experiment harness for the auxiliary-particle-filter benchmarks.
//
//   apf-lab run --experiment <id> [--particles N] [--mn M] [--pilot R]
//               [--runs K] [--seed S] [--out DIR] [--config FILE] [--obs FILE]
//   apf-lab variance --experiment <id> [--out DIR] [--nodes G]
//   apf-lab list
//
// Exit codes: 0 success, 2 configuration error, 3 every replication of some
// arm degenerated.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "apf/errors.hpp"
#include "apf/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDegenerate = 3;

void print_usage(std::ostream& os) {
    os << "usage:\n"
       << "  apf-lab run --experiment <id> [--particles N] [--mn M] [--pilot R]\n"
       << "              [--runs K] [--seed S] [--out DIR] [--config FILE] [--obs FILE]\n"
       << "  apf-lab variance --experiment <id> [--out DIR] [--nodes G]\n"
       << "  apf-lab list\n";
}

// Flat key-value config: `key = value` (or `key value`), '#' comments.
std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw apf::ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string key, eq, value;
        if (!(ss >> key)) continue;
        if (!(ss >> eq)) throw apf::ConfigError("config line missing value: " + line);
        if (eq == "=") {
            if (!(ss >> value)) throw apf::ConfigError("config line missing value: " + line);
        } else {
            value = eq;
        }
        std::string rest;
        if (ss >> rest) throw apf::ConfigError("trailing tokens in config line: " + line);
        out[key] = value;
    }
    return out;
}

long long parse_integer(const std::string& name, const std::string& text) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw apf::ConfigError("bad integer for --" + name + ": " + text);
    }
}

struct Cli {
    std::string command;
    std::map<std::string, std::string> values;
};

Cli parse_cli(int argc, char** argv) {
    Cli cli;
    if (argc < 2) throw apf::ConfigError("missing command");
    cli.command = argv[1];
    static const std::map<std::string, bool> known = {
        {"experiment", true}, {"particles", true}, {"mn", true},   {"pilot", true},
        {"runs", true},       {"seed", true},      {"out", true},  {"config", true},
        {"obs", true},        {"nodes", true},
    };
    for (int i = 2; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg.rfind("--", 0) != 0) throw apf::ConfigError("unexpected argument: " + arg);
        std::string key = arg.substr(2);
        if (known.find(key) == known.end()) throw apf::ConfigError("unknown flag: " + arg);
        if (i + 1 >= argc) throw apf::ConfigError("flag needs a value: " + arg);
        cli.values[key] = argv[++i];
    }
    return cli;
}

int run_command(const Cli& cli) {
    std::map<std::string, std::string> options;
    if (auto it = cli.values.find("config"); it != cli.values.end()) {
        options = read_config_file(it->second);
    }
    for (const auto& [key, value] : cli.values) {
        if (key != "config") options[key] = value;  // CLI overrides the file
    }
    auto it = options.find("experiment");
    if (it == options.end()) throw apf::ConfigError("run: --experiment is required");
    const apf::ExperimentSpec& spec = apf::find_experiment(it->second);

    apf::RunOverrides overrides;
    if (auto o = options.find("particles"); o != options.end()) {
        overrides.particles = static_cast<int>(parse_integer("particles", o->second));
    }
    if (auto o = options.find("mn"); o != options.end()) {
        overrides.first_stage_particles = static_cast<int>(parse_integer("mn", o->second));
    }
    if (auto o = options.find("pilot"); o != options.end()) {
        overrides.pilot_particles = static_cast<int>(parse_integer("pilot", o->second));
    }
    if (auto o = options.find("runs"); o != options.end()) {
        overrides.runs = static_cast<int>(parse_integer("runs", o->second));
    }
    if (auto o = options.find("seed"); o != options.end()) {
        overrides.seed = static_cast<std::uint64_t>(parse_integer("seed", o->second));
    }
    if (auto o = options.find("obs"); o != options.end()) {
        overrides.observation_file = o->second;
    }
    std::string out_dir = ".";
    if (auto o = options.find("out"); o != options.end()) out_dir = o->second;

    apf::MseReport report = apf::run_experiment(spec, overrides);

    std::filesystem::create_directories(out_dir);
    std::string mse_path = out_dir + "/" + spec.id + "_mse.csv";
    std::string plot_path = out_dir + "/" + spec.id + "_plot.csv";
    apf::write_mse_csv(report, mse_path);
    apf::write_plot_csv(report, plot_path);

    std::printf("experiment %s: N=%d runs=%d seed=%llu\n", report.experiment.c_str(),
                report.particles, report.runs,
                static_cast<unsigned long long>(report.seed));
    bool all_degenerate = false;
    std::size_t last = report.oracle_means.size() - 1;
    for (const apf::ArmResult& arm : report.arms) {
        std::printf("  %-16s final-step mse=%.6g degenerate=%d", arm.name.c_str(),
                    arm.mse[last], arm.degenerate);
        if (arm.pilot_fallbacks > 0) std::printf(" pilot-fallbacks=%d", arm.pilot_fallbacks);
        std::printf(" (%.2fs)\n", arm.seconds);
        if (arm.estimates.empty()) all_degenerate = true;
    }
    std::printf("wrote %s\nwrote %s\n", mse_path.c_str(), plot_path.c_str());
    return all_degenerate ? kExitDegenerate : kExitOk;
}

int variance_command(const Cli& cli) {
    auto it = cli.values.find("experiment");
    if (it == cli.values.end()) throw apf::ConfigError("variance: --experiment is required");
    const apf::ExperimentSpec& spec = apf::find_experiment(it->second);
    int nodes = 1024;
    if (auto o = cli.values.find("nodes"); o != cli.values.end()) {
        nodes = static_cast<int>(parse_integer("nodes", o->second));
    }
    std::string out_dir = ".";
    if (auto o = cli.values.find("out"); o != cli.values.end()) out_dir = o->second;

    apf::StrategyComparison comparison = apf::experiment_variance_tables(spec, nodes);
    std::filesystem::create_directories(out_dir);
    std::string path = out_dir + "/" + spec.id + "_variance.csv";
    apf::write_variance_csv(comparison, path);
    std::printf("experiment %s: asymptotic variances over %zu steps\n", spec.id.c_str(),
                comparison.tables.front().sigma2_ssapf.size());
    for (std::size_t a = 0; a < comparison.arms.size(); ++a) {
        std::printf("  %-16s sigma2_ssapf[n]=%.6g\n", comparison.arms[a].label.c_str(),
                    comparison.tables[a].sigma2_ssapf.back());
    }
    std::printf("wrote %s\n", path.c_str());
    return kExitOk;
}

int list_command() {
    for (const apf::ExperimentSpec& spec : apf::builtin_experiments()) {
        std::printf("%-26s %s\n", spec.id.c_str(), spec.description.c_str());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        Cli cli = parse_cli(argc, argv);
        if (cli.command == "run") return run_command(cli);
        if (cli.command == "variance") return variance_command(cli);
        if (cli.command == "list") return list_command();
        if (cli.command == "help" || cli.command == "--help" || cli.command == "-h") {
            print_usage(std::cout);
            return kExitOk;
        }
        throw apf::ConfigError("unknown command: " + cli.command);
    } catch (const apf::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        print_usage(std::cerr);
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
