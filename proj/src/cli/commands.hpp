#ifndef COLLAPSE_LAB_CLI_COMMANDS_HPP
#define COLLAPSE_LAB_CLI_COMMANDS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "collapse_lab/core.hpp"

// Each command returns its process exit status: 0 success, 1 runtime or
// check failure, 2 usage or configuration error.
namespace collapse_lab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Worker threads: COLLAPSE_LAB_THREADS if set to a positive integer, else 0
/// (hardware concurrency). Throws ConfigError on a malformed value.
std::size_t thread_count();

struct SimulateOptions {
    std::filesystem::path config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> output_dir;
    std::optional<bool> plot;
};

/// Writes trajectory_n<n>.csv and summary_n<n>.json per sample size, plus
/// mean_error.svg when plotting is on.
int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);

struct SpikeDemoOptions {
    int N = 100;
    std::size_t n = 100;
    std::size_t R = 2000;
    std::uint64_t seed = 1;
    std::optional<std::filesystem::path> output;  ///< JSON report
};

int cmd_collapse_spike(const SpikeDemoOptions& options, std::ostream& out, std::ostream& err);

struct TailDemoOptions {
    std::size_t n = 10;
    std::size_t R = 100;
    std::size_t T_max = 200;
    std::uint64_t seed = 1;
    ConstructionOptions construction;
    std::filesystem::path output_dir = ".";
};

/// Writes collapse_times.csv and survival.csv.
int cmd_collapse_tail(const TailDemoOptions& options, std::ostream& out, std::ostream& err);

struct VerifyOptions {
    bool json = false;
    std::string inject_fault;  ///< "" or "fisher"
    std::uint64_t seed = 1;
    std::size_t audit_samples = 100000;
};

int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err);

struct SweepOptions {
    FamilyId family = FamilyId::power_beta;
    std::vector<double> theta0;
    std::size_t n = 100;
    std::size_t T = 100;
    std::size_t R = 50;
    std::uint64_t seed = 1;
    MleMode mode = MleMode::exact;
    std::size_t bootstrap = 1000;
    std::filesystem::path output = "sweep.csv";
    std::optional<std::filesystem::path> svg;
};

/// Ratio of mean error at t = T to t = 1 for each θ0 of a one-parameter
/// family, with percentile bootstrap intervals over replications.
int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err);

}  // namespace collapse_lab::cli

#endif  // COLLAPSE_LAB_CLI_COMMANDS_HPP
