#ifndef COLLAPSE_LAB_ENGINE_HPP
#define COLLAPSE_LAB_ENGINE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "collapse_lab/core.hpp"

namespace collapse_lab::engine {

/// Throws InvalidParameter / InvalidArgument unless theta is a valid point of
/// its family under the given construction options.
void validate_point(const ParamPoint& theta, const ConstructionOptions& construction);

/// Samples n points from p_theta using the construction options for the
/// adversarial families.
std::vector<double> sample_family(const ParamPoint& theta, const ConstructionOptions& construction,
                                  RandomStream& stream, std::size_t n);

/// Exact or numeric MLE on the pooled dataset; `previous` seeds numeric mode.
ParamPoint fit_family(const RunConfig& config, const Dataset& dataset, const ParamPoint& previous);

/// Euclidean distance in natural coordinates. Tail-chain points compare the
/// selector and the zero-padded α vectors.
double param_distance(const ParamPoint& a, const ParamPoint& b);

/// Iterative refit on accumulating data. Record 0 is θ⋆ itself; records
/// 1..T+1 are the fitted models. A failing fit stops the run and flags it.
Trajectory run_iterative_mle(const RunConfig& config, std::uint64_t replication = 0);

struct IterationStats {
    double mean = 0.0;
    double median = 0.0;
    double std = 0.0;  ///< sample standard deviation, 0 for one value
    std::size_t count = 0;
};

struct ReplicationSummary {
    std::size_t replications = 0;
    std::size_t T = 0;
    /// Indexed by record t = 0..T+1; empty for untracked metrics.
    std::vector<IterationStats> param_error;
    std::vector<IterationStats> tv;
    std::vector<IterationStats> kl;
    /// mean param_error at t = T over mean at t = 1; absent when undefined.
    std::optional<double> ratio_T_over_1;
    /// Per replication in index order; absent for no collapse or a failed run.
    std::vector<std::optional<std::size_t>> collapse_times;
    std::size_t failures = 0;
    std::vector<std::string> failure_messages;
};

/// Trajectories in replication order. parallelism 0 means hardware concurrency.
std::vector<Trajectory> run_replication_set(const RunConfig& config, std::size_t R, std::size_t parallelism);

/// Aggregates completed trajectories; aborted ones are counted and skipped.
/// Throws Error when every replication failed.
ReplicationSummary summarize(const RunConfig& config, const std::vector<Trajectory>& runs);

ReplicationSummary run_replications(const RunConfig& config, std::size_t R, std::size_t parallelism);

/// Smallest t with tv >= threshold. Throws InvalidArgument if tv is untracked.
std::optional<std::size_t> detect_collapse(const Trajectory& trajectory, double threshold);

struct MaxUniformReport {
    std::size_t n = 0;
    double delta = 0.0;
    std::size_t reps = 0;
    double lower = 0.0;  ///< 1 - log(2/δ)/n
    double upper = 0.0;  ///< 1 - δ/(2n)
    double frequency = 0.0;
    double required = 0.0;  ///< 1 - δ - 3 sqrt(δ(1-δ)/reps)
    bool pass = false;
};

MaxUniformReport check_max_uniform(std::size_t n, double delta, std::size_t reps, RandomStream& stream);

struct SpikeExperimentReport {
    int N = 0;
    std::size_t n = 0;
    std::size_t R = 0;
    double close_threshold = 0.0;   ///< log(n)/n
    double far_threshold = 0.0625;  ///< 1/16
    double freq_close_at_1 = 0.0;   ///< TV(θ⋆, θ1) <= log(n)/n
    double freq_far_at_2 = 0.0;     ///< TV(θ⋆, θ2) >= 1/16
    std::size_t upper_hit_runs = 0;       ///< generation 1 put a sample in [2, 3]
    std::size_t upper_hit_collapsed = 0;  ///< of those, α2 > 1/10 and TV2 >= 1/16
    std::vector<double> tv1;
    std::vector<double> tv2;
};

/// Two refits of the spike mixture from θ⋆ = (α = 0, μ = 2).
SpikeExperimentReport spike_collapse_experiment(int N, std::size_t n, std::size_t R, std::uint64_t master_seed,
                                                std::size_t parallelism = 1);

struct TailExperimentReport {
    std::size_t n = 0;
    std::size_t R = 0;
    std::size_t T_max = 0;
    /// First fitted model (t >= 1) with the spiked selector, per replication.
    std::vector<std::optional<std::size_t>> collapse_times;
    std::vector<std::optional<double>> tv_at_collapse;
    std::vector<std::optional<int>> J_at_collapse;
    std::size_t failures = 0;
    /// Median with non-collapsed runs counted as +inf.
    double median_collapse_time = 0.0;
    double collapse_fraction = 0.0;
    /// survival[t] = fraction of replications not collapsed by model t, t = 0..T_max.
    std::vector<double> survival;
};

/// Refits the tail chain from θ⋆ = h_0 (= U[0,1]) for models t = 1..T_max.
TailExperimentReport tail_collapse_experiment(std::size_t n, const ConstructionOptions& construction,
                                              std::size_t R, std::size_t T_max, std::uint64_t master_seed,
                                              std::size_t parallelism = 1);

}  // namespace collapse_lab::engine

#endif  // COLLAPSE_LAB_ENGINE_HPP
