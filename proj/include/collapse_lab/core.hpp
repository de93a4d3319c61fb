#ifndef COLLAPSE_LAB_CORE_HPP
#define COLLAPSE_LAB_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "collapse_lab/error.hpp"

namespace collapse_lab {

/// Throws InvalidDataset unless every value is finite.
void require_finite(std::span<const double> values);

/// Samples accumulated across generations of the iterative fit.
///
/// Every generation holds exactly `per_generation()` samples and generations
/// are appended in order 0, 1, 2, ...; the sample order is insertion order.
class Dataset {
public:
    explicit Dataset(std::size_t per_generation);

    /// A single generation-0 dataset holding `values` (n = values.size()).
    static Dataset from_values(std::vector<double> values);

    std::size_t per_generation() const { return n_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    /// Number of generations present; the largest generation index is this minus one.
    std::size_t generation_count() const { return n_ == 0 ? 0 : values_.size() / n_; }

    std::span<const double> values() const { return values_; }
    std::span<const double> generation(std::size_t t) const;
    std::size_t generation_of(std::size_t index) const { return index / n_; }

    /// Returns a dataset with `new_samples` appended as generation `t`.
    /// Requires t == generation_count() and new_samples.size() == per_generation().
    Dataset accumulate(std::span<const double> new_samples, std::size_t t) const&;
    Dataset accumulate(std::span<const double> new_samples, std::size_t t) &&;

    bool operator==(const Dataset&) const = default;

private:
    void check_append(std::span<const double> new_samples, std::size_t t) const;

    std::size_t n_;
    std::vector<double> values_;
};

Dataset accumulate(const Dataset& dataset, std::span<const double> new_samples, std::size_t t);

/// Deterministic random stream keyed by (master seed, replication, generation).
///
/// The key is expanded through std::seed_seq into a 64-bit Mersenne twister,
/// both of which are fully specified by the standard, so a key yields the same
/// bit sequence on every conforming platform and regardless of thread timing.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t master_seed, std::uint64_t replication, std::uint64_t generation);

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform on the open interval (0, 1).
    double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t replication, std::uint64_t generation);

enum class FamilyId { gaussian, exponential, power_beta, spike_mixture, tail_chain };

std::string_view family_name(FamilyId family);
std::optional<FamilyId> parse_family(std::string_view name);
bool is_smooth(FamilyId family);

/// A point θ of some family's parameter space. Smooth families and the spike
/// mixture use their natural coordinates; the tail chain packs its
/// variable-length parameters (see tail_chain.hpp).
struct ParamPoint {
    FamilyId family = FamilyId::gaussian;
    std::vector<double> coords;

    bool operator==(const ParamPoint&) const = default;
};

enum class MleMode { exact, numeric };

struct MetricSet {
    bool param_error = true;
    bool tv = true;
    bool kl = true;
};

enum class SpikeWidthMode { demo, paper };

/// Family-construction knobs used by the adversarial constructions.
struct ConstructionOptions {
    int spike_scale = 1;  ///< N of the spike mixture
    SpikeWidthMode width_mode = SpikeWidthMode::demo;
    double budget_exponent = 1e4;  ///< E in demo mode
    std::string phi = "identity";   ///< paper mode growth function
    double psi_constant = 8.0;      ///< C in paper mode
    double delta = 0.1;             ///< δ in paper mode
    int min_J = 2;                  ///< smallest admissible J of the spiked form
};

struct RunConfig {
    ParamPoint theta_star;
    std::size_t n = 1;
    std::size_t T = 0;
    std::uint64_t master_seed = 0;
    MleMode mle_mode = MleMode::exact;
    MetricSet metrics;
    double collapse_threshold = 3.0 / 8.0;
    ConstructionOptions construction;

    FamilyId family() const { return theta_star.family; }
    /// Throws InvalidArgument on n == 0 or a threshold outside (0, 1].
    void validate() const;
};

struct TrajectoryRecord {
    std::size_t t = 0;
    ParamPoint theta;
    double param_error = 0.0;
    std::optional<double> tv;  ///< in [0, 1] when tracked
    std::optional<double> kl;  ///< may be +inf when tracked
    std::size_t dataset_size = 0;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    bool aborted = false;
    std::string failure;
};

}  // namespace collapse_lab

#endif  // COLLAPSE_LAB_CORE_HPP
