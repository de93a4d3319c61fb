#include "collapse_lab/core.hpp"

#include <array>
#include <cmath>
#include <utility>

namespace collapse_lab {

void require_finite(std::span<const double> values) {
    for (double x : values) {
        if (!std::isfinite(x)) {
            throw InvalidDataset("sample is not finite");
        }
    }
}

Dataset::Dataset(std::size_t per_generation) : n_(per_generation) {
    if (n_ == 0) {
        throw InvalidArgument("samples per generation must be positive");
    }
}

Dataset Dataset::from_values(std::vector<double> values) {
    Dataset out(values.empty() ? 1 : values.size());
    require_finite(values);
    out.values_ = std::move(values);
    return out;
}

std::span<const double> Dataset::generation(std::size_t t) const {
    if (t >= generation_count()) {
        throw InvalidArgument("generation index out of range");
    }
    return std::span<const double>(values_).subspan(t * n_, n_);
}

void Dataset::check_append(std::span<const double> new_samples, std::size_t t) const {
    if (t != generation_count()) {
        throw InvalidDataset("generation " + std::to_string(t) + " appended after generation count " +
                             std::to_string(generation_count()));
    }
    if (new_samples.size() != n_) {
        throw InvalidDataset("expected " + std::to_string(n_) + " samples, got " +
                             std::to_string(new_samples.size()));
    }
    require_finite(new_samples);
}

Dataset Dataset::accumulate(std::span<const double> new_samples, std::size_t t) const& {
    Dataset copy = *this;
    return std::move(copy).accumulate(new_samples, t);
}

Dataset Dataset::accumulate(std::span<const double> new_samples, std::size_t t) && {
    check_append(new_samples, t);
    values_.insert(values_.end(), new_samples.begin(), new_samples.end());
    return std::move(*this);
}

Dataset accumulate(const Dataset& dataset, std::span<const double> new_samples, std::size_t t) {
    return dataset.accumulate(new_samples, t);
}

namespace {

std::mt19937_64 seeded_engine(std::uint64_t master_seed, std::uint64_t replication, std::uint64_t generation) {
    const std::array<std::uint32_t, 6> key{
        static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
        static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(replication >> 32),
        static_cast<std::uint32_t>(generation),  static_cast<std::uint32_t>(generation >> 32),
    };
    std::seed_seq seq(key.begin(), key.end());
    return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t replication, std::uint64_t generation)
    : engine_(seeded_engine(master_seed, replication, generation)) {}

RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t replication, std::uint64_t generation) {
    return RandomStream(master_seed, replication, generation);
}

std::string_view family_name(FamilyId family) {
    switch (family) {
        case FamilyId::gaussian: return "gaussian";
        case FamilyId::exponential: return "exponential";
        case FamilyId::power_beta: return "power_beta";
        case FamilyId::spike_mixture: return "spike_mixture";
        case FamilyId::tail_chain: return "tail_chain";
    }
    return "unknown";
}

std::optional<FamilyId> parse_family(std::string_view name) {
    for (FamilyId f : {FamilyId::gaussian, FamilyId::exponential, FamilyId::power_beta, FamilyId::spike_mixture,
                       FamilyId::tail_chain}) {
        if (family_name(f) == name) {
            return f;
        }
    }
    return std::nullopt;
}

bool is_smooth(FamilyId family) {
    return family == FamilyId::gaussian || family == FamilyId::exponential || family == FamilyId::power_beta;
}

void RunConfig::validate() const {
    if (n == 0) {
        throw InvalidArgument("n must be at least 1");
    }
    if (!(collapse_threshold > 0.0 && collapse_threshold <= 1.0)) {
        throw InvalidArgument("collapse_threshold must lie in (0, 1]");
    }
    if (!is_smooth(family()) && mle_mode == MleMode::numeric) {
        throw InvalidArgument(std::string(family_name(family())) + " supports only the exact MLE");
    }
}

}  // namespace collapse_lab
