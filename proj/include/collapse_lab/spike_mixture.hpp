#ifndef COLLAPSE_LAB_SPIKE_MIXTURE_HPP
#define COLLAPSE_LAB_SPIKE_MIXTURE_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "collapse_lab/core.hpp"

// Four-component uniform mixture on [0,1] ∪ [2,3]:
//   ½U[0,1] + ((1-α)/2)U[0,1-2α] + (α/4)U[2,3] + (α/4)U[μ, μ+f(α)]
// with f(α) = 1/39 for α <= 1/10 and 1/(32·128^(2N) - 1) above.
namespace collapse_lab::spike {

struct SpikeMixtureFamily {
    int N = 1;
    double log_f_small = 0.0;  ///< log of the narrow spike width, never exp'd before use

    explicit SpikeMixtureFamily(int scale = 1);

    /// log f(α).
    double log_f(double alpha) const;
    /// f(α) in linear space; 0 when it underflows.
    double f(double alpha) const;
};

struct SpikeMixtureParams {
    double alpha = 0.0;
    double mu = 2.0;

    bool operator==(const SpikeMixtureParams&) const = default;
};

inline constexpr double kAlphaMax = 0.25;
inline constexpr double kAlphaBreak = 0.1;

bool in_domain(const SpikeMixtureFamily& fam, const SpikeMixtureParams& p);
void validate(const SpikeMixtureFamily& fam, const SpikeMixtureParams& p);

ParamPoint to_point(const SpikeMixtureParams& p);
SpikeMixtureParams from_point(const ParamPoint& point);

double spike_log_pdf(const SpikeMixtureFamily& fam, const SpikeMixtureParams& p, double x);

std::vector<double> spike_sample(const SpikeMixtureFamily& fam, const SpikeMixtureParams& p, RandomStream& stream,
                                 std::size_t n);

/// Σ log p(x_i), accumulated per region so the result is reproducible.
double spike_log_likelihood(const SpikeMixtureFamily& fam, const SpikeMixtureParams& p,
                            std::span<const double> samples);

/// Global likelihood maximiser by enumeration of the α breakpoints; ties go
/// to the smaller α, then the smaller μ.
SpikeMixtureParams spike_exact_mle(const SpikeMixtureFamily& fam, std::span<const double> samples);
SpikeMixtureParams spike_exact_mle(const SpikeMixtureFamily& fam, const Dataset& dataset);

}  // namespace collapse_lab::spike

#endif  // COLLAPSE_LAB_SPIKE_MIXTURE_HPP
