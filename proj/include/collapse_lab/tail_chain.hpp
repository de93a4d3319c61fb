#ifndef COLLAPSE_LAB_TAIL_CHAIN_HPP
#define COLLAPSE_LAB_TAIL_CHAIN_HPP

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "collapse_lab/core.hpp"

// Two forms over [0, ∞):
//   h_α    = Σ_j (1-α_j)Π_{k<j}α_k · U[j, j+1-2α_j]
//   g_β,J  = ½U[0,J] + ½U[J-β, J-β+f(J)]
namespace collapse_lab::tail {

/// Upper limit on -log f(J), in nats.
inline constexpr double kLogFCap = 1e12;

enum class Phi { identity, log, sqrt };

Phi parse_phi(const std::string& name);

struct TailChainFamily {
    SpikeWidthMode mode = SpikeWidthMode::demo;
    double budget_exponent = 1e4;  ///< E
    Phi phi = Phi::identity;
    double psi_constant = 8.0;  ///< C
    double delta = 0.1;
    int min_J = 2;

    static TailChainFamily demo(double budget_exponent, int min_J = 2);
    static TailChainFamily paper(Phi phi, double psi_constant, double delta, int min_J = 2);
    static TailChainFamily from_options(const ConstructionOptions& options);

    /// log f(J) for J >= 2, with -log f saturated at kLogFCap.
    double log_f(int J) const;
    /// True when the cap was applied at J.
    bool saturated(int J) const;
};

enum class Selector { h, g };

struct TailChainParams {
    Selector s = Selector::h;
    std::vector<double> alphas{0.0};  ///< h only; entries past the end are 0
    double beta = 0.0;                ///< g only
    int J = 2;                        ///< g only

    static TailChainParams make_h(std::vector<double> alphas);
    static TailChainParams make_g(double beta, int J);

    bool operator==(const TailChainParams&) const = default;
};

void validate(const TailChainParams& p);

/// Packs into coords [s, β, J, α_0, α_1, ...] with s = 0 for h and 1 for g.
ParamPoint to_point(const TailChainParams& p);
TailChainParams from_point(const ParamPoint& point);

double tail_log_pdf(const TailChainFamily& fam, const TailChainParams& p, double x);

std::vector<double> tail_sample(const TailChainFamily& fam, const TailChainParams& p, RandomStream& stream,
                                std::size_t n);

/// Interval index -> maximal offset M_j. A sample at an integer k >= 1 belongs
/// to interval k-1 with offset 1; a sample at 0 gives M_0 = 0.
using IntervalMaxTable = std::map<std::size_t, double>;

IntervalMaxTable interval_max(std::span<const double> samples);

struct HFit {
    std::vector<double> alphas;
    double log_likelihood = 0.0;
};

struct GFit {
    double beta = 1.0;
    double log_likelihood = 0.0;
    std::size_t spike_count = 0;
};

HFit best_h_fit(std::span<const double> samples);
GFit best_g_fit(const TailChainFamily& fam, std::span<const double> samples, int J);

double tail_log_likelihood(const TailChainFamily& fam, const TailChainParams& p, std::span<const double> samples);

TailChainParams tail_exact_mle(const TailChainFamily& fam, std::span<const double> samples);
TailChainParams tail_exact_mle(const TailChainFamily& fam, const Dataset& dataset);

}  // namespace collapse_lab::tail

#endif  // COLLAPSE_LAB_TAIL_CHAIN_HPP
