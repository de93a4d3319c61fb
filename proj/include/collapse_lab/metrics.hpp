#ifndef COLLAPSE_LAB_METRICS_HPP
#define COLLAPSE_LAB_METRICS_HPP

#include <vector>

#include "collapse_lab/core.hpp"
#include "collapse_lab/spike_mixture.hpp"
#include "collapse_lab/tail_chain.hpp"

namespace collapse_lab::metrics {

/// A uniform piece [left, left + width] carrying `mass`. Widths too small to
/// represent (or to move `left`) make the segment an atom at `left`; log_width
/// keeps its true size.
struct Segment {
    double left = 0.0;
    double width = 0.0;
    double log_width = 0.0;
    double mass = 0.0;

    bool is_atom() const;
    double right() const { return left + width; }
};

/// Sorted, disjoint (up to shared endpoints) continuous segments plus atoms.
struct PiecewiseDensity {
    std::vector<Segment> segments;

    double total_mass() const;
    /// Height of the continuous part at x; the larger side at a shared endpoint.
    double continuous_height(double x) const;
};

/// Merges possibly overlapping uniform components into a PiecewiseDensity.
/// Zero-mass components are dropped.
PiecewiseDensity merge_components(std::vector<Segment> components);

/// Builds a uniform component, with log_width given explicitly.
Segment uniform_component(double left, double width, double log_width, double mass);
Segment uniform_component(double left, double width, double mass);

PiecewiseDensity to_piecewise(const spike::SpikeMixtureFamily& fam, const spike::SpikeMixtureParams& p);
PiecewiseDensity to_piecewise(const tail::TailChainFamily& fam, const tail::TailChainParams& p);

/// ½∫|p - q|, clamped to [0, 1]. Throws InvalidArgument on unnormalised input.
double tv_exact(const PiecewiseDensity& p, const PiecewiseDensity& q);

/// KL(p || q); +inf when p has mass where q has none.
double kl_piecewise(const PiecewiseDensity& p, const PiecewiseDensity& q);

/// TV <= sqrt(KL/2) + slack; true when KL is infinite.
bool pinsker_holds(const PiecewiseDensity& p, const PiecewiseDensity& q, double slack);

/// TV and KL(a || b) for two points of one family: closed form or quadrature
/// for smooth families, exact piecewise evaluation for the constructions.
double tv_distance(const ParamPoint& a, const ParamPoint& b, const ConstructionOptions& construction = {});
double kl_divergence(const ParamPoint& a, const ParamPoint& b, const ConstructionOptions& construction = {});

}  // namespace collapse_lab::metrics

#endif  // COLLAPSE_LAB_METRICS_HPP
