#ifndef COLLAPSE_LAB_OPTIMIZER_HPP
#define COLLAPSE_LAB_OPTIMIZER_HPP

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "collapse_lab/core.hpp"

namespace collapse_lab::optimizer {

struct ScalarResult {
    double x = 0.0;
    double value = 0.0;
    double bracket_low = 0.0;   ///< final bracket, width <= tol
    double bracket_high = 0.0;
    std::size_t iterations = 0;
};

/// Golden-section search on [a, b]. The bracket shrinks by the inverse golden
/// ratio each step until its width is <= tol, so the iteration count depends
/// only on (b - a) / tol. Throws InvalidArgument on a >= b or tol <= 0 and
/// Error when f returns a non-finite value.
ScalarResult minimize_scalar(const std::function<double(double)>& f, double a, double b, double tol);

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;  ///< false when max_iter ran out first
};

struct SimplexOptions {
    double tol = 1e-8;
    std::size_t max_iter = 10000;
    double initial_step = 0.1;
    /// Fresh simplices built around the best vertex after convergence; guards
    /// against collapse onto a non-stationary point.
    int restarts = 2;
};

/// Nelder-Mead descent (reflection 1, expansion 2, contraction ½, shrink ½).
/// Terminates when every vertex lies within `tol` of the best one; +inf
/// values are treated as rejected moves. Requires f(x0) finite.
SimplexResult minimize_simplex(const std::function<double(const std::vector<double>&)>& f,
                               std::vector<double> x0, const SimplexOptions& options = {});

inline SimplexResult minimize_simplex(const std::function<double(const std::vector<double>&)>& f,
                                      std::vector<double> x0, double tol, std::size_t max_iter) {
    SimplexOptions options;
    options.tol = tol;
    options.max_iter = max_iter;
    return minimize_simplex(f, std::move(x0), options);
}

/// Per-coordinate box. Positive-constrained coordinates are searched in log
/// space, so their lower bound must be > 0.
struct Bounds {
    std::vector<std::pair<double, double>> limits;
    std::vector<bool> log_scale;
};

Bounds default_bounds(FamilyId family);

struct NumericMleOptions {
    double scalar_tol = 1e-10;  ///< on the transformed coordinate
    SimplexOptions simplex;
};

/// Minimises the mean negative log-likelihood by golden-section search
/// (one parameter) or Nelder-Mead (two parameters) over the transformed box.
ParamPoint numeric_mle(FamilyId family, const Dataset& dataset, const ParamPoint& init, const Bounds& bounds,
                       const NumericMleOptions& options = {});
ParamPoint numeric_mle(FamilyId family, std::span<const double> samples, const ParamPoint& init,
                       const Bounds& bounds, const NumericMleOptions& options = {});

}  // namespace collapse_lab::optimizer

#endif  // COLLAPSE_LAB_OPTIMIZER_HPP
