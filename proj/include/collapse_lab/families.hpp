#ifndef COLLAPSE_LAB_FAMILIES_HPP
#define COLLAPSE_LAB_FAMILIES_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "collapse_lab/core.hpp"

// Smooth one-dimensional benchmark families:
//   gaussian     θ = (μ, σ),  σ > 0
//   exponential  θ = (λ),     λ > 0, support [0, ∞)
//   power_beta   θ = (θ),     θ > 0, p(x) = θ x^(θ-1) on (0, 1)
namespace collapse_lab::families {

struct GaussianParams {
    double mu = 0.0;
    double sigma = 1.0;
};

struct ExponentialParams {
    double lambda = 1.0;
};

struct PowerBetaParams {
    double theta = 1.0;
};

ParamPoint to_point(GaussianParams p);
ParamPoint to_point(ExponentialParams p);
ParamPoint to_point(PowerBetaParams p);

/// Parameter count of a smooth family.
std::size_t dimension(FamilyId family);

bool in_domain(const ParamPoint& theta);
/// Throws InvalidParameter if `theta` is not a valid point of a smooth family.
void validate(const ParamPoint& theta);

/// Power-Beta densities are evaluated with x clamped to [2^-52, 1 - 2^-52].
inline constexpr double kPowerBetaClampLow = 0x1.0p-52;
inline constexpr double kPowerBetaClampHigh = 1.0 - 0x1.0p-52;

/// Natural-log density; -inf exactly when x is outside the support.
double log_pdf(const ParamPoint& theta, double x);

std::vector<double> sample(const ParamPoint& theta, RandomStream& stream, std::size_t n);

/// Closed-form global maximiser of the log-likelihood. The Gaussian scale is
/// the 1/N (biased) deviation, which is the actual likelihood maximiser.
ParamPoint exact_mle(FamilyId family, std::span<const double> samples);
ParamPoint exact_mle(FamilyId family, const Dataset& dataset);

/// KL(p_theta0 || p_theta1), closed form.
double kl(const ParamPoint& theta0, const ParamPoint& theta1);

/// ½∫|p_theta0 - p_theta1| by tanh-sinh quadrature, split at the density
/// crossing points. Integration ranges: μ ± 10σ (union over both Gaussians),
/// [0, 50/λ_min] for exponentials, (0, 1) for power-Beta.
double tv_numeric(const ParamPoint& theta0, const ParamPoint& theta1, double tol = 1e-6);

/// Closed-form Fisher information matrix.
Eigen::MatrixXd fisher_info(const ParamPoint& theta);

/// ∇_θ log p_θ(x).
Eigen::VectorXd score(const ParamPoint& theta, double x);

/// ∇²_θ log p_θ(x).
Eigen::MatrixXd log_pdf_hessian(const ParamPoint& theta, double x);

/// Reduction of a sample set that determines the log-likelihood of its family.
struct SufficientStats {
    FamilyId family = FamilyId::gaussian;
    std::size_t count = 0;
    double mean = 0.0;         ///< gaussian, exponential
    double mean_sq_dev = 0.0;  ///< gaussian, about `mean`
    double mean_log = 0.0;     ///< power_beta, of clamped samples
};

/// Throws InvalidDataset for empty input or samples off the support.
SufficientStats sufficient_stats(FamilyId family, std::span<const double> samples);

/// -(1/N) Σ log p_θ(x_i) evaluated from the sufficient statistics.
double mean_nll(const SufficientStats& stats, const ParamPoint& theta);

/// Monte-Carlo check of an analytic identity. Entries are flattened row-major
/// for matrix-valued checks.
struct AuditReport {
    std::string check;
    std::vector<double> estimate;
    std::vector<double> standard_error;
    std::vector<double> reference;
    bool pass = false;
};

/// E[∇ log p] = 0: passes iff every |estimate| <= 4 standard errors.
AuditReport audit_score_mean(const ParamPoint& theta, std::size_t m, RandomStream& stream);

/// -E[∇² log p] = I(θ): passes iff every entrywise gap <= 4 standard errors.
AuditReport audit_fisher_hessian(const ParamPoint& theta, std::size_t m, RandomStream& stream);

/// As above but against a caller-supplied reference matrix.
AuditReport audit_fisher_hessian(const ParamPoint& theta, const Eigen::MatrixXd& reference, std::size_t m,
                                 RandomStream& stream);

}  // namespace collapse_lab::families

#endif  // COLLAPSE_LAB_FAMILIES_HPP
