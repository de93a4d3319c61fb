#include "collapse_lab/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/erf.hpp>

namespace collapse_lab::families {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double clamp_unit(double x) { return std::clamp(x, kPowerBetaClampLow, kPowerBetaClampHigh); }

void require_family_size(const ParamPoint& theta, std::size_t k) {
    if (theta.coords.size() != k) {
        throw InvalidParameter(std::string(family_name(theta.family)) + " expects " + std::to_string(k) +
                               " coordinates");
    }
}

// Unclamped density used for quadrature. The power-Beta clamp would remove
// (2^-52)^θ of mass near 0, which is not negligible for small θ.
double density(const ParamPoint& theta, double x) {
    if (theta.family == FamilyId::power_beta) {
        if (!(x > 0.0 && x < 1.0)) {
            return 0.0;
        }
        const double t = theta.coords[0];
        return t * std::pow(x, t - 1.0);
    }
    return std::exp(log_pdf(theta, x));
}

// Points where the two densities cross, i.e. log p0(x) = log p1(x).
std::vector<double> crossing_points(const ParamPoint& a, const ParamPoint& b) {
    std::vector<double> roots;
    switch (a.family) {
        case FamilyId::gaussian: {
            const double m0 = a.coords[0], s0 = a.coords[1], m1 = b.coords[0], s1 = b.coords[1];
            const double qa = 0.5 / (s1 * s1) - 0.5 / (s0 * s0);
            const double qb = -m1 / (s1 * s1) + m0 / (s0 * s0);
            const double qc = 0.5 * m1 * m1 / (s1 * s1) - 0.5 * m0 * m0 / (s0 * s0) + std::log(s1 / s0);
            if (std::abs(qa) < 1e-14 * (0.5 / (s0 * s0))) {
                if (qb != 0.0) {
                    roots.push_back(-qc / qb);
                }
            } else {
                const double disc = qb * qb - 4.0 * qa * qc;
                if (disc >= 0.0) {
                    // Stable form avoids cancellation between -qb and sqrt(disc).
                    const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
                    if (q != 0.0) {
                        roots.push_back(q / qa);
                        roots.push_back(qc / q);
                    } else {
                        roots.push_back(0.0);
                    }
                }
            }
            break;
        }
        case FamilyId::exponential: {
            const double l0 = a.coords[0], l1 = b.coords[0];
            if (l0 != l1) {
                roots.push_back(std::log(l0 / l1) / (l0 - l1));
            }
            break;
        }
        case FamilyId::power_beta: {
            const double t0 = a.coords[0], t1 = b.coords[0];
            if (t0 != t1) {
                roots.push_back(std::exp(std::log(t1 / t0) / (t0 - t1)));
            }
            break;
        }
        default:
            break;
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace

ParamPoint to_point(GaussianParams p) { return {FamilyId::gaussian, {p.mu, p.sigma}}; }
ParamPoint to_point(ExponentialParams p) { return {FamilyId::exponential, {p.lambda}}; }
ParamPoint to_point(PowerBetaParams p) { return {FamilyId::power_beta, {p.theta}}; }

std::size_t dimension(FamilyId family) {
    switch (family) {
        case FamilyId::gaussian: return 2;
        case FamilyId::exponential: return 1;
        case FamilyId::power_beta: return 1;
        default: throw InvalidParameter(std::string(family_name(family)) + " is not a smooth family");
    }
}

bool in_domain(const ParamPoint& theta) {
    if (!is_smooth(theta.family) || theta.coords.size() != dimension(theta.family)) {
        return false;
    }
    for (double c : theta.coords) {
        if (!std::isfinite(c)) {
            return false;
        }
    }
    // The last coordinate is the positive one in every smooth family.
    return theta.coords.back() > 0.0;
}

void validate(const ParamPoint& theta) {
    if (!is_smooth(theta.family)) {
        throw InvalidParameter(std::string(family_name(theta.family)) + " is not a smooth family");
    }
    require_family_size(theta, dimension(theta.family));
    if (!in_domain(theta)) {
        throw InvalidParameter("parameter outside the domain of " + std::string(family_name(theta.family)));
    }
}

double log_pdf(const ParamPoint& theta, double x) {
    validate(theta);
    switch (theta.family) {
        case FamilyId::gaussian: {
            const double z = (x - theta.coords[0]) / theta.coords[1];
            return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(theta.coords[1]) - 0.5 * z * z;
        }
        case FamilyId::exponential: {
            const double lambda = theta.coords[0];
            return x < 0.0 ? kNegInf : std::log(lambda) - lambda * x;
        }
        case FamilyId::power_beta: {
            if (!(x > 0.0 && x < 1.0)) {
                return kNegInf;
            }
            const double t = theta.coords[0];
            return std::log(t) + (t - 1.0) * std::log(clamp_unit(x));
        }
        default:
            break;
    }
    throw InvalidParameter("unsupported family");
}

std::vector<double> sample(const ParamPoint& theta, RandomStream& stream, std::size_t n) {
    validate(theta);
    if (n == 0) {
        throw InvalidArgument("sample count must be positive");
    }
    std::vector<double> out(n);
    switch (theta.family) {
        case FamilyId::gaussian:
            for (double& x : out) {
                const double u = stream.uniform_open();
                x = theta.coords[0] - std::numbers::sqrt2 * theta.coords[1] * boost::math::erfc_inv(2.0 * u);
            }
            break;
        case FamilyId::exponential:
            for (double& x : out) {
                x = -std::log(stream.uniform_open()) / theta.coords[0];
            }
            break;
        case FamilyId::power_beta:
            for (double& x : out) {
                x = std::exp(std::log(stream.uniform_open()) / theta.coords[0]);
                x = std::clamp(x, std::numeric_limits<double>::denorm_min(), std::nextafter(1.0, 0.0));
            }
            break;
        default:
            break;
    }
    return out;
}

SufficientStats sufficient_stats(FamilyId family, std::span<const double> samples) {
    dimension(family);
    if (samples.empty()) {
        throw InvalidDataset("dataset is empty");
    }
    require_finite(samples);
    SufficientStats s;
    s.family = family;
    s.count = samples.size();
    const double count = static_cast<double>(samples.size());
    switch (family) {
        case FamilyId::gaussian: {
            double sum = 0.0;
            for (double x : samples) sum += x;
            s.mean = sum / count;
            double ss = 0.0;
            for (double x : samples) ss += (x - s.mean) * (x - s.mean);
            s.mean_sq_dev = ss / count;
            break;
        }
        case FamilyId::exponential: {
            double sum = 0.0;
            for (double x : samples) {
                if (x < 0.0) {
                    throw InvalidDataset("exponential sample below 0");
                }
                sum += x;
            }
            s.mean = sum / count;
            break;
        }
        case FamilyId::power_beta: {
            double sum = 0.0;
            for (double x : samples) {
                if (!(x > 0.0 && x < 1.0)) {
                    throw InvalidDataset("power_beta sample outside (0, 1)");
                }
                sum += std::log(clamp_unit(x));
            }
            s.mean_log = sum / count;
            break;
        }
        default:
            break;
    }
    return s;
}

double mean_nll(const SufficientStats& stats, const ParamPoint& theta) {
    validate(theta);
    switch (stats.family) {
        case FamilyId::gaussian: {
            const double mu = theta.coords[0], sigma = theta.coords[1];
            const double d = stats.mean - mu;
            return 0.5 * std::log(2.0 * std::numbers::pi) + std::log(sigma) +
                   (stats.mean_sq_dev + d * d) / (2.0 * sigma * sigma);
        }
        case FamilyId::exponential: {
            const double lambda = theta.coords[0];
            return -std::log(lambda) + lambda * stats.mean;
        }
        case FamilyId::power_beta: {
            const double t = theta.coords[0];
            return -std::log(t) - (t - 1.0) * stats.mean_log;
        }
        default:
            break;
    }
    throw InvalidParameter("unsupported family");
}

ParamPoint exact_mle(FamilyId family, std::span<const double> samples) {
    const SufficientStats s = sufficient_stats(family, samples);
    switch (family) {
        case FamilyId::gaussian:
            if (!(s.mean_sq_dev > 0.0)) {
                throw InvalidDataset("degenerate gaussian dataset: zero variance");
            }
            return to_point(GaussianParams{s.mean, std::sqrt(s.mean_sq_dev)});
        case FamilyId::exponential:
            if (!(s.mean > 0.0)) {
                throw InvalidDataset("degenerate exponential dataset: zero mean");
            }
            return to_point(ExponentialParams{1.0 / s.mean});
        case FamilyId::power_beta:
            return to_point(PowerBetaParams{-1.0 / s.mean_log});
        default:
            break;
    }
    throw InvalidParameter("unsupported family");
}

ParamPoint exact_mle(FamilyId family, const Dataset& dataset) { return exact_mle(family, dataset.values()); }

double kl(const ParamPoint& theta0, const ParamPoint& theta1) {
    validate(theta0);
    validate(theta1);
    if (theta0.family != theta1.family) {
        throw InvalidParameter("kl between different families");
    }
    if (theta0 == theta1) {
        return 0.0;
    }
    double value = 0.0;
    switch (theta0.family) {
        case FamilyId::gaussian: {
            const double m0 = theta0.coords[0], s0 = theta0.coords[1];
            const double m1 = theta1.coords[0], s1 = theta1.coords[1];
            value = std::log(s1 / s0) + (s0 * s0 + (m0 - m1) * (m0 - m1)) / (2.0 * s1 * s1) - 0.5;
            break;
        }
        case FamilyId::exponential:
        case FamilyId::power_beta: {
            // Both reduce to log(a0/a1) + a1/a0 - 1.
            const double r = theta1.coords[0] / theta0.coords[0];
            value = r - 1.0 - std::log(r);
            break;
        }
        default:
            break;
    }
    return std::max(value, 0.0);
}

double tv_numeric(const ParamPoint& theta0, const ParamPoint& theta1, double tol) {
    validate(theta0);
    validate(theta1);
    if (theta0.family != theta1.family) {
        throw InvalidParameter("tv between different families");
    }
    if (!(tol > 0.0)) {
        throw InvalidArgument("tolerance must be positive");
    }
    if (theta0 == theta1) {
        return 0.0;
    }
    double lo = 0.0, hi = 1.0;
    switch (theta0.family) {
        case FamilyId::gaussian:
            lo = std::min(theta0.coords[0] - 10.0 * theta0.coords[1], theta1.coords[0] - 10.0 * theta1.coords[1]);
            hi = std::max(theta0.coords[0] + 10.0 * theta0.coords[1], theta1.coords[0] + 10.0 * theta1.coords[1]);
            break;
        case FamilyId::exponential:
            hi = 50.0 / std::min(theta0.coords[0], theta1.coords[0]);
            break;
        default:
            break;
    }
    std::vector<double> cuts{lo};
    for (double r : crossing_points(theta0, theta1)) {
        if (r > lo && r < hi) {
            cuts.push_back(r);
        }
    }
    cuts.push_back(hi);

    auto integrand = [&](double x) { return std::abs(density(theta0, x) - density(theta1, x)); };
    boost::math::quadrature::tanh_sinh<double> integrator;
    double total = 0.0;
    const double piece_tol = tol / static_cast<double>(4 * cuts.size());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] > cuts[i]) {
            total += integrator.integrate(integrand, cuts[i], cuts[i + 1], piece_tol);
        }
    }
    return std::clamp(0.5 * total, 0.0, 1.0);
}

Eigen::MatrixXd fisher_info(const ParamPoint& theta) {
    validate(theta);
    switch (theta.family) {
        case FamilyId::gaussian: {
            const double inv_var = 1.0 / (theta.coords[1] * theta.coords[1]);
            Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
            m(0, 0) = inv_var;
            m(1, 1) = 2.0 * inv_var;
            return m;
        }
        case FamilyId::exponential:
        case FamilyId::power_beta: {
            const double a = theta.coords[0];
            return Eigen::MatrixXd::Constant(1, 1, 1.0 / (a * a));
        }
        default:
            break;
    }
    throw InvalidParameter("unsupported family");
}

Eigen::VectorXd score(const ParamPoint& theta, double x) {
    validate(theta);
    switch (theta.family) {
        case FamilyId::gaussian: {
            const double mu = theta.coords[0], sigma = theta.coords[1];
            const double d = x - mu;
            Eigen::VectorXd g(2);
            g(0) = d / (sigma * sigma);
            g(1) = -1.0 / sigma + d * d / (sigma * sigma * sigma);
            return g;
        }
        case FamilyId::exponential:
            return Eigen::VectorXd::Constant(1, 1.0 / theta.coords[0] - x);
        case FamilyId::power_beta:
            // Score of the unclamped density.
            return Eigen::VectorXd::Constant(1, 1.0 / theta.coords[0] + std::log(x > 0.0 && x < 1.0 ? x : clamp_unit(x)));
        default:
            break;
    }
    throw InvalidParameter("unsupported family");
}

Eigen::MatrixXd log_pdf_hessian(const ParamPoint& theta, double x) {
    validate(theta);
    switch (theta.family) {
        case FamilyId::gaussian: {
            const double mu = theta.coords[0], sigma = theta.coords[1];
            const double d = x - mu;
            const double s2 = sigma * sigma;
            Eigen::MatrixXd h(2, 2);
            h(0, 0) = -1.0 / s2;
            h(0, 1) = h(1, 0) = -2.0 * d / (s2 * sigma);
            h(1, 1) = 1.0 / s2 - 3.0 * d * d / (s2 * s2);
            return h;
        }
        case FamilyId::exponential:
        case FamilyId::power_beta: {
            const double a = theta.coords[0];
            return Eigen::MatrixXd::Constant(1, 1, -1.0 / (a * a));
        }
        default:
            break;
    }
    throw InvalidParameter("unsupported family");
}

namespace {

// Welford accumulation of the mean and standard error of vector-valued draws.
struct MomentAccumulator {
    explicit MomentAccumulator(std::size_t k) : mean(k, 0.0), m2(k, 0.0) {}

    void add(const double* v) {
        ++count;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const double d = v[i] - mean[i];
            mean[i] += d / static_cast<double>(count);
            m2[i] += d * (v[i] - mean[i]);
        }
    }

    std::vector<double> standard_error() const {
        std::vector<double> se(mean.size());
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const double var = m2[i] / static_cast<double>(count - 1);
            se[i] = std::sqrt(var / static_cast<double>(count));
        }
        return se;
    }

    std::size_t count = 0;
    std::vector<double> mean;
    std::vector<double> m2;
};

void require_audit_size(std::size_t m) {
    if (m < 1000) {
        throw InvalidArgument("audits need at least 1000 draws");
    }
}

// Constant per-draw quantities have zero standard error; allow summation round-off.
bool within_band(double gap, double se, double reference) {
    const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(reference));
    return std::abs(gap) <= 4.0 * se + roundoff;
}

}  // namespace

AuditReport audit_score_mean(const ParamPoint& theta, std::size_t m, RandomStream& stream) {
    validate(theta);
    require_audit_size(m);
    const std::size_t k = dimension(theta.family);
    MomentAccumulator acc(k);
    for (double x : sample(theta, stream, m)) {
        const Eigen::VectorXd g = score(theta, x);
        acc.add(g.data());
    }
    AuditReport report;
    report.check = "score_mean";
    report.estimate = acc.mean;
    report.standard_error = acc.standard_error();
    report.reference.assign(k, 0.0);
    report.pass = true;
    for (std::size_t i = 0; i < k; ++i) {
        report.pass = report.pass && within_band(report.estimate[i], report.standard_error[i], 0.0);
    }
    return report;
}

AuditReport audit_fisher_hessian(const ParamPoint& theta, std::size_t m, RandomStream& stream) {
    return audit_fisher_hessian(theta, fisher_info(theta), m, stream);
}

AuditReport audit_fisher_hessian(const ParamPoint& theta, const Eigen::MatrixXd& reference, std::size_t m,
                                 RandomStream& stream) {
    validate(theta);
    require_audit_size(m);
    const auto k = static_cast<Eigen::Index>(dimension(theta.family));
    if (reference.rows() != k || reference.cols() != k) {
        throw InvalidArgument("reference matrix has the wrong shape");
    }
    MomentAccumulator acc(static_cast<std::size_t>(k * k));
    std::vector<double> flat(static_cast<std::size_t>(k * k));
    for (double x : sample(theta, stream, m)) {
        const Eigen::MatrixXd h = log_pdf_hessian(theta, x);
        for (Eigen::Index r = 0; r < k; ++r) {
            for (Eigen::Index c = 0; c < k; ++c) {
                flat[static_cast<std::size_t>(r * k + c)] = -h(r, c);
            }
        }
        acc.add(flat.data());
    }
    AuditReport report;
    report.check = "fisher_hessian";
    report.estimate = acc.mean;
    report.standard_error = acc.standard_error();
    report.pass = true;
    for (Eigen::Index r = 0; r < k; ++r) {
        for (Eigen::Index c = 0; c < k; ++c) {
            const auto i = static_cast<std::size_t>(r * k + c);
            report.reference.push_back(reference(r, c));
            report.pass = report.pass &&
                          within_band(report.estimate[i] - reference(r, c), report.standard_error[i], reference(r, c));
        }
    }
    return report;
}

}  // namespace collapse_lab::families
