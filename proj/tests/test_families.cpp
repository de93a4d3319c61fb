#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "collapse_lab/families.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace collapse_lab;
using namespace collapse_lab::families;

namespace {

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Densities written out by hand, independent of log_pdf.
double gauss_pdf(double mu, double sigma, double x) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}
double exp_pdf(double lambda, double x) { return x < 0 ? 0.0 : lambda * std::exp(-lambda * x); }
double pb_pdf(double theta, double x) { return (x <= 0 || x >= 1) ? 0.0 : theta * std::pow(x, theta - 1.0); }

}  // namespace

TEST_CASE("log_pdf reference values") {
    CHECK(log_pdf(to_point(GaussianParams{0, 1}), 0.0) == doctest::Approx(-0.9189385332).epsilon(1e-10));
    CHECK(log_pdf(to_point(ExponentialParams{1}), 0.7) == doctest::Approx(-0.7).epsilon(1e-14));
    CHECK(log_pdf(to_point(PowerBetaParams{2}), 0.5) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(log_pdf(to_point(ExponentialParams{1}), -0.1) == -INFINITY);
    CHECK(log_pdf(to_point(PowerBetaParams{2}), 1.5) == -INFINITY);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(validate(to_point(GaussianParams{0, 0})), InvalidParameter);
    CHECK_THROWS_AS(validate(to_point(ExponentialParams{-1})), InvalidParameter);
    CHECK_THROWS_AS(validate(to_point(PowerBetaParams{NAN})), InvalidParameter);
    CHECK_THROWS_AS(validate(ParamPoint{FamilyId::gaussian, {1.0}}), InvalidParameter);
    CHECK_NOTHROW(validate(to_point(GaussianParams{-3, 2})));
}

TEST_CASE("sampler moments") {
    RandomStream r(11, 0, 0);
    const auto g = sample(to_point(GaussianParams{0, 1}), r, 100000);
    CHECK(std::abs(mean(g)) < 4.0 / std::sqrt(1e5));
    const auto e = sample(to_point(ExponentialParams{1}), r, 100000);
    CHECK(std::abs(mean(e) - 1.0) < 4.0 / std::sqrt(1e5));
}

TEST_CASE("PowerBeta(1) draws are uniform by Kolmogorov-Smirnov") {
    RandomStream r(12, 0, 0);
    auto xs = sample(to_point(PowerBetaParams{1}), r, 100000);
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        d = std::max({d, (static_cast<double>(i) + 1) / n - xs[i], xs[i] - static_cast<double>(i) / n});
    }
    CHECK(d < 0.01);
}

TEST_CASE("power-beta draws stay inside the support") {
    RandomStream r(13, 0, 0);
    for (double theta : {0.05, 0.5, 5.0}) {
        for (double x : sample(to_point(PowerBetaParams{theta}), r, 20000)) {
            CHECK(x >= 0.0);
            CHECK(x <= 1.0);
            CHECK(std::isfinite(log_pdf(to_point(PowerBetaParams{theta}), x)));
        }
    }
}

TEST_CASE("exact MLE reference values") {
    const auto g = exact_mle(FamilyId::gaussian, std::vector<double>{-1.0, 1.0});
    CHECK(g.coords[0] == doctest::Approx(0.0));
    CHECK(g.coords[1] == doctest::Approx(1.0));
    CHECK(exact_mle(FamilyId::exponential, std::vector<double>{2.0}).coords[0] == doctest::Approx(0.5));
    CHECK(exact_mle(FamilyId::power_beta, std::vector<double>{std::exp(-1.0)}).coords[0] == doctest::Approx(1.0));
    CHECK_THROWS_AS(exact_mle(FamilyId::exponential, std::vector<double>{}), InvalidDataset);
    CHECK_THROWS_AS(exact_mle(FamilyId::exponential, std::vector<double>{-1.0}), InvalidDataset);
    CHECK_THROWS_AS(exact_mle(FamilyId::gaussian, std::vector<double>{3.0, 3.0}), InvalidDataset);
}

TEST_CASE("exact MLE is a local maximum of the likelihood") {
    RandomStream r(14, 0, 0);
    for (const ParamPoint& star : {to_point(GaussianParams{1, 2}), to_point(ExponentialParams{3}),
                                   to_point(PowerBetaParams{0.7})}) {
        const auto xs = sample(star, r, 200);
        const ParamPoint hat = exact_mle(star.family, xs);
        auto ll = [&](const ParamPoint& p) {
            double s = 0.0;
            for (double x : xs) s += log_pdf(p, x);
            return s;
        };
        const double at = ll(hat);
        for (std::size_t i = 0; i < hat.coords.size(); ++i) {
            for (double step : {-1e-3, 1e-3}) {
                ParamPoint q = hat;
                q.coords[i] *= 1.0 + step;
                CHECK(ll(q) <= at);
            }
        }
    }
}

TEST_CASE("KL matches quadrature") {
    CHECK(kl(to_point(GaussianParams{0, 1}), to_point(GaussianParams{0, 1})) == doctest::Approx(0.0));
    const double ref = 1.0 - std::log(2.0);
    const double q_exp = oracle::simpson(
        [](double x) { return exp_pdf(1, x) * std::log(exp_pdf(1, x) / exp_pdf(2, x)); }, 0.0, 60.0, 1e-12);
    const double q_pb = oracle::simpson(
        [](double x) { return pb_pdf(1, x) * std::log(pb_pdf(1, x) / pb_pdf(2, x)); }, 1e-15, 1.0 - 1e-15, 1e-12);
    CHECK(q_exp == doctest::Approx(ref).epsilon(1e-8));
    CHECK(q_pb == doctest::Approx(ref).epsilon(1e-6));
    CHECK(kl(to_point(ExponentialParams{1}), to_point(ExponentialParams{2})) == doctest::Approx(q_exp).epsilon(1e-8));
    CHECK(kl(to_point(PowerBetaParams{1}), to_point(PowerBetaParams{2})) == doctest::Approx(q_pb).epsilon(1e-6));

    const double q_gauss = oracle::simpson(
        [](double x) { return gauss_pdf(0.3, 0.8, x) * std::log(gauss_pdf(0.3, 0.8, x) / gauss_pdf(-1, 1.7, x)); },
        -15.0, 15.0, 1e-12);
    CHECK(kl(to_point(GaussianParams{0.3, 0.8}), to_point(GaussianParams{-1, 1.7})) ==
          doctest::Approx(q_gauss).epsilon(1e-8));
}

TEST_CASE("numeric TV matches midpoint quadrature and Pinsker") {
    CHECK(tv_numeric(to_point(GaussianParams{0, 1}), to_point(GaussianParams{0, 1})) == doctest::Approx(0.0));
    CHECK(tv_numeric(to_point(GaussianParams{0, 1}), to_point(GaussianParams{10, 1})) >= 0.999);

    struct Pair {
        ParamPoint a, b;
        std::function<double(double)> gap;
        double lo, hi;
    };
    const std::vector<Pair> pairs{
        {to_point(GaussianParams{0, 1}), to_point(GaussianParams{0.5, 1.5}),
         [](double x) { return std::abs(gauss_pdf(0, 1, x) - gauss_pdf(0.5, 1.5, x)); }, -20.0, 20.0},
        {to_point(ExponentialParams{1}), to_point(ExponentialParams{2.5}),
         [](double x) { return std::abs(exp_pdf(1, x) - exp_pdf(2.5, x)); }, 0.0, 60.0},
        {to_point(PowerBetaParams{3}), to_point(PowerBetaParams{1.5}),
         [](double x) { return std::abs(pb_pdf(3, x) - pb_pdf(1.5, x)); }, 0.0, 1.0},
    };
    for (const auto& p : pairs) {
        const double ref = 0.5 * oracle::midpoint(p.gap, p.lo, p.hi, 1000000);
        const double tv = tv_numeric(p.a, p.b);
        CHECK(tv == doctest::Approx(ref).epsilon(1e-5));
        CHECK(tv == doctest::Approx(tv_numeric(p.b, p.a)).epsilon(1e-9));
        CHECK(tv <= std::sqrt(kl(p.a, p.b) / 2.0) + 1e-9);
    }
}

TEST_CASE("Fisher information reference values and quadrature") {
    CHECK(fisher_info(to_point(ExponentialParams{1}))(0, 0) == doctest::Approx(1.0));
    CHECK(fisher_info(to_point(PowerBetaParams{2}))(0, 0) == doctest::Approx(0.25));
    const auto g = fisher_info(to_point(GaussianParams{0, 1}));
    CHECK(g(0, 0) == doctest::Approx(1.0));
    CHECK(g(1, 1) == doctest::Approx(2.0));
    CHECK(g(0, 1) == doctest::Approx(0.0));

    // E[(∂θ log p)²] for power-Beta with ∂θ log p = 1/θ + log x.
    const double theta = 2.0;
    const double q = oracle::simpson(
        [&](double x) { return pb_pdf(theta, x) * std::pow(1.0 / theta + std::log(x), 2); }, 1e-15, 1.0 - 1e-15, 1e-12);
    CHECK(q == doctest::Approx(0.25).epsilon(1e-7));
}

TEST_CASE("score agrees with finite differences of log_pdf") {
    const std::vector<ParamPoint> points{to_point(GaussianParams{0.2, 1.3}), to_point(ExponentialParams{2.0}),
                                         to_point(PowerBetaParams{0.6})};
    for (const ParamPoint& theta : points) {
        for (double x = 0.01; x <= 0.99; x += 0.07) {
            const auto s = score(theta, x);
            const auto h = log_pdf_hessian(theta, x);
            for (std::size_t i = 0; i < theta.coords.size(); ++i) {
                auto along = [&](std::size_t k) {
                    return [&, k](double v) {
                        ParamPoint p = theta;
                        p.coords[k] = v;
                        return log_pdf(p, x);
                    };
                };
                const double fd = oracle::derivative(along(i), theta.coords[i]);
                CHECK(s(static_cast<Eigen::Index>(i)) == doctest::Approx(fd).epsilon(1e-6));
                auto score_i = [&](double v) {
                    ParamPoint p = theta;
                    p.coords[i] = v;
                    return score(p, x)(static_cast<Eigen::Index>(i));
                };
                CHECK(h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) ==
                      doctest::Approx(oracle::derivative(score_i, theta.coords[i])).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("score and Fisher audits pass on the reference points") {
    RandomStream r(15, 0, 0);
    CHECK(audit_score_mean(to_point(GaussianParams{0, 1}), 100000, r).pass);
    CHECK(audit_score_mean(to_point(ExponentialParams{2}), 100000, r).pass);
    CHECK(audit_score_mean(to_point(PowerBetaParams{0.5}), 100000, r).pass);

    const auto e = audit_fisher_hessian(to_point(ExponentialParams{1}), 100000, r);
    CHECK(e.pass);
    CHECK(e.estimate[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(audit_fisher_hessian(to_point(GaussianParams{0, 1}), 100000, r).pass);
    const auto pb = audit_fisher_hessian(to_point(PowerBetaParams{1}), 100000, r);
    CHECK(pb.pass);
    CHECK(pb.estimate[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("audit catches a wrong Fisher reference") {
    RandomStream r(16, 0, 0);
    Eigen::MatrixXd wrong = fisher_info(to_point(GaussianParams{0, 1}));
    wrong(1, 1) = 1.0;
    CHECK_FALSE(audit_fisher_hessian(to_point(GaussianParams{0, 1}), wrong, 100000, r).pass);
}

TEST_CASE("mean_nll from sufficient statistics equals the direct sum") {
    RandomStream r(17, 0, 0);
    for (const ParamPoint& star : {to_point(GaussianParams{1, 2}), to_point(ExponentialParams{3}),
                                   to_point(PowerBetaParams{0.7})}) {
        const auto xs = sample(star, r, 300);
        const auto stats = sufficient_stats(star.family, xs);
        ParamPoint probe = star;
        for (double& c : probe.coords) c *= 1.1;
        double direct = 0.0;
        for (double x : xs) direct -= log_pdf(probe, x);
        CHECK(mean_nll(stats, probe) == doctest::Approx(direct / 300.0).epsilon(1e-10));
    }
}
