#include <algorithm>
#include <cmath>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "collapse_lab/engine.hpp"
#include "collapse_lab/families.hpp"
#include "collapse_lab/metrics.hpp"
#include "collapse_lab/optimizer.hpp"
#include "collapse_lab/spike_mixture.hpp"
#include "collapse_lab/tail_chain.hpp"
#include "json.hpp"

namespace collapse_lab::cli {

namespace {

using nlohmann::json;

struct Check {
    std::string name;
    bool pass = true;
    json stats = json::object();
};

std::vector<ParamPoint> audit_points() {
    using namespace families;
    return {to_point(GaussianParams{0.0, 1.0}),   to_point(GaussianParams{-2.0, 0.5}),
            to_point(GaussianParams{3.0, 2.0}),   to_point(GaussianParams{10.0, 0.1}),
            to_point(GaussianParams{-0.5, 5.0}),  to_point(ExponentialParams{1.0}),
            to_point(ExponentialParams{0.2}),     to_point(ExponentialParams{3.0}),
            to_point(ExponentialParams{10.0}),    to_point(ExponentialParams{0.05}),
            to_point(PowerBetaParams{1.0}),       to_point(PowerBetaParams{0.1}),
            to_point(PowerBetaParams{0.5}),       to_point(PowerBetaParams{2.0}),
            to_point(PowerBetaParams{5.0})};
}

// A deliberately wrong information matrix: drops the factor 2 of the Gaussian
// scale entry and the square in the one-parameter families.
Eigen::MatrixXd wrong_fisher(const ParamPoint& theta) {
    Eigen::MatrixXd m = families::fisher_info(theta);
    if (theta.family == FamilyId::gaussian) {
        m(1, 1) /= 2.0;
    } else {
        m(0, 0) *= theta.coords[0];
    }
    return m;
}

Check audit_checks(const VerifyOptions& o, bool fisher, RandomStream& rng) {
    Check c{fisher ? "fisher_hessian" : "score_mean"};
    json rows = json::array();
    for (const ParamPoint& theta : audit_points()) {
        families::AuditReport r;
        if (!fisher) {
            r = families::audit_score_mean(theta, o.audit_samples, rng);
        } else if (o.inject_fault == "fisher") {
            r = families::audit_fisher_hessian(theta, wrong_fisher(theta), o.audit_samples, rng);
        } else {
            r = families::audit_fisher_hessian(theta, o.audit_samples, rng);
        }
        c.pass = c.pass && r.pass;
        rows.push_back({{"family", family_name(theta.family)},
                        {"theta", theta.coords},
                        {"estimate", r.estimate},
                        {"standard_error", r.standard_error},
                        {"reference", r.reference},
                        {"pass", r.pass}});
    }
    c.stats["points"] = rows;
    return c;
}

Check pinsker_check(RandomStream& rng) {
    Check c{"pinsker"};
    std::size_t bad = 0, infinite = 0, mass_bad = 0;
    double worst_gap = -INFINITY;
    auto record = [&](double tv, double kl) {
        if (std::isinf(kl)) {
            ++infinite;
            return;
        }
        const double gap = tv - std::sqrt(std::max(kl, 0.0) / 2.0);
        worst_gap = std::max(worst_gap, gap);
        if (gap > 1e-9) ++bad;
    };
    for (int i = 0; i < 100; ++i) {
        metrics::PiecewiseDensity p, q;
        if (i % 2 == 0) {
            const spike::SpikeMixtureFamily fam(1 + static_cast<int>(rng() % 100));
            auto draw = [&] {
                const double a = 0.25 * rng.uniform();
                return metrics::to_piecewise(fam, {a, 2.0 + (1.0 - fam.f(a)) * rng.uniform()});
            };
            p = draw();
            q = draw();
        } else {
            const auto fam = tail::TailChainFamily::demo(1.0 + 50.0 * rng.uniform());
            auto draw = [&] {
                std::vector<double> al;
                for (std::size_t j = 0, len = 1 + rng() % 4; j < len; ++j) al.push_back(0.25 * rng.uniform());
                return metrics::to_piecewise(fam, tail::TailChainParams::make_h(al));
            };
            p = draw();
            q = draw();
        }
        for (const auto* d : {&p, &q}) {
            if (std::abs(d->total_mass() - 1.0) > 1e-12) ++mass_bad;
        }
        record(metrics::tv_exact(p, q), metrics::kl_piecewise(p, q));
    }
    for (int i = 0; i < 99; ++i) {
        using namespace families;
        ParamPoint a, b;
        if (i % 3 == 0) {
            a = to_point(GaussianParams{rng.uniform() * 2 - 1, 0.3 + 2 * rng.uniform()});
            b = to_point(GaussianParams{rng.uniform() * 2 - 1, 0.3 + 2 * rng.uniform()});
        } else if (i % 3 == 1) {
            a = to_point(ExponentialParams{0.2 + 3 * rng.uniform()});
            b = to_point(ExponentialParams{0.2 + 3 * rng.uniform()});
        } else {
            a = to_point(PowerBetaParams{0.2 + 3 * rng.uniform()});
            b = to_point(PowerBetaParams{0.2 + 3 * rng.uniform()});
        }
        record(tv_numeric(a, b), kl(a, b));
    }
    c.pass = bad == 0 && mass_bad == 0;
    c.stats = {{"pairs", 199},
               {"violations", bad},
               {"infinite_kl", infinite},
               {"unnormalised", mass_bad},
               {"worst_gap", std::isfinite(worst_gap) ? json(worst_gap) : json(nullptr)}};
    return c;
}

Check max_uniform_check(RandomStream& rng) {
    Check c{"max_uniform"};
    json rows = json::array();
    for (auto [n, delta] : std::vector<std::pair<std::size_t, double>>{{10, 0.2}, {100, 0.1}, {1000, 0.05}}) {
        const auto r = engine::check_max_uniform(n, delta, 10000, rng);
        c.pass = c.pass && r.pass;
        rows.push_back({{"n", n}, {"delta", delta}, {"frequency", r.frequency}, {"required", r.required},
                        {"pass", r.pass}});
    }
    c.stats["settings"] = rows;
    return c;
}

// Exhaustive search over the α breakpoints × sample-anchored μ placements.
spike::SpikeMixtureParams spike_grid_argmax(const spike::SpikeMixtureFamily& fam, const std::vector<double>& xs,
                                            double& best_ll) {
    std::vector<double> alphas{0.0, 0.1, 0.25};
    for (double x : xs) {
        if (x >= 0.5 && x <= 1.0) alphas.push_back((1.0 - x) / 2.0);
    }
    std::sort(alphas.begin(), alphas.end());
    spike::SpikeMixtureParams best;
    best_ll = -INFINITY;
    bool first = true;
    for (double a : alphas) {
        std::vector<double> mus{2.0};
        for (double x : xs) {
            if (x >= 2.0) mus.push_back(std::min(x, 3.0 - fam.f(a)));
        }
        std::sort(mus.begin(), mus.end());
        for (double mu : mus) {
            double ll = 0.0;
            for (double x : xs) ll += spike::spike_log_pdf(fam, {a, mu}, x);
            if (first || ll > best_ll) {
                best = {a, mu};
                best_ll = ll;
                first = false;
            }
        }
    }
    return best;
}

Check mle_oracle_check(RandomStream& rng) {
    Check c{"mle_oracle"};
    std::size_t spike_bad = 0, h_bad = 0, smooth_bad = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const spike::SpikeMixtureFamily fam(trial % 2 == 0 ? 1 : 100);
        std::vector<double> xs;
        for (std::size_t i = 0, k = 1 + rng() % 40; i < k; ++i) {
            const double u = rng.uniform();
            if (u < 0.65 || xs.empty()) {
                xs.push_back(rng.uniform());
            } else if (u < 0.85) {
                xs.push_back(2.0 + rng.uniform());
            } else {
                xs.push_back(xs[rng() % xs.size()]);
            }
        }
        double grid_ll = 0.0;
        const auto grid = spike_grid_argmax(fam, xs, grid_ll);
        const auto mle = spike::spike_exact_mle(fam, xs);
        double mle_ll = 0.0;
        for (double x : xs) mle_ll += spike::spike_log_pdf(fam, mle, x);
        if (!(mle == grid) && std::abs(mle_ll - grid_ll) > 1e-9 * (1.0 + std::abs(grid_ll))) ++spike_bad;
    }
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> al;
        for (std::size_t j = 0, len = 1 + rng() % 4; j < len; ++j) al.push_back(0.25 * rng.uniform());
        const auto xs = tail::tail_sample(tail::TailChainFamily::demo(10.0), tail::TailChainParams::make_h(al), rng,
                                          1 + rng() % 50);
        const auto fit = tail::best_h_fit(xs);
        for (const auto& [j, m] : tail::interval_max(xs)) {
            if (fit.alphas[j] != std::min(0.25, (1.0 - m) / 2.0)) {
                ++h_bad;
                break;
            }
        }
    }
    for (int trial = 0; trial < 90; ++trial) {
        using namespace families;
        ParamPoint theta;
        if (trial % 3 == 0) {
            theta = to_point(GaussianParams{4 * rng.uniform() - 2, 0.3 + 2 * rng.uniform()});
        } else if (trial % 3 == 1) {
            theta = to_point(ExponentialParams{0.2 + 4 * rng.uniform()});
        } else {
            theta = to_point(PowerBetaParams{0.2 + 3 * rng.uniform()});
        }
        const auto xs = sample(theta, rng, 10 + rng() % 100);
        const auto exact = exact_mle(theta.family, xs);
        const auto numeric = optimizer::numeric_mle(theta.family, xs, theta, optimizer::default_bounds(theta.family));
        for (std::size_t i = 0; i < exact.coords.size(); ++i) {
            if (std::abs(exact.coords[i] - numeric.coords[i]) > 1e-5) {
                ++smooth_bad;
                break;
            }
        }
    }
    c.pass = spike_bad == 0 && h_bad == 0 && smooth_bad == 0;
    c.stats = {{"spike_mismatches", spike_bad}, {"h_fit_mismatches", h_bad}, {"smooth_mismatches", smooth_bad}};
    return c;
}

}  // namespace

int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err) {
    if (!options.inject_fault.empty() && options.inject_fault != "fisher") {
        err << "error: unknown fault '" << options.inject_fault << "' (expected fisher)\n";
        return kExitUsage;
    }
    if (options.audit_samples < 1000) {
        err << "error: audit sample count must be >= 1000\n";
        return kExitUsage;
    }
    std::vector<Check> checks;
    try {
        RandomStream rng = derive_stream(options.seed, 0, 0);
        checks.push_back(audit_checks(options, false, rng));
        checks.push_back(audit_checks(options, true, rng));
        checks.push_back(pinsker_check(rng));
        checks.push_back(max_uniform_check(rng));
        checks.push_back(mle_oracle_check(rng));
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }

    bool all = true;
    for (const Check& c : checks) all = all && c.pass;
    if (options.json) {
        json report = {{"pass", all}, {"checks", json::array()}};
        for (const Check& c : checks) report["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"stats", c.stats}});
        out << report.dump(2) << '\n';
    } else {
        for (const Check& c : checks) out << (c.pass ? "PASS " : "FAIL ") << c.name << '\n';
    }
    for (const Check& c : checks) {
        if (!c.pass) err << "check failed: " << c.name << '\n';
    }
    return all ? kExitOk : kExitFailure;
}

}  // namespace collapse_lab::cli
