// Acceptance suite: one PASS/FAIL line per criterion, details indented above it.
// Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "collapse_lab/engine.hpp"
#include "collapse_lab/families.hpp"
#include "collapse_lab/metrics.hpp"
#include "collapse_lab/optimizer.hpp"
#include "collapse_lab/spike_mixture.hpp"
#include "collapse_lab/tail_chain.hpp"
#include "oracles.hpp"

namespace cl = collapse_lab;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets fixed by the acceptance criteria.
constexpr std::uint64_t kSeed = 20240917;
constexpr double kFlatFactor = 2.0;           // criterion 1
constexpr double kRatioOneLow = 1.0;          // criterion 2
constexpr double kRatioOneHigh = 1.6;
constexpr double kRatioSmallLow = 2.0;
constexpr double kRatioSmallHigh = 5.5;
constexpr double kSpikeCloseFreq = 0.95;      // criterion 3
constexpr double kSpikeFarFreq = 0.02;
constexpr double kTailCollapseFrac = 0.95;    // criterion 4
constexpr double kTailTvFloor = 3.0 / 8.0;
constexpr double kMleAgreement = 1e-5;        // criterion 5
constexpr double kPinskerSlack = 1e-9;        // criterion 6
constexpr double kMassTolerance = 1e-12;
constexpr std::size_t kAuditSamples = 100000;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

int failures = 0;

void verdict(int id, const std::string& name, bool pass, const Timer& timer) {
    std::printf("%s criterion %d: %s (%.1fs)\n", pass ? "PASS" : "FAIL", id, name.c_str(), timer.seconds());
    std::fflush(stdout);
    if (!pass) ++failures;
}

cl::RunConfig smooth_config(const cl::ParamPoint& star, std::size_t n, std::size_t T, cl::MleMode mode) {
    cl::RunConfig c;
    c.theta_star = star;
    c.n = n;
    c.T = T;
    c.master_seed = kSeed;
    c.mle_mode = mode;
    c.metrics = {true, false, false};
    return c;
}

void criterion_1() {
    Timer timer;
    bool pass = true;
    const std::vector<std::pair<std::string, cl::ParamPoint>> stars{
        {"gaussian", cl::families::to_point(cl::families::GaussianParams{0.0, 1.0})},
        {"exponential", cl::families::to_point(cl::families::ExponentialParams{1.0})},
        {"power_beta", cl::families::to_point(cl::families::PowerBetaParams{1.0})},
    };
    for (const auto& [name, star] : stars) {
        for (std::size_t n : {20, 50, 100}) {
            for (cl::MleMode mode : {cl::MleMode::exact, cl::MleMode::numeric}) {
                const auto s = cl::engine::run_replications(smooth_config(star, n, 100, mode), 50, 0);
                const double e1 = s.param_error[1].mean, eT = s.param_error[100].mean;
                const bool ok = s.failures == 0 && eT <= kFlatFactor * e1;
                pass = pass && ok;
                std::printf("  %-11s n=%-3zu %-7s err(1)=%.5f err(100)=%.5f ratio=%.3f %s\n", name.c_str(), n,
                            mode == cl::MleMode::exact ? "exact" : "numeric", e1, eT, eT / e1, ok ? "ok" : "BAD");
            }
        }
    }
    verdict(1, "non-collapse of smooth families (error at t=100 <= 2x error at t=1)", pass, timer);
}

void criterion_2() {
    Timer timer;
    std::vector<double> ratios;
    for (int k = 1; k <= 10; ++k) {
        const double theta0 = 0.1 * k;
        const auto s = cl::engine::run_replications(
            smooth_config(cl::families::to_point(cl::families::PowerBetaParams{theta0}), 100, 100, cl::MleMode::exact),
            50, 0);
        ratios.push_back(*s.ratio_T_over_1);
        std::printf("  theta0=%.1f ratio=%.4f\n", theta0, ratios.back());
    }
    const double r1 = ratios.back(), r01 = ratios.front();
    const bool one_ok = r1 >= kRatioOneLow && r1 <= kRatioOneHigh;
    const bool small_ok = r01 >= 2.0 * r1 && r01 >= kRatioSmallLow && r01 <= kRatioSmallHigh;
    std::printf("  ratio(1.0)=%.4f in [%.1f, %.1f]: %s\n", r1, kRatioOneLow, kRatioOneHigh, one_ok ? "ok" : "BAD");
    std::printf("  ratio(0.1)=%.4f >= 2*ratio(1.0) and in [%.1f, %.1f]: %s\n", r01, kRatioSmallLow, kRatioSmallHigh,
                small_ok ? "ok" : "BAD");
    verdict(2, "power-Beta theta0 sweep ratios", one_ok && small_ok, timer);
}

void criterion_3() {
    Timer timer;
    const auto rep = cl::engine::spike_collapse_experiment(100, 100, 2000, kSeed, 0);
    const bool a = rep.freq_close_at_1 >= kSpikeCloseFreq;
    const bool b = rep.freq_far_at_2 >= kSpikeFarFreq;
    std::printf("  (a) freq TV1 <= log(n)/n = %.4f (need >= %.2f) %s\n", rep.freq_close_at_1, kSpikeCloseFreq,
                a ? "ok" : "BAD");
    std::printf("  (b) freq TV2 >= 1/16   = %.4f (need >= %.2f) %s\n", rep.freq_far_at_2, kSpikeFarFreq,
                b ? "ok" : "BAD");
    std::printf("  runs with a generation-1 sample in [2,3]: %zu, of which collapsed: %zu\n", rep.upper_hit_runs,
                rep.upper_hit_collapsed);
    verdict(3, "spike mixture: close after one refit, far after two", a && b, timer);
}

void criterion_4() {
    Timer timer;
    cl::ConstructionOptions opts;
    opts.width_mode = cl::SpikeWidthMode::demo;
    opts.budget_exponent = 1e4;
    opts.min_J = 2;
    const auto j2 = cl::engine::tail_collapse_experiment(10, opts, 100, 200, kSeed, 0);
    opts.min_J = 3;
    const auto j3 = cl::engine::tail_collapse_experiment(10, opts, 100, 200, kSeed, 0);

    bool tv_ok = true;
    double tv_min = 1.0;
    for (const auto* rep : {&j2, &j3}) {
        for (const auto& tv : rep->tv_at_collapse) {
            if (tv) {
                tv_min = std::min(tv_min, *tv);
                tv_ok = tv_ok && *tv >= kTailTvFloor;
            }
        }
    }
    const bool frac_ok = j2.collapse_fraction >= kTailCollapseFrac;
    const bool median_ok = std::isfinite(j2.median_collapse_time) && j3.median_collapse_time > j2.median_collapse_time;
    std::printf("  min_J=2: collapsed %.2f (need >= %.2f) %s, median time %g\n", j2.collapse_fraction,
                kTailCollapseFrac, frac_ok ? "ok" : "BAD", j2.median_collapse_time);
    std::printf("  min_J=3: collapsed %.2f, median time %g\n", j3.collapse_fraction, j3.median_collapse_time);
    std::printf("  smallest TV at collapse %.4f (need >= 3/8) %s\n", tv_min, tv_ok ? "ok" : "BAD");
    std::printf("  median finite and increasing in min_J: %s\n", median_ok ? "ok" : "BAD");
    verdict(4, "tail chain collapses to the spiked form", frac_ok && tv_ok && median_ok, timer);
}

std::vector<double> random_spike_dataset(cl::RandomStream& rng) {
    const std::size_t k = 1 + rng() % 50;
    std::vector<double> xs;
    std::vector<double> upper;
    for (std::size_t i = 0; i < k; ++i) {
        const double pick = rng.uniform();
        if (pick < 0.6) {
            xs.push_back(rng.uniform() < 0.1 ? 1.0 - 0.5 * rng.uniform() * 1e-3 : rng.uniform());
        } else if (pick < 0.8 || upper.empty()) {
            upper.push_back(2.0 + rng.uniform());
            xs.push_back(upper.back());
        } else if (pick < 0.9) {
            xs.push_back(upper[rng() % upper.size()]);  // exact repeat
        } else {
            xs.push_back(std::min(3.0, upper[rng() % upper.size()] + rng.uniform() / 50.0));  // near cluster
        }
    }
    return xs;
}

void criterion_5() {
    Timer timer;
    cl::RandomStream rng(kSeed, 5, 0);

    std::size_t spike_bad = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int N = (trial % 3 == 0) ? 1 : (trial % 3 == 1 ? 5 : 100);
        const auto xs = random_spike_dataset(rng);
        const cl::spike::SpikeMixtureFamily fam(N);
        const auto mle = cl::spike::spike_exact_mle(fam, xs);
        const auto brute = oracle::spike_brute_force(N, xs, oracle::spike_candidate_alphas(xs));
        const double ll_mle = oracle::spike_log_lik(N, mle.alpha, mle.mu, xs);
        const bool same = mle.alpha == brute.alpha && mle.mu == brute.mu;
        const bool tie = std::abs(ll_mle - brute.log_lik) <= 1e-9 * (1.0 + std::abs(brute.log_lik));
        if (!same && !tie) {
            ++spike_bad;
            std::printf("  spike mismatch trial %d: mle (%.17g, %.17g) ll=%.17g brute (%.17g, %.17g) ll=%.17g\n",
                        trial, mle.alpha, mle.mu, ll_mle, brute.alpha, brute.mu, brute.log_lik);
        }
    }
    std::printf("  spike_exact_mle vs brute-force grid: %zu/200 mismatches\n", spike_bad);

    std::size_t h_bad = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> alphas;
        const std::size_t len = 1 + rng() % 4;
        for (std::size_t j = 0; j < len; ++j) alphas.push_back(0.25 * rng.uniform());
        const auto params = cl::tail::TailChainParams::make_h(alphas);
        const auto xs = cl::tail::tail_sample(cl::tail::TailChainFamily::demo(10.0), params, rng, 1 + rng() % 60);
        const auto fit = cl::tail::best_h_fit(xs);
        const auto offsets = oracle::interval_offsets(xs);
        for (const auto& [j, m] : offsets) {
            if (fit.alphas.at(j) != std::min(0.25, (1.0 - m) / 2.0)) {
                ++h_bad;
                break;
            }
        }
    }
    std::printf("  best_h_fit vs min(1/4,(1-M)/2): %zu/200 mismatches\n", h_bad);

    std::size_t mle_bad = 0;
    for (int family = 0; family < 3; ++family) {
        for (int trial = 0; trial < 100; ++trial) {
            cl::ParamPoint theta;
            if (family == 0) {
                theta = cl::families::to_point(cl::families::GaussianParams{-3 + 6 * rng.uniform(), 0.2 + 3 * rng.uniform()});
            } else if (family == 1) {
                theta = cl::families::to_point(cl::families::ExponentialParams{0.1 + 5 * rng.uniform()});
            } else {
                theta = cl::families::to_point(cl::families::PowerBetaParams{0.1 + 3 * rng.uniform()});
            }
            const auto xs = cl::families::sample(theta, rng, 5 + rng() % 200);
            const auto exact = cl::families::exact_mle(theta.family, xs);
            cl::ParamPoint init = theta;
            for (double& c : init.coords) c = c > 0 ? c * (0.5 + rng.uniform()) : c + rng.uniform() - 0.5;
            if (family == 0 && init.coords[1] <= 0) init.coords[1] = 1.0;
            const auto numeric =
                cl::optimizer::numeric_mle(theta.family, xs, init, cl::optimizer::default_bounds(theta.family));
            for (std::size_t i = 0; i < exact.coords.size(); ++i) {
                if (std::abs(exact.coords[i] - numeric.coords[i]) > kMleAgreement) {
                    ++mle_bad;
                    std::printf("  %s: exact %.10g numeric %.10g\n", std::string(cl::family_name(theta.family)).c_str(),
                                exact.coords[i], numeric.coords[i]);
                    break;
                }
            }
        }
    }
    std::printf("  exact_mle vs numeric_mle (3 x 100 datasets): %zu mismatches\n", mle_bad);
    verdict(5, "oracle equivalence of the exact MLE solvers", spike_bad == 0 && h_bad == 0 && mle_bad == 0, timer);
}

void criterion_6() {
    Timer timer;
    cl::RandomStream rng(kSeed, 6, 0);
    std::size_t audit_bad = 0;
    const std::vector<cl::ParamPoint> thetas{
        cl::families::to_point(cl::families::GaussianParams{0.0, 1.0}),
        cl::families::to_point(cl::families::GaussianParams{-2.0, 0.5}),
        cl::families::to_point(cl::families::GaussianParams{3.0, 2.0}),
        cl::families::to_point(cl::families::GaussianParams{10.0, 0.1}),
        cl::families::to_point(cl::families::GaussianParams{-0.5, 5.0}),
        cl::families::to_point(cl::families::ExponentialParams{1.0}),
        cl::families::to_point(cl::families::ExponentialParams{0.2}),
        cl::families::to_point(cl::families::ExponentialParams{3.0}),
        cl::families::to_point(cl::families::ExponentialParams{10.0}),
        cl::families::to_point(cl::families::ExponentialParams{0.05}),
        cl::families::to_point(cl::families::PowerBetaParams{1.0}),
        cl::families::to_point(cl::families::PowerBetaParams{0.1}),
        cl::families::to_point(cl::families::PowerBetaParams{0.5}),
        cl::families::to_point(cl::families::PowerBetaParams{2.0}),
        cl::families::to_point(cl::families::PowerBetaParams{5.0}),
    };
    for (const auto& theta : thetas) {
        const auto a = cl::families::audit_score_mean(theta, kAuditSamples, rng);
        const auto b = cl::families::audit_fisher_hessian(theta, kAuditSamples, rng);
        if (!a.pass || !b.pass) {
            ++audit_bad;
            std::printf("  audit failed for %s (%g): score %d fisher %d\n",
                        std::string(cl::family_name(theta.family)).c_str(), theta.coords[0], a.pass, b.pass);
        }
    }
    std::printf("  score/Fisher audits at m=1e5: %zu/15 failed\n", audit_bad);

    std::size_t mass_bad = 0, pinsker_bad = 0;
    auto check_mass = [&](const cl::metrics::PiecewiseDensity& d) {
        if (std::abs(d.total_mass() - 1.0) > kMassTolerance) ++mass_bad;
    };
    for (int i = 0; i < 100; ++i) {
        cl::metrics::PiecewiseDensity p, q;
        if (i % 2 == 0) {
            const cl::spike::SpikeMixtureFamily fam(1 + static_cast<int>(rng() % 100));
            auto draw = [&] {
                const double a = 0.25 * rng.uniform();
                const double mu = 2.0 + (1.0 - fam.f(a)) * rng.uniform();
                return cl::metrics::to_piecewise(fam, cl::spike::SpikeMixtureParams{a, mu});
            };
            p = draw();
            q = draw();
        } else {
            const auto fam = cl::tail::TailChainFamily::demo(1.0 + 50.0 * rng.uniform());
            auto draw = [&]() {
                if (rng.uniform() < 0.3) {
                    return cl::metrics::to_piecewise(
                        fam, cl::tail::TailChainParams::make_g(rng.uniform(), 2 + static_cast<int>(rng() % 3)));
                }
                std::vector<double> al;
                for (std::size_t j = 0, len = 1 + rng() % 4; j < len; ++j) al.push_back(0.25 * rng.uniform());
                return cl::metrics::to_piecewise(fam, cl::tail::TailChainParams::make_h(al));
            };
            p = draw();
            q = draw();
        }
        check_mass(p);
        check_mass(q);
        if (!cl::metrics::pinsker_holds(p, q, kPinskerSlack)) ++pinsker_bad;
    }
    std::size_t smooth_bad = 0;
    for (int i = 0; i < 100; ++i) {
        cl::ParamPoint a, b;
        switch (i % 3) {
            case 0:
                a = cl::families::to_point(cl::families::GaussianParams{-1 + 2 * rng.uniform(), 0.3 + 2 * rng.uniform()});
                b = cl::families::to_point(cl::families::GaussianParams{-1 + 2 * rng.uniform(), 0.3 + 2 * rng.uniform()});
                break;
            case 1:
                a = cl::families::to_point(cl::families::ExponentialParams{0.2 + 3 * rng.uniform()});
                b = cl::families::to_point(cl::families::ExponentialParams{0.2 + 3 * rng.uniform()});
                break;
            default:
                a = cl::families::to_point(cl::families::PowerBetaParams{0.2 + 3 * rng.uniform()});
                b = cl::families::to_point(cl::families::PowerBetaParams{0.2 + 3 * rng.uniform()});
        }
        const double tv = cl::families::tv_numeric(a, b);
        const double kl = cl::families::kl(a, b);
        if (!(tv <= std::sqrt(kl / 2.0) + kPinskerSlack)) ++smooth_bad;
    }
    std::printf("  Pinsker: %zu/100 construction pairs and %zu/100 smooth pairs violated\n", pinsker_bad, smooth_bad);
    std::printf("  to_piecewise mass off by > 1e-12: %zu/200\n", mass_bad);

    bool max_ok = true;
    for (auto [n, delta] : std::vector<std::pair<std::size_t, double>>{{10, 0.2}, {100, 0.1}, {1000, 0.05}}) {
        cl::RandomStream s(kSeed, 600 + n, 0);
        const auto rep = cl::engine::check_max_uniform(n, delta, 10000, s);
        max_ok = max_ok && rep.pass;
        std::printf("  max of %zu uniforms, delta=%.2f: frequency %.4f (need >= %.4f) %s\n", n, delta, rep.frequency,
                    rep.required, rep.pass ? "ok" : "BAD");
    }
    verdict(6, "analytic identities, Pinsker, normalisation, max-of-uniforms",
            audit_bad == 0 && pinsker_bad == 0 && smooth_bad == 0 && mass_bad == 0 && max_ok, timer);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_7() {
    Timer timer;
    const fs::path root = fs::temp_directory_path() / "collapse_lab_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path cfg = root / "config.toml";
    std::ofstream(cfg) << "family = \"gaussian\"\ntheta_star = [0.0, 1.0]\nn = [20, 50]\nT = 30\nseed = 7\n"
                          "replications = 12\nmle_mode = \"exact\"\nplot = true\n";

    bool pass = true;
    std::vector<std::string> csv, summaries;
    for (const char* threads : {"1", "1", "8"}) {
        const fs::path out = root / ("run" + std::to_string(csv.size()));
        setenv("COLLAPSE_LAB_THREADS", threads, 1);
        std::ostringstream sink;
        cl::cli::SimulateOptions opts;
        opts.config_path = cfg;
        opts.output_dir = out;
        const int code = cl::cli::cmd_simulate(opts, sink, sink);
        if (code != 0) {
            std::printf("  simulate exited %d: %s\n", code, sink.str().c_str());
            pass = false;
        }
        csv.push_back(slurp(out / "trajectory_n20.csv") + slurp(out / "trajectory_n50.csv"));
        summaries.push_back(slurp(out / "summary_n20.json") + slurp(out / "summary_n50.json"));
    }
    unsetenv("COLLAPSE_LAB_THREADS");
    const bool csv_same = !csv[0].empty() && csv[0] == csv[1];
    const bool par_same = !summaries[0].empty() && summaries[0] == summaries[2] && csv[0] == csv[2];
    std::printf("  rerun CSV byte-identical: %s (%zu bytes)\n", csv_same ? "ok" : "BAD", csv[0].size());
    std::printf("  1 vs 8 threads summaries identical: %s\n", par_same ? "ok" : "BAD");

    cl::RunConfig c = smooth_config(cl::families::to_point(cl::families::GaussianParams{0, 1}), 50, 40,
                                    cl::MleMode::numeric);
    c.metrics = {true, true, true};
    const auto s1 = cl::engine::run_replications(c, 16, 1);
    const auto s8 = cl::engine::run_replications(c, 16, 8);
    bool engine_same = s1.ratio_T_over_1 == s8.ratio_T_over_1 && s1.collapse_times == s8.collapse_times;
    for (std::size_t t = 0; t < s1.param_error.size(); ++t) {
        engine_same = engine_same && s1.param_error[t].mean == s8.param_error[t].mean &&
                      s1.tv[t].mean == s8.tv[t].mean && s1.kl[t].median == s8.kl[t].median;
    }
    std::printf("  engine summaries at parallelism 1 vs 8 identical: %s\n", engine_same ? "ok" : "BAD");
    fs::remove_all(root);
    verdict(7, "determinism of outputs and parallel aggregation", pass && csv_same && par_same && engine_same, timer);
}

}  // namespace

int main(int argc, char** argv) {
    // With arguments, runs only the listed criteria (e.g. "acceptance 2 5").
    void (*const criteria[])() = {criterion_1, criterion_2, criterion_3, criterion_4,
                                  criterion_5, criterion_6, criterion_7};
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7};
    for (int id : selected) {
        if (id < 1 || id > 7) {
            std::fprintf(stderr, "unknown criterion %d\n", id);
            return 2;
        }
        criteria[id - 1]();
    }
    std::printf("%d of %zu criteria failed\n", failures, selected.size());
    return failures == 0 ? 0 : 1;
}
