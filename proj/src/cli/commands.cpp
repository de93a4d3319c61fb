#include "cli/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli/config.hpp"
#include "cli/output.hpp"
#include "collapse_lab/engine.hpp"
#include "collapse_lab/families.hpp"

namespace collapse_lab::cli {

namespace {

using nlohmann::json;

std::string n_suffix(std::size_t n) { return "_n" + std::to_string(n); }

}  // namespace

std::size_t thread_count() {
    const char* env = std::getenv("COLLAPSE_LAB_THREADS");
    if (!env || !*env) {
        return 0;
    }
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0' || v == 0 || v > 4096) {
        throw ConfigError(std::string("COLLAPSE_LAB_THREADS must be a positive integer, got '") + env + "'");
    }
    return static_cast<std::size_t>(v);
}

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    std::size_t threads = 0;
    try {
        cfg = load_config(options.config_path);
        threads = thread_count();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    if (options.seed) {
        cfg.run.master_seed = *options.seed;
        cfg.echo["seed"] = *options.seed;
    }
    if (options.output_dir) cfg.output_dir = *options.output_dir;
    if (options.plot) cfg.plot = *options.plot;

    try {
        std::vector<Series> curves;
        for (std::size_t n : cfg.ns) {
            RunConfig run = cfg.run;
            run.n = n;
            const auto runs = engine::run_replication_set(run, cfg.replications, threads);

            const auto csv_path = cfg.output_dir / ("trajectory" + n_suffix(n) + ".csv");
            std::ostringstream csv;
            write_trajectory_csv(csv, runs);
            write_file(csv_path, csv.str());

            const auto summary = engine::summarize(run, runs);
            json echo = cfg.echo;
            echo["n"] = n;
            write_file(cfg.output_dir / ("summary" + n_suffix(n) + ".json"),
                       summary_to_json(echo, summary).dump(2) + "\n");

            out << "n=" << n << ": " << runs.size() << " replications, " << summary.failures << " failed";
            if (summary.ratio_T_over_1) out << ", ratio_T_over_1=" << *summary.ratio_T_over_1;
            out << '\n';

            if (cfg.plot && run.metrics.param_error) {
                std::ifstream back(csv_path, std::ios::binary);
                Series s;
                s.label = "n = " + std::to_string(n);
                for (const auto& [t, mean] : mean_error_by_iteration(back)) {
                    if (t == 0) continue;
                    s.x.push_back(static_cast<double>(t));
                    s.y.push_back(mean);
                }
                curves.push_back(std::move(s));
            }
        }
        if (!curves.empty()) {
            write_file(cfg.output_dir / "mean_error.svg",
                       render_svg(curves, std::string(family_name(cfg.run.family())) + ": mean parameter error",
                                  "iteration", "mean error"));
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_collapse_spike(const SpikeDemoOptions& options, std::ostream& out, std::ostream& err) {
    std::size_t threads = 0;
    engine::SpikeExperimentReport rep;
    try {
        threads = thread_count();
        rep = engine::spike_collapse_experiment(options.N, options.n, options.R, options.seed, threads);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    out << "spike mixture N=" << rep.N << " n=" << rep.n << " R=" << rep.R << '\n'
        << "iteration 1: freq TV <= log(n)/n (" << rep.close_threshold << ") = " << rep.freq_close_at_1 << '\n'
        << "iteration 2: freq TV >= 1/16 = " << rep.freq_far_at_2 << '\n'
        << "runs with a generation-1 sample in [2,3]: " << rep.upper_hit_runs << " (collapsed: "
        << rep.upper_hit_collapsed << ")\n";
    if (options.output) {
        json j{{"N", rep.N},
               {"n", rep.n},
               {"R", rep.R},
               {"close_threshold", rep.close_threshold},
               {"far_threshold", rep.far_threshold},
               {"freq_close_at_1", rep.freq_close_at_1},
               {"freq_far_at_2", rep.freq_far_at_2},
               {"upper_hit_runs", rep.upper_hit_runs},
               {"upper_hit_collapsed", rep.upper_hit_collapsed}};
        try {
            write_file(*options.output, j.dump(2) + "\n");
        } catch (const Error& e) {
            err << "error: " << e.what() << '\n';
            return kExitFailure;
        }
    }
    return kExitOk;
}

int cmd_collapse_tail(const TailDemoOptions& options, std::ostream& out, std::ostream& err) {
    engine::TailExperimentReport rep;
    try {
        const std::size_t threads = thread_count();
        rep = engine::tail_collapse_experiment(options.n, options.construction, options.R, options.T_max,
                                               options.seed, threads);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }

    std::ostringstream times;
    times << "run_id,collapse_time,tv_at_collapse,J\n";
    for (std::size_t r = 0; r < rep.R; ++r) {
        times << r << ',' << (rep.collapse_times[r] ? std::to_string(*rep.collapse_times[r]) : "") << ','
              << (rep.tv_at_collapse[r] ? format_number(*rep.tv_at_collapse[r]) : "") << ','
              << (rep.J_at_collapse[r] ? std::to_string(*rep.J_at_collapse[r]) : "") << '\n';
    }
    std::ostringstream survival;
    survival << "t,survival\n";
    for (std::size_t t = 0; t < rep.survival.size(); ++t) {
        survival << t << ',' << format_number(rep.survival[t]) << '\n';
    }
    try {
        write_file(options.output_dir / "collapse_times.csv", times.str());
        write_file(options.output_dir / "survival.csv", survival.str());
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }

    const std::size_t collapsed = static_cast<std::size_t>(
        std::count_if(rep.collapse_times.begin(), rep.collapse_times.end(), [](const auto& t) { return t.has_value(); }));
    out << "tail chain n=" << rep.n << " R=" << rep.R << " T_max=" << rep.T_max << '\n';
    if (collapsed == 0) {
        out << "no collapse within T_max\n";
        return kExitOk;
    }
    double tv_min = 1.0;
    for (const auto& tv : rep.tv_at_collapse) {
        if (tv) tv_min = std::min(tv_min, *tv);
    }
    out << "collapsed: " << collapsed << "/" << rep.R << " (" << rep.collapse_fraction << ")\n"
        << "median collapse time: " << rep.median_collapse_time << '\n'
        << "smallest TV at collapse: " << tv_min << '\n';
    return kExitOk;
}

int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err) {
    std::size_t threads = 0;
    try {
        threads = thread_count();
        if (!is_smooth(options.family) || families::dimension(options.family) != 1) {
            throw ConfigError("sweep needs a one-parameter family (exponential or power_beta)");
        }
        if (options.theta0.empty()) {
            throw ConfigError("sweep needs at least one theta0");
        }
        if (options.T < 1 || options.R < 1 || options.n < 1) {
            throw ConfigError("sweep needs n >= 1, T >= 1 and R >= 1");
        }
        for (double v : options.theta0) {
            families::validate({options.family, {v}});
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        std::ostringstream csv;
        csv << "theta0,ratio,ci_low,ci_high\n";
        Series curve;
        curve.label = "ratio";
        for (std::size_t k = 0; k < options.theta0.size(); ++k) {
            RunConfig run;
            run.theta_star = {options.family, {options.theta0[k]}};
            run.n = options.n;
            run.T = options.T;
            run.master_seed = options.seed;
            run.mle_mode = options.mode;
            run.metrics = {true, false, false};
            const auto runs = engine::run_replication_set(run, options.R, threads);
            const auto summary = engine::summarize(run, runs);

            std::vector<double> first, last;
            for (const auto& tr : runs) {
                if (tr.aborted) continue;
                first.push_back(tr.records[1].param_error);
                last.push_back(tr.records[options.T].param_error);
            }
            const double ratio = summary.ratio_T_over_1.value_or(std::nan(""));
            std::vector<double> boot;
            RandomStream rng = derive_stream(options.seed, 0x5eed0000ULL + k, 0);
            for (std::size_t b = 0; b < options.bootstrap; ++b) {
                double s1 = 0.0, sT = 0.0;
                for (std::size_t i = 0; i < first.size(); ++i) {
                    const std::size_t pick = rng() % first.size();
                    s1 += first[pick];
                    sT += last[pick];
                }
                if (s1 > 0.0) boot.push_back(sT / s1);
            }
            std::sort(boot.begin(), boot.end());
            auto quantile = [&](double q) {
                if (boot.empty()) return std::nan("");
                return boot[static_cast<std::size_t>(q * static_cast<double>(boot.size() - 1))];
            };
            csv << format_number(options.theta0[k]) << ',' << format_number(ratio) << ','
                << format_number(quantile(0.025)) << ',' << format_number(quantile(0.975)) << '\n';
            out << "theta0=" << options.theta0[k] << " ratio=" << ratio << '\n';
            curve.x.push_back(options.theta0[k]);
            curve.y.push_back(ratio);
        }
        write_file(options.output, csv.str());
        if (options.svg) {
            write_file(*options.svg, render_svg({curve}, std::string(family_name(options.family)) +
                                                             ": error ratio t=T over t=1",
                                                "theta0", "ratio"));
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace collapse_lab::cli
