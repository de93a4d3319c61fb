#include "collapse_lab/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "collapse_lab/families.hpp"
#include "collapse_lab/metrics.hpp"
#include "collapse_lab/optimizer.hpp"
#include "collapse_lab/spike_mixture.hpp"
#include "collapse_lab/tail_chain.hpp"

namespace collapse_lab::engine {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

IterationStats describe(std::vector<double> values) {
    IterationStats s;
    s.count = values.size();
    if (values.empty()) {
        return s;
    }
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    s.median = m % 2 == 1 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
    if (!std::isfinite(values.back())) {
        s.mean = kInf;
        s.std = kInf;
        return s;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(m);
    if (m > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(m - 1));
    }
    return s;
}

std::size_t worker_count(std::size_t parallelism, std::size_t jobs) {
    std::size_t w = parallelism == 0 ? std::max(1u, std::thread::hardware_concurrency()) : parallelism;
    return std::max<std::size_t>(1, std::min(w, jobs));
}

bool is_spiked(const ParamPoint& theta) { return theta.coords.size() >= 3 && theta.coords[0] == 1.0; }

}  // namespace

void validate_point(const ParamPoint& theta, const ConstructionOptions& construction) {
    switch (theta.family) {
        case FamilyId::spike_mixture:
            spike::validate(spike::SpikeMixtureFamily(construction.spike_scale), spike::from_point(theta));
            break;
        case FamilyId::tail_chain:
            tail::TailChainFamily::from_options(construction);
            tail::from_point(theta);
            break;
        default:
            families::validate(theta);
    }
}

std::vector<double> sample_family(const ParamPoint& theta, const ConstructionOptions& construction,
                                  RandomStream& stream, std::size_t n) {
    switch (theta.family) {
        case FamilyId::spike_mixture:
            return spike::spike_sample(spike::SpikeMixtureFamily(construction.spike_scale), spike::from_point(theta),
                                       stream, n);
        case FamilyId::tail_chain:
            return tail::tail_sample(tail::TailChainFamily::from_options(construction), tail::from_point(theta),
                                     stream, n);
        default:
            return families::sample(theta, stream, n);
    }
}

ParamPoint fit_family(const RunConfig& config, const Dataset& dataset, const ParamPoint& previous) {
    switch (config.family()) {
        case FamilyId::spike_mixture:
            return spike::to_point(
                spike::spike_exact_mle(spike::SpikeMixtureFamily(config.construction.spike_scale), dataset));
        case FamilyId::tail_chain:
            return tail::to_point(
                tail::tail_exact_mle(tail::TailChainFamily::from_options(config.construction), dataset));
        default:
            if (config.mle_mode == MleMode::numeric) {
                return optimizer::numeric_mle(config.family(), dataset, previous,
                                              optimizer::default_bounds(config.family()));
            }
            return families::exact_mle(config.family(), dataset);
    }
}

double param_distance(const ParamPoint& a, const ParamPoint& b) {
    if (a.family != b.family) {
        throw InvalidArgument("distance between different families");
    }
    double ss = 0.0;
    if (a.family == FamilyId::tail_chain) {
        // [s, β, J, α...]: compare s and the α vectors padded with zeros.
        ss = (a.coords[0] - b.coords[0]) * (a.coords[0] - b.coords[0]);
        const std::size_t k = std::max(a.coords.size(), b.coords.size());
        for (std::size_t i = 3; i < k; ++i) {
            const double x = i < a.coords.size() ? a.coords[i] : 0.0;
            const double y = i < b.coords.size() ? b.coords[i] : 0.0;
            ss += (x - y) * (x - y);
        }
        return std::sqrt(ss);
    }
    if (a.coords.size() != b.coords.size()) {
        throw InvalidArgument("parameter points of different dimension");
    }
    for (std::size_t i = 0; i < a.coords.size(); ++i) {
        ss += (a.coords[i] - b.coords[i]) * (a.coords[i] - b.coords[i]);
    }
    return std::sqrt(ss);
}

Trajectory run_iterative_mle(const RunConfig& config, std::uint64_t replication) {
    config.validate();
    validate_point(config.theta_star, config.construction);
    const ParamPoint& star = config.theta_star;

    Trajectory out;
    TrajectoryRecord first;
    first.theta = star;
    if (config.metrics.tv) first.tv = 0.0;
    if (config.metrics.kl) first.kl = 0.0;
    out.records.push_back(first);

    Dataset data(config.n);
    ParamPoint current = star;
    for (std::size_t t = 0; t <= config.T; ++t) {
        try {
            RandomStream stream = derive_stream(config.master_seed, replication, t);
            const std::vector<double> fresh = sample_family(current, config.construction, stream, config.n);
            data = std::move(data).accumulate(fresh, t);
            ParamPoint next = fit_family(config, data, current);

            TrajectoryRecord rec;
            rec.t = t + 1;
            rec.param_error = param_distance(next, star);
            if (config.metrics.tv) rec.tv = metrics::tv_distance(star, next, config.construction);
            if (config.metrics.kl) rec.kl = metrics::kl_divergence(star, next, config.construction);
            rec.dataset_size = data.size();
            rec.theta = next;
            out.records.push_back(std::move(rec));
            current = std::move(next);
        } catch (const Error& e) {
            out.aborted = true;
            out.failure = "iteration " + std::to_string(t) + ": " + e.what();
            break;
        }
    }
    return out;
}

std::vector<Trajectory> run_replication_set(const RunConfig& config, std::size_t R, std::size_t parallelism) {
    if (R == 0) {
        throw InvalidArgument("replication count must be >= 1");
    }
    config.validate();
    validate_point(config.theta_star, config.construction);

    std::vector<Trajectory> runs(R);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t r = next++; r < R; r = next++) {
            try {
                runs[r] = run_iterative_mle(config, r);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const std::size_t workers = worker_count(parallelism, R);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return runs;
}

ReplicationSummary summarize(const RunConfig& config, const std::vector<Trajectory>& runs) {
    ReplicationSummary s;
    s.replications = runs.size();
    s.T = config.T;
    std::vector<const Trajectory*> good;
    for (const Trajectory& tr : runs) {
        if (tr.aborted) {
            ++s.failures;
            s.failure_messages.push_back(tr.failure);
        } else {
            good.push_back(&tr);
        }
    }
    if (good.empty()) {
        throw Error("all " + std::to_string(runs.size()) + " replications failed");
    }

    const std::size_t records = config.T + 2;
    auto column = [&](std::size_t t, auto field) {
        std::vector<double> v;
        v.reserve(good.size());
        for (const Trajectory* tr : good) v.push_back(field(tr->records[t]));
        return v;
    };
    for (std::size_t t = 0; t < records; ++t) {
        if (config.metrics.param_error) {
            s.param_error.push_back(describe(column(t, [](const TrajectoryRecord& r) { return r.param_error; })));
        }
        if (config.metrics.tv) {
            s.tv.push_back(describe(column(t, [](const TrajectoryRecord& r) { return *r.tv; })));
        }
        if (config.metrics.kl) {
            s.kl.push_back(describe(column(t, [](const TrajectoryRecord& r) { return *r.kl; })));
        }
    }
    if (config.metrics.param_error && config.T >= 1) {
        const double first = s.param_error[1].mean;
        const double last = s.param_error[config.T].mean;
        if (first > 0.0 && std::isfinite(first) && std::isfinite(last)) {
            s.ratio_T_over_1 = last / first;
        }
    }
    for (const Trajectory& tr : runs) {
        if (tr.aborted || !config.metrics.tv) {
            s.collapse_times.push_back(std::nullopt);
        } else {
            s.collapse_times.push_back(detect_collapse(tr, config.collapse_threshold));
        }
    }
    return s;
}

ReplicationSummary run_replications(const RunConfig& config, std::size_t R, std::size_t parallelism) {
    return summarize(config, run_replication_set(config, R, parallelism));
}

std::optional<std::size_t> detect_collapse(const Trajectory& trajectory, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw InvalidArgument("collapse threshold must lie in (0, 1]");
    }
    for (const TrajectoryRecord& r : trajectory.records) {
        if (!r.tv) {
            throw InvalidArgument("trajectory does not track tv");
        }
        if (*r.tv >= threshold) {
            return r.t;
        }
    }
    return std::nullopt;
}

MaxUniformReport check_max_uniform(std::size_t n, double delta, std::size_t reps, RandomStream& stream) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InvalidArgument("delta must lie in (0, 1)");
    }
    if (n == 0 || reps < 100) {
        throw InvalidArgument("check_max_uniform needs n >= 1 and reps >= 100");
    }
    MaxUniformReport rep;
    rep.n = n;
    rep.delta = delta;
    rep.reps = reps;
    const double nd = static_cast<double>(n);
    rep.lower = 1.0 - std::log(2.0 / delta) / nd;
    rep.upper = 1.0 - delta / (2.0 * nd);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, stream.uniform());
        if (m >= rep.lower && m <= rep.upper) ++hits;
    }
    rep.frequency = static_cast<double>(hits) / static_cast<double>(reps);
    rep.required = 1.0 - delta - 3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(reps));
    rep.pass = rep.frequency >= rep.required;
    return rep;
}

SpikeExperimentReport spike_collapse_experiment(int N, std::size_t n, std::size_t R, std::uint64_t master_seed,
                                                std::size_t parallelism) {
    if (R < 100) {
        throw InvalidArgument("spike experiment needs R >= 100");
    }
    RunConfig config;
    config.theta_star = spike::to_point({0.0, 2.0});
    config.n = n;
    config.T = 1;
    config.master_seed = master_seed;
    config.metrics = {true, true, false};
    config.construction.spike_scale = N;

    const std::vector<Trajectory> runs = run_replication_set(config, R, parallelism);
    SpikeExperimentReport rep;
    rep.N = N;
    rep.n = n;
    rep.R = R;
    rep.close_threshold = std::log(static_cast<double>(n)) / static_cast<double>(n);
    std::size_t close = 0, far = 0;
    for (std::size_t r = 0; r < R; ++r) {
        const Trajectory& tr = runs[r];
        if (tr.aborted) {
            rep.tv1.push_back(kInf);
            rep.tv2.push_back(-kInf);
            continue;
        }
        const double tv1 = *tr.records[1].tv;
        const double tv2 = *tr.records[2].tv;
        rep.tv1.push_back(tv1);
        rep.tv2.push_back(tv2);
        if (tv1 <= rep.close_threshold) ++close;
        if (tv2 >= rep.far_threshold) ++far;

        // Regenerate generation 1 from its stream key to see where it landed.
        RandomStream stream = derive_stream(master_seed, r, 1);
        const auto gen1 = sample_family(tr.records[1].theta, config.construction, stream, n);
        if (std::any_of(gen1.begin(), gen1.end(), [](double x) { return x >= 2.0; })) {
            ++rep.upper_hit_runs;
            if (tr.records[2].theta.coords[0] > spike::kAlphaBreak && tv2 >= rep.far_threshold) {
                ++rep.upper_hit_collapsed;
            }
        }
    }
    rep.freq_close_at_1 = static_cast<double>(close) / static_cast<double>(R);
    rep.freq_far_at_2 = static_cast<double>(far) / static_cast<double>(R);
    return rep;
}

TailExperimentReport tail_collapse_experiment(std::size_t n, const ConstructionOptions& construction,
                                              std::size_t R, std::size_t T_max, std::uint64_t master_seed,
                                              std::size_t parallelism) {
    if (R == 0) {
        throw InvalidArgument("replication count must be >= 1");
    }
    tail::TailChainFamily::from_options(construction);
    TailExperimentReport rep;
    rep.n = n;
    rep.R = R;
    rep.T_max = T_max;
    rep.collapse_times.assign(R, std::nullopt);
    rep.tv_at_collapse.assign(R, std::nullopt);
    rep.J_at_collapse.assign(R, std::nullopt);

    if (T_max > 0) {
        RunConfig config;
        config.theta_star = tail::to_point(tail::TailChainParams::make_h({0.0}));
        config.n = n;
        config.T = T_max - 1;
        config.master_seed = master_seed;
        config.metrics = {true, true, false};
        config.construction = construction;
        const std::vector<Trajectory> runs = run_replication_set(config, R, parallelism);
        for (std::size_t r = 0; r < R; ++r) {
            if (runs[r].aborted) {
                ++rep.failures;
            }
            for (const TrajectoryRecord& rec : runs[r].records) {
                if (rec.t >= 1 && is_spiked(rec.theta)) {
                    rep.collapse_times[r] = rec.t;
                    rep.tv_at_collapse[r] = *rec.tv;
                    rep.J_at_collapse[r] = static_cast<int>(rec.theta.coords[2]);
                    break;
                }
            }
        }
    }

    std::vector<double> times;
    std::size_t collapsed = 0;
    for (const auto& t : rep.collapse_times) {
        times.push_back(t ? static_cast<double>(*t) : kInf);
        if (t) ++collapsed;
    }
    std::sort(times.begin(), times.end());
    rep.median_collapse_time = R % 2 == 1 ? times[R / 2] : 0.5 * (times[R / 2 - 1] + times[R / 2]);
    rep.collapse_fraction = static_cast<double>(collapsed) / static_cast<double>(R);
    for (std::size_t t = 0; t <= T_max; ++t) {
        std::size_t alive = 0;
        for (const auto& c : rep.collapse_times) {
            if (!c || *c > t) ++alive;
        }
        rep.survival.push_back(static_cast<double>(alive) / static_cast<double>(R));
    }
    return rep;
}

}  // namespace collapse_lab::engine
