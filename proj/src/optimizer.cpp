#include "collapse_lab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "collapse_lab/families.hpp"

namespace collapse_lab::optimizer {

namespace {

constexpr double kInvPhi = 0.6180339887498948482;  // 1/φ
constexpr double kInf = std::numeric_limits<double>::infinity();

double checked(const std::function<double(double)>& f, double x) {
    const double v = f(x);
    if (!std::isfinite(v)) {
        throw Error("objective is not finite at x = " + std::to_string(x));
    }
    return v;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return std::sqrt(s);
}

}  // namespace

ScalarResult minimize_scalar(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(a < b)) {
        throw InvalidArgument("minimize_scalar needs a < b");
    }
    if (!(tol > 0.0)) {
        throw InvalidArgument("minimize_scalar needs tol > 0");
    }
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = checked(f, c);
    double fd = checked(f, d);
    std::size_t iterations = 0;
    while (b - a > tol) {
        const double width = b - a;
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = checked(f, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = checked(f, d);
        }
        ++iterations;
        if (!(b - a < width)) {
            break;  // bracket at floating-point resolution
        }
    }
    ScalarResult r;
    r.x = 0.5 * (a + b);
    r.value = checked(f, r.x);
    r.bracket_low = a;
    r.bracket_high = b;
    r.iterations = iterations;
    return r;
}

SimplexResult minimize_simplex(const std::function<double(const std::vector<double>&)>& f,
                               std::vector<double> x0, const SimplexOptions& options) {
    const std::size_t k = x0.size();
    if (k == 0) {
        throw InvalidArgument("minimize_simplex needs a non-empty start point");
    }
    const double f0 = f(x0);
    if (!std::isfinite(f0)) {
        throw InvalidArgument("objective is not finite at the start point");
    }
    auto eval = [&](const std::vector<double>& x) {
        const double v = f(x);
        return std::isnan(v) ? kInf : v;
    };

    std::vector<std::vector<double>> vertex(k + 1, x0);
    std::vector<double> value(k + 1, f0);
    auto build = [&](const std::vector<double>& centre, double centre_value) {
        vertex.assign(k + 1, centre);
        value.assign(k + 1, centre_value);
        for (std::size_t i = 0; i < k; ++i) {
            vertex[i + 1][i] += options.initial_step * std::max(1.0, std::abs(centre[i]));
            value[i + 1] = eval(vertex[i + 1]);
            if (!std::isfinite(value[i + 1])) {
                // Step the other way when the first probe leaves the feasible box.
                vertex[i + 1][i] = centre[i] - options.initial_step * std::max(1.0, std::abs(centre[i]));
                value[i + 1] = eval(vertex[i + 1]);
            }
        }
    };
    build(x0, f0);

    std::vector<std::size_t> order(k + 1);
    std::vector<double> centroid(k), trial(k), trial2(k);
    SimplexResult result;
    int restarts_left = options.restarts;
    double best_before_restart = kInf;

    while (result.iterations < options.max_iter) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return value[i] < value[j]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[k - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= k; ++i) {
            diameter = std::max(diameter, distance(vertex[i], vertex[best]));
        }
        if (diameter < options.tol) {
            if (restarts_left > 0 && value[best] < best_before_restart) {
                --restarts_left;
                best_before_restart = value[best];
                const std::vector<double> centre = vertex[best];
                build(centre, value[best]);
                continue;
            }
            result.converged = true;
            break;
        }
        ++result.iterations;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= k; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < k; ++j) centroid[j] += vertex[i][j] / static_cast<double>(k);
        }
        for (std::size_t j = 0; j < k; ++j) trial[j] = centroid[j] + (centroid[j] - vertex[worst][j]);
        const double fr = eval(trial);

        if (fr < value[best]) {
            for (std::size_t j = 0; j < k; ++j) trial2[j] = centroid[j] + 2.0 * (centroid[j] - vertex[worst][j]);
            const double fe = eval(trial2);
            if (fe < fr) {
                vertex[worst] = trial2;
                value[worst] = fe;
            } else {
                vertex[worst] = trial;
                value[worst] = fr;
            }
            continue;
        }
        if (fr < value[second]) {
            vertex[worst] = trial;
            value[worst] = fr;
            continue;
        }
        bool accepted = false;
        if (fr < value[worst]) {
            for (std::size_t j = 0; j < k; ++j) trial2[j] = centroid[j] + 0.5 * (trial[j] - centroid[j]);
            const double fc = eval(trial2);
            if (fc <= fr) {
                vertex[worst] = trial2;
                value[worst] = fc;
                accepted = true;
            }
        } else {
            for (std::size_t j = 0; j < k; ++j) trial2[j] = centroid[j] + 0.5 * (vertex[worst][j] - centroid[j]);
            const double fc = eval(trial2);
            if (fc < value[worst]) {
                vertex[worst] = trial2;
                value[worst] = fc;
                accepted = true;
            }
        }
        if (!accepted) {
            for (std::size_t i = 0; i <= k; ++i) {
                if (i == best) continue;
                for (std::size_t j = 0; j < k; ++j) {
                    vertex[i][j] = vertex[best][j] + 0.5 * (vertex[i][j] - vertex[best][j]);
                }
                value[i] = eval(vertex[i]);
            }
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(value.begin(), value.end()) - value.begin());
    result.x = vertex[best];
    result.value = value[best];
    return result;
}

Bounds default_bounds(FamilyId family) {
    switch (family) {
        case FamilyId::gaussian:
            return {{{-1e8, 1e8}, {1e-8, 1e8}}, {false, true}};
        case FamilyId::exponential:
        case FamilyId::power_beta:
            return {{{1e-8, 1e8}}, {true}};
        default:
            throw InvalidParameter(std::string(family_name(family)) + " has no numeric MLE");
    }
}

ParamPoint numeric_mle(FamilyId family, const Dataset& dataset, const ParamPoint& init, const Bounds& bounds,
                       const NumericMleOptions& options) {
    return numeric_mle(family, dataset.values(), init, bounds, options);
}

ParamPoint numeric_mle(FamilyId family, std::span<const double> samples, const ParamPoint& init,
                       const Bounds& bounds, const NumericMleOptions& options) {
    families::validate(init);
    if (init.family != family) {
        throw InvalidParameter("initial point belongs to another family");
    }
    const std::size_t k = families::dimension(family);
    if (bounds.limits.size() != k || bounds.log_scale.size() != k) {
        throw InvalidArgument("bounds do not match the family dimension");
    }
    std::vector<double> lo(k), hi(k);
    for (std::size_t i = 0; i < k; ++i) {
        auto [l, h] = bounds.limits[i];
        if (!(l < h) || (bounds.log_scale[i] && !(l > 0.0))) {
            throw InvalidArgument("invalid bounds for coordinate " + std::to_string(i));
        }
        lo[i] = bounds.log_scale[i] ? std::log(l) : l;
        hi[i] = bounds.log_scale[i] ? std::log(h) : h;
    }

    const families::SufficientStats stats = families::sufficient_stats(family, samples);
    auto to_point = [&](const std::vector<double>& z) {
        ParamPoint p{family, z};
        for (std::size_t i = 0; i < k; ++i) {
            const double zi = std::clamp(z[i], lo[i], hi[i]);
            p.coords[i] = bounds.log_scale[i] ? std::exp(zi) : zi;
        }
        return p;
    };
    auto objective = [&](const std::vector<double>& z) {
        for (std::size_t i = 0; i < k; ++i) {
            if (z[i] < lo[i] || z[i] > hi[i]) return kInf;
        }
        return families::mean_nll(stats, to_point(z));
    };

    if (k == 1) {
        const auto r = minimize_scalar([&](double z) { return objective({z}); }, lo[0], hi[0], options.scalar_tol);
        return to_point({r.x});
    }

    std::vector<double> z0(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double c = init.coords[i];
        z0[i] = std::clamp(bounds.log_scale[i] ? std::log(c) : c, lo[i], hi[i]);
    }
    const SimplexResult r = minimize_simplex(objective, z0, options.simplex);
    return to_point(r.x);
}

}  // namespace collapse_lab::optimizer
