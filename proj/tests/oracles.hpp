#ifndef COLLAPSE_LAB_TESTS_ORACLES_HPP
#define COLLAPSE_LAB_TESTS_ORACLES_HPP

// Reference computations written independently of the library, used to
// cross-check it. Nothing here calls into collapse_lab except for data types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, double eps, int depth = 50) {
    auto rule = [&](double l, double r, double fl, double fm, double fr) { return (r - l) / 6.0 * (fl + 4 * fm + fr); };
    std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double l, double r, double fl, double fm, double fr, double whole, double e, int d) {
            const double m = 0.5 * (l + r);
            const double lm = 0.5 * (l + m), rm = 0.5 * (m + r);
            const double flm = f(lm), frm = f(rm);
            const double left = rule(l, m, fl, flm, fm), right = rule(m, r, fm, frm, fr);
            if (d <= 0 || std::abs(left + right - whole) <= 15 * e) {
                return left + right + (left + right - whole) / 15.0;
            }
            return rec(l, m, fl, flm, fm, left, e / 2, d - 1) + rec(m, r, fm, frm, fr, right, e / 2, d - 1);
        };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, rule(a, b, fa, fm, fb), eps, depth);
}

/// Midpoint rule with `cells` equal cells.
inline double midpoint(const std::function<double(double)>& f, double a, double b, std::size_t cells) {
    const double h = (b - a) / static_cast<double>(cells);
    double s = 0.0;
    for (std::size_t i = 0; i < cells; ++i) s += f(a + (static_cast<double>(i) + 0.5) * h);
    return s * h;
}

/// Central finite difference.
inline double derivative(const std::function<double(double)>& f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2 * h);
}

inline double log_sum_exp(const std::vector<double>& v) {
    double m = kNegInf;
    for (double x : v) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

// ---- spike mixture, from the component definition ----

/// log f(α) for scale N, via long double so 128^(2N) stays representable for N <= 1000.
inline double spike_log_width(int N, double alpha) {
    if (alpha <= 0.1) return -std::log(39.0);
    const long double big = 32.0L * std::pow(128.0L, 2.0L * N) - 1.0L;
    return static_cast<double>(-std::log(big));
}

/// log density as a log-sum over the four weighted uniform components.
inline double spike_log_density(int N, double alpha, double mu, double x) {
    std::vector<double> terms;
    if (x >= 0 && x <= 1) terms.push_back(std::log(0.5));
    if (x >= 0 && x <= 1 - 2 * alpha) terms.push_back(std::log((1 - alpha) / 2) - std::log(1 - 2 * alpha));
    if (alpha > 0 && x >= 2 && x <= 3) terms.push_back(std::log(alpha / 4));
    const double lf = spike_log_width(N, alpha);
    if (alpha > 0 && x >= mu && x <= mu + std::exp(lf)) terms.push_back(std::log(alpha / 4) - lf);
    return log_sum_exp(terms);
}

inline double spike_log_lik(int N, double alpha, double mu, const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += spike_log_density(N, alpha, mu, x);
    return s;
}

struct SpikeArgmax {
    double alpha = 0.0;
    double mu = 2.0;
    double log_lik = kNegInf;
};

/// Exhaustive search over the α grid × sample-anchored μ placements; ties keep
/// the first (smallest α, then smallest μ).
inline SpikeArgmax spike_brute_force(int N, const std::vector<double>& xs, const std::vector<double>& alpha_grid) {
    std::vector<double> alphas = alpha_grid;
    std::sort(alphas.begin(), alphas.end());
    SpikeArgmax best;
    bool first = true;
    for (double a : alphas) {
        const double f = std::exp(spike_log_width(N, a));
        std::vector<double> mus{2.0};
        for (double x : xs) {
            if (x >= 2 && x <= 3) mus.push_back(std::min(x, 3 - f));
        }
        std::sort(mus.begin(), mus.end());
        for (double mu : mus) {
            const double ll = spike_log_lik(N, a, mu, xs);
            if (first || ll > best.log_lik) {
                best = {a, mu, ll};
                first = false;
            }
        }
    }
    return best;
}

/// {0, 1/10, 1/4} ∪ {(1-x)/2 : x in [1/2, 1]}.
inline std::vector<double> spike_candidate_alphas(const std::vector<double>& xs) {
    std::vector<double> out{0.0, 0.1, 0.25};
    for (double x : xs) {
        if (x >= 0.5 && x <= 1.0) out.push_back((1 - x) / 2);
    }
    return out;
}

// ---- tail chain ----

/// M_j from the definition: max offset within [j, j+1], integers k >= 1 going to k-1.
inline std::map<std::size_t, double> interval_offsets(const std::vector<double>& xs) {
    std::map<std::size_t, double> m;
    for (double x : xs) {
        double j = std::floor(x);
        double off = x - j;
        if (off == 0 && j >= 1) {
            j -= 1;
            off = 1;
        }
        auto key = static_cast<std::size_t>(j);
        m[key] = m.count(key) ? std::max(m[key], off) : off;
    }
    return m;
}

/// h log-likelihood straight from the mixture weights.
inline double h_log_lik(const std::vector<double>& alphas, const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) {
        double best = kNegInf;
        for (std::size_t j = 0; j <= alphas.size(); ++j) {
            const double a = j < alphas.size() ? alphas[j] : 0.0;
            if (x < j || x > j + 1 - 2 * a) continue;
            double w = 1 - a;
            for (std::size_t k = 0; k < j; ++k) w *= alphas[k];
            if (w > 0) best = std::max(best, std::log(w / (1 - 2 * a)));
        }
        s += best;
    }
    return s;
}

}  // namespace oracle

#endif  // COLLAPSE_LAB_TESTS_ORACLES_HPP
