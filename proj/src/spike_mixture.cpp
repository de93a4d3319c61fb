#include "collapse_lab/spike_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace collapse_lab::spike {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }
bool in_upper(double x) { return x >= 2.0 && x <= 3.0; }

// log(½ + (1-α)/(2(1-2α))) = log(1 + α/(2(1-2α))).
double log_boost(double alpha) { return std::log1p(alpha / (2.0 * (1.0 - 2.0 * alpha))); }

// log(1 + 1/f) from log f, without forming 1/f.
double log_spike_gain(double log_f) { return -log_f + std::log1p(std::exp(log_f)); }

struct Window {
    double mu = 2.0;
    std::size_t count = 0;
};

// Leftmost μ in [2, 3-f] maximising #{x : μ <= x <= μ+f} over sorted samples.
Window best_window(std::span<const double> sorted_upper, double f) {
    Window best;
    const double hi = 3.0 - f;
    for (double s : sorted_upper) {
        const double mu = std::min(s, hi);
        const auto lo_it = std::lower_bound(sorted_upper.begin(), sorted_upper.end(), mu);
        const auto hi_it = std::upper_bound(sorted_upper.begin(), sorted_upper.end(), mu + f);
        const auto count = static_cast<std::size_t>(hi_it - lo_it);
        if (count > best.count || (count == best.count && count > 0 && mu < best.mu)) {
            best = {mu, count};
        }
    }
    return best;
}

}  // namespace

SpikeMixtureFamily::SpikeMixtureFamily(int scale) : N(scale) {
    if (scale < 1) {
        throw InvalidArgument("spike mixture scale N must be >= 1");
    }
    // -log(32·128^(2N) - 1) = -a - log1p(-e^-a), a = log 32 + 2N log 128.
    const double a = std::log(32.0) + 2.0 * scale * std::log(128.0);
    log_f_small = -a - std::log1p(-std::exp(-a));
}

double SpikeMixtureFamily::log_f(double alpha) const {
    return alpha <= kAlphaBreak ? -std::log(39.0) : log_f_small;
}

double SpikeMixtureFamily::f(double alpha) const { return std::exp(log_f(alpha)); }

bool in_domain(const SpikeMixtureFamily& fam, const SpikeMixtureParams& p) {
    return p.alpha >= 0.0 && p.alpha <= kAlphaMax && p.mu >= 2.0 && p.mu <= 3.0 - fam.f(p.alpha);
}

void validate(const SpikeMixtureFamily& fam, const SpikeMixtureParams& p) {
    if (!in_domain(fam, p)) {
        throw InvalidParameter("spike mixture parameters out of domain: alpha=" + std::to_string(p.alpha) +
                               " mu=" + std::to_string(p.mu));
    }
}

ParamPoint to_point(const SpikeMixtureParams& p) { return {FamilyId::spike_mixture, {p.alpha, p.mu}}; }

SpikeMixtureParams from_point(const ParamPoint& point) {
    if (point.family != FamilyId::spike_mixture || point.coords.size() != 2) {
        throw InvalidParameter("not a spike mixture parameter point");
    }
    return {point.coords[0], point.coords[1]};
}

double spike_log_pdf(const SpikeMixtureFamily& fam, const SpikeMixtureParams& p, double x) {
    validate(fam, p);
    const double a = p.alpha;
    if (in_unit(x)) {
        return x <= 1.0 - 2.0 * a ? log_boost(a) : -std::numbers::ln2;
    }
    if (in_upper(x)) {
        if (a == 0.0) {
            return kNegInf;
        }
        const double lf = fam.log_f(a);
        const double base = std::log(a / 4.0);
        const bool on_spike = x >= p.mu && x <= p.mu + std::exp(lf);
        return on_spike ? base + log_spike_gain(lf) : base;
    }
    return kNegInf;
}

std::vector<double> spike_sample(const SpikeMixtureFamily& fam, const SpikeMixtureParams& p, RandomStream& stream,
                                 std::size_t n) {
    validate(fam, p);
    const double a = p.alpha;
    const double f = fam.f(a);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double pick = stream.uniform();
        const double u = stream.uniform();
        if (pick < 0.5) {
            out.push_back(u);
        } else if (pick < 0.5 + 0.5 * (1.0 - a)) {
            out.push_back(u * (1.0 - 2.0 * a));
        } else if (pick < 1.0 - 0.25 * a) {
            out.push_back(2.0 + u);
        } else {
            out.push_back(p.mu + u * f);
        }
    }
    return out;
}

double spike_log_likelihood(const SpikeMixtureFamily& fam, const SpikeMixtureParams& p,
                            std::span<const double> samples) {
    validate(fam, p);
    const double a = p.alpha;
    const double threshold = 1.0 - 2.0 * a;
    const double lf = fam.log_f(a);
    const double upper_edge = p.mu + std::exp(lf);
    double low = 0.0, high = 0.0, upper = 0.0, spike = 0.0;
    for (double x : samples) {
        if (in_unit(x)) {
            (x <= threshold ? low : high) += 1.0;
        } else if (in_upper(x)) {
            upper += 1.0;
            if (x >= p.mu && x <= upper_edge) {
                spike += 1.0;
            }
        } else {
            return kNegInf;
        }
    }
    if (upper > 0.0 && a == 0.0) {
        return kNegInf;
    }
    double ll = low * log_boost(a) - high * std::numbers::ln2;
    if (upper > 0.0) {
        ll += upper * std::log(a / 4.0) + spike * log_spike_gain(lf);
    }
    return ll;
}

SpikeMixtureParams spike_exact_mle(const SpikeMixtureFamily& fam, const Dataset& dataset) {
    return spike_exact_mle(fam, dataset.values());
}

SpikeMixtureParams spike_exact_mle(const SpikeMixtureFamily& fam, std::span<const double> samples) {
    if (samples.empty()) {
        throw InvalidDataset("spike mixture MLE needs at least one sample");
    }
    std::vector<double> unit, upper;
    for (double x : samples) {
        if (in_unit(x)) {
            unit.push_back(x);
        } else if (in_upper(x)) {
            upper.push_back(x);
        } else {
            throw InvalidDataset("sample " + std::to_string(x) + " outside the spike mixture support");
        }
    }
    std::sort(unit.begin(), unit.end());
    std::sort(upper.begin(), upper.end());

    // For x >= ½ both (1-x)/2 and 1-2α are exact, so the region boundary of
    // the candidate lands on the sample itself.
    std::vector<double> alphas{0.0, kAlphaBreak, kAlphaMax};
    for (double x : unit) {
        if (x >= 0.5) {
            alphas.push_back((1.0 - x) / 2.0);
        }
    }
    std::sort(alphas.begin(), alphas.end());
    alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

    const Window wide = best_window(upper, fam.f(0.0));
    const Window narrow = best_window(upper, fam.f(kAlphaMax));
    const double m_upper = static_cast<double>(upper.size());

    SpikeMixtureParams best{0.0, 2.0};
    double best_ll = kNegInf;
    bool have_best = false;
    for (double a : alphas) {
        double ll = 0.0;
        Window w;
        if (a == 0.0) {
            if (!upper.empty()) {
                continue;
            }
        } else {
            const auto low = static_cast<double>(
                std::upper_bound(unit.begin(), unit.end(), 1.0 - 2.0 * a) - unit.begin());
            const double high = static_cast<double>(unit.size()) - low;
            w = a <= kAlphaBreak ? wide : narrow;
            ll = low * log_boost(a) - high * std::numbers::ln2;
            if (!upper.empty()) {
                ll += m_upper * std::log(a / 4.0) + static_cast<double>(w.count) * log_spike_gain(fam.log_f(a));
            }
        }
        if (!have_best || ll > best_ll) {
            best = {a, w.count > 0 ? w.mu : 2.0};
            best_ll = ll;
            have_best = true;
        }
    }
    return best;
}

}  // namespace collapse_lab::spike
