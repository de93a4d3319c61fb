#include "collapse_lab/tail_chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace collapse_lab::tail {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxSample = 1e15;

double alpha_at(const std::vector<double>& alphas, std::size_t j) { return j < alphas.size() ? alphas[j] : 0.0; }

// log(1 + α/(1-2α)), the per-sample density gain of segment j.
double log_gain(double alpha) { return std::log1p(alpha / (1.0 - 2.0 * alpha)); }

// log of the density of h on segment j: log gain + Σ_{k<j} log α_k.
double log_segment_density(const std::vector<double>& alphas, std::size_t j) {
    double s = log_gain(alpha_at(alphas, j));
    for (std::size_t k = 0; k < j; ++k) {
        const double a = alpha_at(alphas, k);
        if (a == 0.0) {
            return kNegInf;
        }
        s += std::log(a);
    }
    return s;
}

// Uncapped -log f(J) - log 2, or +inf.
double raw_excess(const TailChainFamily& fam, int J) {
    const double log_2eJ = std::log(2.0 * std::numbers::e * J);
    if (fam.mode == SpikeWidthMode::demo) {
        return fam.budget_exponent * log_2eJ;
    }
    const double log_k = std::log(fam.psi_constant * std::log(4.0 / fam.delta) / fam.delta);
    const double log_psi = (J - 1) * log_k;
    double log_phi_inv = log_psi;
    switch (fam.phi) {
        case Phi::identity:
            break;
        case Phi::sqrt:
            log_phi_inv = 2.0 * log_psi;
            break;
        case Phi::log: {
            // φ^-1(y) = e^y - 1, so log φ^-1(ψ) = ψ + log1p(-e^-ψ).
            const double psi = std::exp(log_psi);
            log_phi_inv = std::isinf(psi) ? kInf : psi + std::log1p(-std::exp(-psi));
            break;
        }
    }
    const double log_excess = log_phi_inv + log_psi + std::log(log_2eJ);
    return log_excess > std::log(kLogFCap) ? kInf : std::exp(log_excess);
}

void require_samples(std::span<const double> samples) {
    for (double x : samples) {
        if (!(x >= 0.0) || !(x <= kMaxSample)) {
            throw InvalidDataset("tail chain sample " + std::to_string(x) + " outside [0, 1e15]");
        }
    }
}

}  // namespace

Phi parse_phi(const std::string& name) {
    if (name == "identity") return Phi::identity;
    if (name == "log") return Phi::log;
    if (name == "sqrt") return Phi::sqrt;
    throw InvalidArgument("unknown phi '" + name + "' (expected identity, log or sqrt)");
}

TailChainFamily TailChainFamily::demo(double budget_exponent, int min_J) {
    if (!(budget_exponent > 0.0) || !std::isfinite(budget_exponent)) {
        throw InvalidArgument("budget exponent E must be positive and finite");
    }
    if (min_J < 2) {
        throw InvalidArgument("min_J must be >= 2");
    }
    TailChainFamily fam;
    fam.mode = SpikeWidthMode::demo;
    fam.budget_exponent = budget_exponent;
    fam.min_J = min_J;
    return fam;
}

TailChainFamily TailChainFamily::paper(Phi phi, double psi_constant, double delta, int min_J) {
    if (!(psi_constant > 0.0) || !(delta > 0.0 && delta < 1.0)) {
        throw InvalidArgument("paper mode needs C > 0 and delta in (0, 1)");
    }
    if (psi_constant * std::log(4.0 / delta) / delta <= 1.0) {
        throw InvalidArgument("paper mode needs C log(4/delta)/delta > 1 for f to decrease");
    }
    if (min_J < 2) {
        throw InvalidArgument("min_J must be >= 2");
    }
    TailChainFamily fam;
    fam.mode = SpikeWidthMode::paper;
    fam.phi = phi;
    fam.psi_constant = psi_constant;
    fam.delta = delta;
    fam.min_J = min_J;
    return fam;
}

TailChainFamily TailChainFamily::from_options(const ConstructionOptions& options) {
    if (options.width_mode == SpikeWidthMode::demo) {
        return demo(options.budget_exponent, options.min_J);
    }
    return paper(parse_phi(options.phi), options.psi_constant, options.delta, options.min_J);
}

double TailChainFamily::log_f(int J) const {
    if (J < 2) {
        throw InvalidArgument("f(J) is defined for J >= 2");
    }
    const double excess = raw_excess(*this, J);
    return -std::numbers::ln2 - std::min(excess, kLogFCap - std::numbers::ln2);
}

bool TailChainFamily::saturated(int J) const { return raw_excess(*this, J) > kLogFCap - std::numbers::ln2; }

TailChainParams TailChainParams::make_h(std::vector<double> alphas) {
    TailChainParams p;
    p.s = Selector::h;
    p.alphas = alphas.empty() ? std::vector<double>{0.0} : std::move(alphas);
    validate(p);
    return p;
}

TailChainParams TailChainParams::make_g(double beta, int J) {
    TailChainParams p;
    p.s = Selector::g;
    p.alphas.clear();
    p.beta = beta;
    p.J = J;
    validate(p);
    return p;
}

void validate(const TailChainParams& p) {
    if (p.s == Selector::h) {
        for (double a : p.alphas) {
            if (!(a >= 0.0 && a <= 0.25)) {
                throw InvalidParameter("tail chain alpha " + std::to_string(a) + " outside [0, 1/4]");
            }
        }
        return;
    }
    if (!(p.beta >= 0.0 && p.beta <= 1.0)) {
        throw InvalidParameter("tail chain beta outside [0, 1]");
    }
    if (p.J < 2) {
        throw InvalidParameter("tail chain J must be >= 2");
    }
}

ParamPoint to_point(const TailChainParams& p) {
    ParamPoint out{FamilyId::tail_chain, {}};
    if (p.s == Selector::h) {
        out.coords = {0.0, 0.0, 0.0};
        out.coords.insert(out.coords.end(), p.alphas.begin(), p.alphas.end());
    } else {
        out.coords = {1.0, p.beta, static_cast<double>(p.J)};
    }
    return out;
}

TailChainParams from_point(const ParamPoint& point) {
    if (point.family != FamilyId::tail_chain || point.coords.size() < 3) {
        throw InvalidParameter("not a tail chain parameter point");
    }
    if (point.coords[0] == 0.0) {
        return TailChainParams::make_h(std::vector<double>(point.coords.begin() + 3, point.coords.end()));
    }
    if (point.coords[0] != 1.0 || point.coords[2] != std::floor(point.coords[2])) {
        throw InvalidParameter("malformed tail chain parameter point");
    }
    return TailChainParams::make_g(point.coords[1], static_cast<int>(point.coords[2]));
}

double tail_log_pdf(const TailChainFamily& fam, const TailChainParams& p, double x) {
    validate(p);
    if (!(x >= 0.0)) {
        return kNegInf;
    }
    if (p.s == Selector::g) {
        const double lf = fam.log_f(p.J);
        const double left = p.J - p.beta;
        const double f = std::exp(lf);
        const double J = static_cast<double>(p.J);
        if (x >= left && x <= left + f) {
            const double spike = -std::numbers::ln2 - lf;
            return x <= J ? spike + std::log1p(f / J) : spike;
        }
        return x <= J ? -std::log(2.0 * J) : kNegInf;
    }
    if (x > static_cast<double>(p.alphas.size()) + 1.0) {
        return kNegInf;
    }
    const auto j = static_cast<std::size_t>(std::floor(x));
    double best = kNegInf;
    if (x <= static_cast<double>(j) + 1.0 - 2.0 * alpha_at(p.alphas, j)) {
        best = log_segment_density(p.alphas, j);
    }
    // An integer point is also the right end of the previous segment when that
    // segment is full width.
    if (j >= 1 && x == static_cast<double>(j) && alpha_at(p.alphas, j - 1) == 0.0) {
        best = std::max(best, log_segment_density(p.alphas, j - 1));
    }
    return best;
}

std::vector<double> tail_sample(const TailChainFamily& fam, const TailChainParams& p, RandomStream& stream,
                                std::size_t n) {
    validate(p);
    std::vector<double> out;
    out.reserve(n);
    if (p.s == Selector::g) {
        const double f = std::exp(fam.log_f(p.J));
        const double left = p.J - p.beta;
        for (std::size_t i = 0; i < n; ++i) {
            const double pick = stream.uniform();
            const double u = stream.uniform();
            out.push_back(pick < 0.5 ? u * p.J : left + u * f);
        }
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = 0;
        while (stream.uniform() < alpha_at(p.alphas, j)) {
            ++j;
        }
        const double a = alpha_at(p.alphas, j);
        out.push_back(static_cast<double>(j) + stream.uniform() * (1.0 - 2.0 * a));
    }
    return out;
}

IntervalMaxTable interval_max(std::span<const double> samples) {
    require_samples(samples);
    IntervalMaxTable table;
    for (double x : samples) {
        const double fl = std::floor(x);
        std::size_t j = static_cast<std::size_t>(fl);
        double offset = x - fl;
        if (offset == 0.0 && j >= 1) {
            j -= 1;
            offset = 1.0;
        }
        auto [it, inserted] = table.emplace(j, offset);
        if (!inserted) {
            it->second = std::max(it->second, offset);
        }
    }
    return table;
}

HFit best_h_fit(std::span<const double> samples) {
    if (samples.empty()) {
        throw InvalidDataset("tail chain fit needs at least one sample");
    }
    const IntervalMaxTable table = interval_max(samples);
    const std::size_t j_star = table.rbegin()->first;
    HFit fit;
    fit.alphas.assign(j_star + 1, 0.25);
    for (const auto& [j, m] : table) {
        fit.alphas[j] = std::min(0.25, (1.0 - m) / 2.0);
    }

    std::vector<double> counts(j_star + 1, 0.0);
    for (double x : samples) {
        const double fl = std::floor(x);
        auto j = static_cast<std::size_t>(fl);
        if (x == fl && j >= 1) {
            j -= 1;
        }
        counts[j] += 1.0;
    }
    double prefix = 0.0;
    for (std::size_t j = 0; j <= j_star; ++j) {
        if (counts[j] > 0.0) {
            fit.log_likelihood += counts[j] * (log_gain(fit.alphas[j]) + prefix);
        }
        prefix += std::log(fit.alphas[j]);
    }
    return fit;
}

GFit best_g_fit(const TailChainFamily& fam, std::span<const double> samples, int J) {
    if (J < 2) {
        throw InvalidArgument("best_g_fit needs J >= 2");
    }
    require_samples(samples);
    GFit fit;
    const double Jd = static_cast<double>(J);
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    if (!sorted.empty() && sorted.back() > Jd) {
        fit.log_likelihood = kNegInf;
        return fit;
    }
    const double lf = fam.log_f(J);
    const double f = std::exp(lf);
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), Jd - 1.0);
    for (auto it = first; it != sorted.end(); ++it) {
        const double left = *it;
        const auto count = static_cast<std::size_t>(std::upper_bound(it, sorted.end(), left + f) - it);
        if (count > fit.spike_count) {
            fit.spike_count = count;
            fit.beta = Jd - left;  // exact: left lies in [J-1, J]
        }
    }
    const double k = static_cast<double>(fit.spike_count);
    const double off = static_cast<double>(sorted.size()) - k;
    fit.log_likelihood = -off * std::log(2.0 * Jd);
    if (fit.spike_count > 0) {
        fit.log_likelihood += k * (-std::numbers::ln2 - lf + std::log1p(f / Jd));
    }
    return fit;
}

double tail_log_likelihood(const TailChainFamily& fam, const TailChainParams& p, std::span<const double> samples) {
    double s = 0.0;
    for (double x : samples) {
        s += tail_log_pdf(fam, p, x);
    }
    return s;
}

TailChainParams tail_exact_mle(const TailChainFamily& fam, const Dataset& dataset) {
    return tail_exact_mle(fam, dataset.values());
}

TailChainParams tail_exact_mle(const TailChainFamily& fam, std::span<const double> samples) {
    HFit h = best_h_fit(samples);
    const double x_max = *std::max_element(samples.begin(), samples.end());
    const int J0 = std::max(fam.min_J, static_cast<int>(std::ceil(x_max)));
    TailChainParams best = TailChainParams::make_h(std::move(h.alphas));
    double best_ll = h.log_likelihood;
    for (int J = J0; J <= J0 + 2; ++J) {
        const GFit g = best_g_fit(fam, samples, J);
        if (g.log_likelihood > best_ll) {
            best_ll = g.log_likelihood;
            best = TailChainParams::make_g(g.beta, J);
        }
    }
    return best;
}

}  // namespace collapse_lab::tail
