#include "collapse_lab/metrics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

#include "collapse_lab/families.hpp"

namespace collapse_lab::metrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNormTolerance = 1e-9;

void require_normalized(const PiecewiseDensity& d) {
    const double m = d.total_mass();
    if (!(std::abs(m - 1.0) <= kNormTolerance)) {
        throw InvalidArgument("density is not normalised (total mass " + std::to_string(m) + ")");
    }
    for (const Segment& s : d.segments) {
        if (!(s.mass >= 0.0)) {
            throw InvalidArgument("negative segment mass");
        }
    }
}

struct Split {
    std::vector<Segment> continuous;
    std::vector<Segment> atoms;
};

Split split(const PiecewiseDensity& d) {
    Split out;
    for (const Segment& s : d.segments) {
        (s.is_atom() ? out.atoms : out.continuous).push_back(s);
    }
    return out;
}

// Continuous segment containing x, assuming sorted disjoint segments.
const Segment* locate(const std::vector<Segment>& segs, double x) {
    auto it = std::upper_bound(segs.begin(), segs.end(), x, [](double v, const Segment& s) { return v < s.left; });
    if (it == segs.begin()) {
        return nullptr;
    }
    --it;
    return x <= it->right() ? &*it : nullptr;
}

double height(const Segment* s) { return s ? s->mass / s->width : 0.0; }

std::vector<double> boundaries(const std::vector<Segment>& a, const std::vector<Segment>& b) {
    std::vector<double> out;
    for (const auto* list : {&a, &b}) {
        for (const Segment& s : *list) {
            out.push_back(s.left);
            out.push_back(s.right());
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

const Segment* atom_at(const std::vector<Segment>& atoms, double x) {
    for (const Segment& a : atoms) {
        if (a.left == x) {
            return &a;
        }
    }
    return nullptr;
}

}  // namespace

bool Segment::is_atom() const { return width < DBL_MIN || left + width == left; }

double PiecewiseDensity::total_mass() const {
    double m = 0.0;
    for (const Segment& s : segments) {
        m += s.mass;
    }
    return m;
}

double PiecewiseDensity::continuous_height(double x) const {
    double h = 0.0;
    for (const Segment& s : segments) {
        if (!s.is_atom() && x >= s.left && x <= s.right()) {
            h = std::max(h, s.mass / s.width);
        }
    }
    return h;
}

Segment uniform_component(double left, double width, double log_width, double mass) {
    return {left, width, log_width, mass};
}

Segment uniform_component(double left, double width, double mass) {
    return {left, width, std::log(width), mass};
}

PiecewiseDensity merge_components(std::vector<Segment> components) {
    std::vector<Segment> continuous, atoms;
    for (const Segment& c : components) {
        if (!(c.mass > 0.0)) {
            continue;
        }
        if (!c.is_atom()) {
            continuous.push_back(c);
            continue;
        }
        auto it = std::find_if(atoms.begin(), atoms.end(), [&](const Segment& a) { return a.left == c.left; });
        if (it == atoms.end()) {
            atoms.push_back(c);
        } else {
            it->mass += c.mass;
            it->log_width = std::max(it->log_width, c.log_width);
            it->width = std::max(it->width, c.width);
        }
    }

    std::vector<double> cuts;
    for (const Segment& c : continuous) {
        cuts.push_back(c.left);
        cuts.push_back(c.right());
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    PiecewiseDensity out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k], b = cuts[k + 1];
        double mass = 0.0;
        for (const Segment& c : continuous) {
            if (c.left <= a && c.right() >= b) {
                mass += (a == c.left && b == c.right()) ? c.mass : c.mass * ((b - a) / c.width);
            }
        }
        if (mass > 0.0) {
            out.segments.push_back({a, b - a, std::log(b - a), mass});
        }
    }
    out.segments.insert(out.segments.end(), atoms.begin(), atoms.end());
    std::stable_sort(out.segments.begin(), out.segments.end(),
                     [](const Segment& x, const Segment& y) { return x.left < y.left; });
    return out;
}

PiecewiseDensity to_piecewise(const spike::SpikeMixtureFamily& fam, const spike::SpikeMixtureParams& p) {
    spike::validate(fam, p);
    const double a = p.alpha;
    const double lf = fam.log_f(a);
    return merge_components({
        uniform_component(0.0, 1.0, 0.5),
        uniform_component(0.0, 1.0 - 2.0 * a, (1.0 - a) / 2.0),
        uniform_component(2.0, 1.0, a / 4.0),
        uniform_component(p.mu, std::exp(lf), lf, a / 4.0),
    });
}

PiecewiseDensity to_piecewise(const tail::TailChainFamily& fam, const tail::TailChainParams& p) {
    tail::validate(p);
    if (p.s == tail::Selector::g) {
        const double lf = fam.log_f(p.J);
        return merge_components({
            uniform_component(0.0, static_cast<double>(p.J), 0.5),
            uniform_component(p.J - p.beta, std::exp(lf), lf, 0.5),
        });
    }
    std::vector<Segment> parts;
    double through = 1.0;  // Π_{k<j} α_k
    for (std::size_t j = 0; through > 0.0; ++j) {
        const double a = j < p.alphas.size() ? p.alphas[j] : 0.0;
        parts.push_back(uniform_component(static_cast<double>(j), 1.0 - 2.0 * a, (1.0 - a) * through));
        through *= a;
    }
    return merge_components(std::move(parts));
}

double tv_exact(const PiecewiseDensity& p, const PiecewiseDensity& q) {
    require_normalized(p);
    require_normalized(q);
    const Split sp = split(p), sq = split(q);

    double total = 0.0;
    const std::vector<double> cuts = boundaries(sp.continuous, sq.continuous);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k], b = cuts[k + 1];
        const double mid = a + 0.5 * (b - a);
        total += std::abs(height(locate(sp.continuous, mid)) - height(locate(sq.continuous, mid))) * (b - a);
    }

    for (const Segment& x : sp.atoms) {
        const Segment* y = atom_at(sq.atoms, x.left);
        if (!y) {
            total += x.mass;
            continue;
        }
        // Both atoms start at the same point; the narrower one sits inside the wider.
        const Segment& narrow = x.log_width <= y->log_width ? x : *y;
        const Segment& wide = x.log_width <= y->log_width ? *y : x;
        const double r = std::exp(narrow.log_width - wide.log_width);
        total += std::abs(narrow.mass - wide.mass * r) + wide.mass * (1.0 - r);
    }
    for (const Segment& y : sq.atoms) {
        if (!atom_at(sp.atoms, y.left)) {
            total += y.mass;
        }
    }
    return std::clamp(0.5 * total, 0.0, 1.0);
}

double kl_piecewise(const PiecewiseDensity& p, const PiecewiseDensity& q) {
    require_normalized(p);
    require_normalized(q);
    const Split sp = split(p), sq = split(q);

    double total = 0.0;
    const std::vector<double> cuts = boundaries(sp.continuous, sq.continuous);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k], b = cuts[k + 1];
        const double mid = a + 0.5 * (b - a);
        const double hp = height(locate(sp.continuous, mid));
        if (hp == 0.0) {
            continue;
        }
        const double hq = height(locate(sq.continuous, mid));
        if (hq == 0.0) {
            return kInf;
        }
        total += hp * (b - a) * std::log(hp / hq);
    }

    for (const Segment& x : sp.atoms) {
        const double log_hp = std::log(x.mass) - x.log_width;
        const Segment* y = atom_at(sq.atoms, x.left);
        double inside = 0.0;  // fraction of the p atom covered by a q atom
        if (y) {
            inside = x.log_width <= y->log_width ? 1.0 : std::exp(y->log_width - x.log_width);
            total += x.mass * inside * (log_hp - (std::log(y->mass) - y->log_width));
        }
        if (inside < 1.0) {
            const double hq = q.continuous_height(x.left);
            if (hq == 0.0) {
                return kInf;
            }
            total += x.mass * (1.0 - inside) * (log_hp - std::log(hq));
        }
    }
    return std::max(total, 0.0);
}

bool pinsker_holds(const PiecewiseDensity& p, const PiecewiseDensity& q, double slack) {
    if (!(slack >= 0.0)) {
        throw InvalidArgument("slack must be non-negative");
    }
    const double kl = kl_piecewise(p, q);
    if (std::isinf(kl)) {
        return true;
    }
    return tv_exact(p, q) <= std::sqrt(std::max(kl, 0.0) / 2.0) + slack;
}

namespace {

PiecewiseDensity construction_density(const ParamPoint& point, const ConstructionOptions& construction) {
    if (point.family == FamilyId::spike_mixture) {
        return to_piecewise(spike::SpikeMixtureFamily(construction.spike_scale), spike::from_point(point));
    }
    return to_piecewise(tail::TailChainFamily::from_options(construction), tail::from_point(point));
}

void require_same_family(const ParamPoint& a, const ParamPoint& b) {
    if (a.family != b.family) {
        throw InvalidArgument("metric between different families");
    }
}

}  // namespace

double tv_distance(const ParamPoint& a, const ParamPoint& b, const ConstructionOptions& construction) {
    require_same_family(a, b);
    if (is_smooth(a.family)) {
        return families::tv_numeric(a, b);
    }
    return tv_exact(construction_density(a, construction), construction_density(b, construction));
}

double kl_divergence(const ParamPoint& a, const ParamPoint& b, const ConstructionOptions& construction) {
    require_same_family(a, b);
    if (is_smooth(a.family)) {
        return families::kl(a, b);
    }
    return kl_piecewise(construction_density(a, construction), construction_density(b, construction));
}

}  // namespace collapse_lab::metrics
