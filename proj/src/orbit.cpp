#include "essdyn/orbit.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace essdyn {

namespace {

constexpr double kConvStep = 1e-13;
constexpr int kConvRun = 5;

// Bit-exact key for cycle detection.
struct PointKey {
    std::uint64_t re = 0, im = 0;
    bool inf = false;
    bool operator==(const PointKey&) const = default;
};

struct PointKeyHash {
    size_t operator()(const PointKey& k) const {
        return std::hash<std::uint64_t>()(k.re * 1000003u ^ k.im) ^ (k.inf ? 0x9e3779b9u : 0);
    }
};

PointKey key_of(const SpherePoint& p) {
    PointKey k;
    k.inf = p.at_infinity;
    if (!p.at_infinity) {
        double re = p.value.real(), im = p.value.imag();
        std::memcpy(&k.re, &re, 8);
        std::memcpy(&k.im, &im, 8);
    }
    return k;
}

const char* termination_name(OrbitRecord::Termination t) {
    switch (t) {
        case OrbitRecord::Termination::BudgetExhausted: return "BudgetExhausted";
        case OrbitRecord::Termination::HitSingularity: return "HitSingularity";
        case OrbitRecord::Termination::OverflowedToInfinity: return "OverflowedToInfinity";
        case OrbitRecord::Termination::ConvergedToPoint: return "ConvergedToPoint";
        case OrbitRecord::Termination::EnteredCycle: return "EnteredCycle";
    }
    return "?";
}

}  // namespace

namespace {

// Open-addressed first-occurrence table; avoids a node allocation per orbit
// step. Values are orbit indices + 1 (0 = empty slot).
struct SeenTable {
    std::vector<PointKey> keys;
    std::vector<int> slots;
    size_t mask;

    explicit SeenTable(int budget) {
        size_t cap = 16;
        while (cap < size_t(budget + 2) * 2) cap <<= 1;
        keys.resize(cap);
        slots.assign(cap, 0);
        mask = cap - 1;
    }

    // Returns the existing index for key, or inserts idx and returns idx.
    int find_or_insert(const PointKey& k, int idx) {
        size_t h = PointKeyHash{}(k) & mask;
        while (slots[h] != 0) {
            if (keys[h] == k) return slots[h] - 1;
            h = (h + 1) & mask;
        }
        keys[h] = k;
        slots[h] = idx + 1;
        return idx;
    }
};

// chordal(p, q) < eps, evaluated in squared form without square roots.
bool chordal_step_below(const SpherePoint& p, const SpherePoint& q, double eps) {
    if (p.at_infinity && q.at_infinity) return true;
    if (p.at_infinity || q.at_infinity) {
        const Complex& f = p.at_infinity ? q.value : p.value;
        double n = std::norm(f);
        if (!std::isfinite(n)) return chordal(p, q) < eps;
        return 4.0 < eps * eps * (1.0 + n);
    }
    double np = std::norm(p.value), nq = std::norm(q.value);
    double nd = std::norm(p.value - q.value);
    if (!std::isfinite(np) || !std::isfinite(nq) || !std::isfinite(nd))
        return chordal(p, q) < eps;
    return 4.0 * nd < eps * eps * (1.0 + np) * (1.0 + nq);
}

}  // namespace

OrbitRecord iterate_orbit(const MapSpec& map, const SpherePoint& z0, int budget) {
    OrbitRecord rec;
    rec.start = z0;
    rec.iterates.reserve(size_t(budget) + 1);
    rec.iterates.push_back(z0);
    SeenTable seen(budget);
    seen.find_or_insert(key_of(z0), 0);
    int conv_run = 0;

    for (int step = 0; step < budget; ++step) {
        const SpherePoint& cur = rec.iterates.back();
        EvalResult r = evaluate(map, cur);
        SpherePoint next;
        switch (r.kind) {
            case EvalResult::Kind::Finite:
                next = r.value;
                break;
            case EvalResult::Kind::AtInfinity:
                next = SpherePoint::infinity();
                break;
            case EvalResult::Kind::UndefinedSingular:
                rec.termination = OrbitRecord::Termination::HitSingularity;
                rec.singularity = r.nearest_singularity;
                return rec;
            case EvalResult::Kind::OverflowedToInfinity:
                if (singular_guard_hit(map, SpherePoint::infinity()) ||
                    map.singularity_rule.carries_infinity_syntactically()) {
                    rec.termination = OrbitRecord::Termination::OverflowedToInfinity;
                    return rec;
                }
                next = SpherePoint::infinity();
                break;
        }

        if (chordal_step_below(next, cur, kConvStep))
            ++conv_run;
        else
            conv_run = 0;

        int at = int(rec.iterates.size());
        int first = seen.find_or_insert(key_of(next), at);
        rec.iterates.push_back(next);

        if (conv_run >= kConvRun) {
            rec.termination = OrbitRecord::Termination::ConvergedToPoint;
            rec.limit = next;
            return rec;
        }
        // Exact revisit of a non-adjacent orbit point: a genuine cycle. An
        // exact fixed step is left to the convergence detector above.
        if (first != at && first != at - 1) {
            rec.termination = OrbitRecord::Termination::EnteredCycle;
            return rec;
        }
    }
    rec.termination = OrbitRecord::Termination::BudgetExhausted;
    return rec;
}

std::string orbit_to_csv(const OrbitRecord& orbit) {
    std::ostringstream os;
    os.precision(17);
    os << "step,re,im\n";
    for (size_t i = 0; i < orbit.iterates.size(); ++i) {
        const SpherePoint& p = orbit.iterates[i];
        if (p.at_infinity)
            os << i << ",inf,inf\n";
        else
            os << i << "," << p.value.real() << "," << p.value.imag() << "\n";
    }
    os << "# termination: " << termination_name(orbit.termination);
    if (orbit.termination == OrbitRecord::Termination::HitSingularity)
        os << " at " << orbit.singularity.str();
    os << "\n";
    return os.str();
}

namespace {

std::vector<OmegaEstimate::Cluster> cluster_tail(const std::vector<SpherePoint>& pts,
                                                 size_t begin, double rho) {
    std::vector<OmegaEstimate::Cluster> cs;
    for (size_t i = begin; i < pts.size(); ++i) {
        const SpherePoint& p = pts[i];
        bool placed = false;
        for (auto& c : cs) {
            double d = chordal(p, c.center);
            if (d <= rho) {
                c.radius = std::max(c.radius, d);
                ++c.hits;
                placed = true;
                break;
            }
        }
        if (!placed) cs.push_back({p, 0.0, 1});
    }
    // Merge until pairwise disjoint at the reported radii.
    bool merged = true;
    while (merged) {
        merged = false;
        for (size_t i = 0; i < cs.size() && !merged; ++i)
            for (size_t j = i + 1; j < cs.size() && !merged; ++j) {
                double d = chordal(cs[i].center, cs[j].center);
                if (d <= cs[i].radius + cs[j].radius) {
                    cs[i].radius = std::max(cs[i].radius, d + cs[j].radius);
                    cs[i].hits += cs[j].hits;
                    cs.erase(cs.begin() + j);
                    merged = true;
                }
            }
    }
    return cs;
}

}  // namespace

OmegaEstimate omega_limit(const MapSpec& map, const OrbitRecord& orbit, int tail,
                          double cluster_radius) {
    (void)map;
    if (orbit.termination == OrbitRecord::Termination::HitSingularity)
        throw std::invalid_argument("omega_limit: orbit hit a singularity");
    if (int(orbit.iterates.size()) < tail) throw TailTooShort("omega_limit: tail too short");

    OmegaEstimate est;
    est.tail_length = tail;
    est.clusters = cluster_tail(orbit.iterates, orbit.iterates.size() - tail, cluster_radius);

    est.confident = false;
    if (int(orbit.iterates.size()) >= 2 * tail) {
        auto wide =
            cluster_tail(orbit.iterates, orbit.iterates.size() - 2 * tail, cluster_radius);
        if (wide.size() == est.clusters.size()) {
            est.confident = true;
            for (const auto& c : est.clusters) {
                bool matched = false;
                for (const auto& w : wide)
                    if (chordal(c.center, w.center) <= cluster_radius) matched = true;
                if (!matched) est.confident = false;
            }
        }
    }
    return est;
}

std::string cycle_class_name(CycleClass c) {
    switch (c) {
        case CycleClass::SuperAttracting: return "super-attracting";
        case CycleClass::Attracting: return "attracting";
        case CycleClass::Repelling: return "repelling";
        case CycleClass::RationallyIndifferent: return "rationally-indifferent";
        case CycleClass::IrrationallyIndifferent: return "irrationally-indifferent";
    }
    return "?";
}

CycleClass classify_cycle(Complex multiplier) {
    double a = std::abs(multiplier);
    if (a <= 1e-12) return CycleClass::SuperAttracting;
    if (std::abs(a - 1.0) <= 1e-9) {
        for (int q = 1; q <= 64; ++q)
            for (int p = 0; p < q; ++p) {
                Complex root = std::exp(Complex(0, 2.0 * std::numbers::pi * p / q));
                if (std::abs(multiplier - root) <= 1e-6)
                    return CycleClass::RationallyIndifferent;
            }
        return CycleClass::IrrationallyIndifferent;
    }
    return a < 1.0 ? CycleClass::Attracting : CycleClass::Repelling;
}

std::optional<CycleRecord> refine_cycle(const MapSpec& map, const SpherePoint& seed,
                                        int period) {
    if (period < 1 || seed.at_infinity) return std::nullopt;

    // One pass of f^p along with the chain-rule derivative product.
    auto chain = [&](Complex z, Complex& fp, Complex& dfp) -> bool {
        Complex cur = z, prod = 1.0;
        for (int i = 0; i < period; ++i) {
            EvalResult d = derivative(map, SpherePoint::finite(cur));
            EvalResult v = evaluate(map, SpherePoint::finite(cur));
            if (!d.is_finite() || !v.is_finite()) return false;
            prod *= d.value.value;
            cur = v.value.value;
        }
        fp = cur;
        dfp = prod;
        return true;
    };

    Complex z = seed.value;
    bool converged = false;
    for (int step = 0; step < 60; ++step) {
        Complex fp, dfp;
        if (!chain(z, fp, dfp)) return std::nullopt;
        Complex denom = dfp - 1.0;
        if (denom == Complex(0.0)) break;
        Complex dz = (fp - z) / denom;
        z -= dz;
        if (std::isnan(z.real()) || std::isnan(z.imag()) || std::abs(z) > 1e6)
            return std::nullopt;
        if (std::abs(dz) <= 1e-12) {
            converged = true;
            break;
        }
    }
    Complex fp, dfp;
    if (!chain(z, fp, dfp) || std::abs(fp - z) > 1e-9 || !converged) return std::nullopt;

    CycleRecord rec;
    Complex cur = z;
    for (int i = 0; i < period; ++i) {
        rec.points.push_back(SpherePoint::finite(cur));
        EvalResult v = evaluate(map, SpherePoint::finite(cur));
        if (!v.is_finite()) return std::nullopt;
        cur = v.value.value;
    }
    rec.multiplier = dfp;
    rec.cls = classify_cycle(rec.multiplier);
    return rec;
}

}  // namespace essdyn
