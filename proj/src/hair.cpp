#include "essdyn/hair.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace essdyn {

namespace {

using std::numbers::pi;

// Deterministic uniform double in [0, 1); fixed bit recipe so reports are
// reproducible across standard libraries.
double next_double(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

}  // namespace

// --- regions -------------------------------------------------------------

bool region_membership(const RegionSpec& region, Complex z) {
    Complex zp = z - Complex(2.0 * pi * region.translate_k, 0.0);
    switch (region.kind) {
        case RegionSpec::Kind::T0Disc:
            return std::abs(zp + pi / 8.0) < pi / 8.0;
        case RegionSpec::Kind::V0:
            return std::abs(zp + pi / 8.0) < pi / 8.0 &&
                   std::abs(zp - Complex(0.0, 2.0 / pi)) >= 2.0 / pi &&
                   std::abs(zp + Complex(0.0, 2.0 / pi)) >= 2.0 / pi;
        case RegionSpec::Kind::UpperHalfplane:
            return z.imag() > region.height;
    }
    return false;
}

AbsorbingReport verify_absorbing(const MapSpec& map, const RegionSpec& region,
                                 int sample_count, std::uint64_t seed) {
    AbsorbingReport rep;
    rep.seed = seed;
    std::mt19937_64 rng(seed);
    const Complex shift(2.0 * pi * region.translate_k, 0.0);
    const double band = 1e-6;
    bool first = true;

    while (rep.samples < sample_count) {
        Complex zp(-pi / 4.0 * next_double(rng),
                   -pi / 4.0 + pi / 2.0 * next_double(rng));
        // Open-region sampling: keep clear of the boundary and the tangency
        // point at the origin.
        double m_t0 = pi / 8.0 - std::abs(zp + pi / 8.0);
        double m_cp = std::abs(zp - Complex(0.0, 2.0 / pi)) - 2.0 / pi;
        double m_cm = std::abs(zp + Complex(0.0, 2.0 / pi)) - 2.0 / pi;
        if (m_t0 <= band || m_cp <= band || m_cm <= band || std::abs(zp) <= band)
            continue;
        Complex z = zp + shift;
        EvalResult r = evaluate(map, SpherePoint::finite(z));
        if (!r.is_finite()) continue;
        Complex w = r.value.value;
        Complex wp = w - shift;
        ++rep.samples;

        double ma = std::min({pi / 8.0 - std::abs(wp + pi / 8.0),
                              std::abs(wp - Complex(0.0, 2.0 / pi)) - 2.0 / pi,
                              std::abs(wp + Complex(0.0, 2.0 / pi)) - 2.0 / pi});
        double mb = std::min(w.real() - z.real(), -wp.real());
        double mc = std::abs(zp.imag()) - std::abs(wp.imag());
        if (ma < 0) ++rep.violations_a;
        if (mb < 0) ++rep.violations_b;
        if (mc < 0) ++rep.violations_c;
        if (first) {
            rep.min_margin_a = ma;
            rep.min_margin_b = mb;
            rep.min_margin_c = mc;
            first = false;
        } else {
            rep.min_margin_a = std::min(rep.min_margin_a, ma);
            rep.min_margin_b = std::min(rep.min_margin_b, mb);
            rep.min_margin_c = std::min(rep.min_margin_c, mc);
        }
    }
    return rep;
}

nlohmann::json absorbing_report_to_json(const RegionSpec& region, const AbsorbingReport& r) {
    nlohmann::json j;
    j["region"] = region.kind == RegionSpec::Kind::V0 ? "V0" : "T0";
    j["translate_k"] = region.translate_k;
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    j["violations"] = {{"A", r.violations_a}, {"B", r.violations_b}, {"C", r.violations_c}};
    j["min_margins"] = {{"A", r.min_margin_a}, {"B", r.min_margin_b}, {"C", r.min_margin_c}};
    return j;
}

TranslationReport verify_translation(const MapSpec& map, double height, int sample_count,
                                     std::uint64_t seed) {
    TranslationReport rep;
    rep.seed = seed;
    rep.height = height;
    std::mt19937_64 rng(seed);
    while (rep.samples < sample_count) {
        Complex w(-10.0 + 20.0 * next_double(rng), height + 6.0 * next_double(rng));
        EvalResult r = evaluate(map, SpherePoint::finite(w));
        if (!r.is_finite()) continue;
        ++rep.samples;
        rep.max_deviation = std::max(rep.max_deviation, std::abs(r.value.value - (w + 1.0)));
    }
    return rep;
}

nlohmann::json translation_report_to_json(const TranslationReport& r) {
    nlohmann::json j;
    j["region"] = "halfplane";
    j["height"] = r.height;
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    j["max_deviation"] = r.max_deviation;
    return j;
}

// --- hairs ---------------------------------------------------------------

namespace {

bool endpoint_is_singular(const MapSpec& map, const SpherePoint& e) {
    OrbitRecord orbit = iterate_orbit(map, e, 8);
    return orbit.termination == OrbitRecord::Termination::HitSingularity;
}

}  // namespace

HairTrace trace_hair(const MapSpec& map, const CurveSpec& curve, const SpherePoint& endpoint,
                     const SeparatingCover& cover, const std::vector<int>& budgets,
                     int sample_count) {
    if (sample_count < 8) throw std::invalid_argument("trace_hair: sample_count >= 8");
    if (curve.explicit_samples.empty()) {
        if (!endpoint.at_infinity && curve.from == endpoint.value)
            throw DegenerateCurve("zero-length curve");
        if (endpoint.at_infinity && curve.from == Complex(0.0))
            throw DegenerateCurve("zero-length curve");
    } else if (curve.explicit_samples.size() < 2 ||
               curve.explicit_samples.front() == curve.explicit_samples.back()) {
        throw DegenerateCurve("degenerate sample list");
    }
    if (!endpoint_is_singular(map, endpoint))
        throw EndpointNotSingular("declared endpoint is not in the singular set");

    HairTrace trace;
    trace.endpoint = endpoint;
    for (int i = 0; i < sample_count; ++i) {
        double t = std::ldexp(1.0, -i);
        Complex z;
        if (!curve.explicit_samples.empty()) {
            if (i >= int(curve.explicit_samples.size())) break;
            z = curve.explicit_samples[i];
        } else if (endpoint.at_infinity) {
            z = curve.from / t;
        } else {
            z = endpoint.value + t * (curve.from - endpoint.value);
        }
        HairTrace::Sample s;
        s.t = t;
        s.z = SpherePoint::finite(z);
        s.cls = classify_escape(map, s.z, cover, budgets);
        trace.samples.push_back(std::move(s));
    }

    bool all_escaping = true;
    for (const auto& s : trace.samples) {
        switch (s.cls.kind) {
            case EscapeClass::Kind::EscapingToPoint:
            case EscapeClass::Kind::EscapingPeriodic:
            case EscapeClass::Kind::EscapingOscillating:
            case EscapeClass::Kind::EscapingWandering:
                break;
            default:
                all_escaping = false;
        }
    }
    if (all_escaping && !trace.samples.empty()) {
        bool all_equal = true;
        for (size_t i = 1; i < trace.samples.size() && all_equal; ++i) {
            auto eq = eventually_equal(trace.samples[0].cls.itinerary,
                                       trace.samples[i].cls.itinerary);
            if (!eq.equal) {
                all_equal = false;
                std::ostringstream os;
                os << "samples 0 and " << i << " disagree";
                trace.disagreement = os.str();
            }
        }
        if (all_equal) trace.common_itinerary = trace.samples[0].cls.itinerary;
    } else {
        trace.disagreement = "not all samples escape";
    }
    return trace;
}

std::string hair_to_csv(const HairTrace& trace) {
    std::ostringstream os;
    os.precision(17);
    os << "t,re,im,class\n";
    for (const auto& s : trace.samples)
        os << s.t << "," << s.z.value.real() << "," << s.z.value.imag() << ","
           << escape_kind_name(s.cls.kind) << "\n";
    return os.str();
}

std::string singular_orbit_class_name(SingularOrbitClass c) {
    switch (c) {
        case SingularOrbitClass::Periodic: return "periodic";
        case SingularOrbitClass::PrePeriodic: return "pre-periodic";
        case SingularOrbitClass::Oscillating: return "oscillating";
        case SingularOrbitClass::Wandering: return "wandering";
        case SingularOrbitClass::Undecided: return "undecided";
    }
    return "?";
}

namespace {

// Forward orbit of a hair sample, padded with infinity once the iterates
// leave the finite plane for good.
std::vector<SpherePoint> padded_orbit(const MapSpec& map, const SpherePoint& z0, int steps) {
    std::vector<SpherePoint> out{z0};
    SpherePoint cur = z0;
    for (int k = 0; k < steps; ++k) {
        if (cur.at_infinity) {
            out.push_back(cur);
            continue;
        }
        EvalResult r = evaluate(map, cur);
        switch (r.kind) {
            case EvalResult::Kind::Finite:
                cur = r.value;
                break;
            case EvalResult::Kind::AtInfinity:
            case EvalResult::Kind::OverflowedToInfinity:
                cur = SpherePoint::infinity();
                break;
            case EvalResult::Kind::UndefinedSingular:
                cur = r.nearest_singularity;
                break;
        }
        out.push_back(cur);
    }
    return out;
}

}  // namespace

SingularOrbit singular_orbit(const MapSpec& map, const HairTrace& hair, int steps) {
    SingularOrbit so;
    if (hair.samples.size() < 3) throw std::invalid_argument("singular_orbit: need >= 3 samples");

    // The three samples nearest the endpoint, at parameters t, t/2, t/4.
    size_t n = hair.samples.size();
    std::vector<std::vector<SpherePoint>> orbits;
    for (size_t j = n - 3; j < n; ++j)
        orbits.push_back(padded_orbit(map, hair.samples[j].z, steps));

    so.points.push_back(hair.endpoint);
    so.residuals.push_back(0.0);

    for (int k = 1; k <= steps; ++k) {
        const SpherePoint &a = orbits[0][k], &b = orbits[1][k], &c = orbits[2][k];
        SpherePoint limit;
        double residual = 0.0;
        bool to_inf = a.at_infinity || b.at_infinity || c.at_infinity;
        if (!to_inf) {
            // Growing magnitudes toward the endpoint side mean the limit is
            // infinity even though every probe is still finite.
            double ma = std::abs(a.value), mb = std::abs(b.value), mc = std::abs(c.value);
            to_inf = mc > 1.5 * mb && mb > 1.5 * ma && mc > 100.0;
        }
        if (to_inf) {
            limit = SpherePoint::infinity();
            residual = chordal(c, limit);
        } else {
            // Richardson step toward t = 0 from the two finest pairs.
            Complex l1 = 2.0 * b.value - a.value;
            Complex l2 = 2.0 * c.value - b.value;
            if (chordal(l1, l2) > 1e-5) throw LimitDidNotStabilize(k);
            limit = SpherePoint::finite(l2);
            residual = chordal(l1, l2);
        }
        // Snap finite limits to the nearest declared singularity when close.
        if (!limit.at_infinity) {
            auto near = map.singularity_rule.nearest_finite(limit.value);
            if (near && near->second <= 1e-3) {
                residual = std::max(residual, near->second);
                limit = SpherePoint::finite(near->first);
            }
        }
        so.points.push_back(limit);
        so.residuals.push_back(residual);
    }

    // Classify the finite prefix by grouping equal points (chordal 1e-3).
    auto same = [](const SpherePoint& p, const SpherePoint& q) {
        return chordal(p, q) <= 1e-3;
    };
    const auto& pts = so.points;
    int m = int(pts.size());
    int period = 0;
    for (int p = 1; p <= m / 2 && period == 0; ++p) {
        bool ok = true;
        for (int i = 0; i + p < m && ok; ++i) ok = same(pts[i], pts[i + p]);
        if (ok) period = p;
    }
    if (period > 0) {
        so.classification = SingularOrbitClass::Periodic;
        so.period = period;
        return so;
    }
    // Repeat after a transient?
    for (int start = 1; start < m / 2; ++start) {
        for (int p = 1; start + 2 * p <= m; ++p) {
            bool ok = true;
            for (int i = start; i + p < m && ok; ++i) ok = same(pts[i], pts[i + p]);
            if (ok) {
                so.classification = SingularOrbitClass::PrePeriodic;
                so.period = p;
                return so;
            }
        }
    }
    // Count distinct points and repeats.
    std::vector<SpherePoint> distinct;
    int repeated = 0;
    for (const auto& p : pts) {
        bool found = false;
        for (const auto& d : distinct)
            if (same(p, d)) {
                found = true;
                ++repeated;
                break;
            }
        if (!found) distinct.push_back(p);
    }
    if (int(distinct.size()) == m) {
        so.classification = SingularOrbitClass::Wandering;
        so.heuristic_flag = true;
    } else if (distinct.size() >= 2 && repeated >= 2) {
        so.classification = SingularOrbitClass::Oscillating;
    }
    return so;
}

CurveSpec h_infinity_hair(const MapSpec& h, int depth) {
    (void)h;
    // Samples marching out along the near-invariant band Im z ~ pi where
    // -e^z points back up the positive real axis; every forward image of the
    // tail keeps endpoint infinity.
    CurveSpec curve;
    for (int i = 0; i < 24; ++i) {
        double x = 10.0 + 2.0 * (depth + i);
        curve.explicit_samples.push_back(Complex(x, pi + pi * std::exp(-x)));
    }
    curve.from = curve.explicit_samples.front();
    return curve;
}

}  // namespace essdyn
