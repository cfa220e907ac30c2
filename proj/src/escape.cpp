#include "essdyn/escape.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace essdyn {

namespace {

// Euclidean radius of the complement {|z| > R} matching a chordal ball of
// radius r at infinity: chordal(z, inf) < r  <=>  |z| > sqrt(4/r^2 - 1).
double infinity_ball_floor(double r) { return std::sqrt(4.0 / (r * r) - 1.0); }

}  // namespace

bool SeparatingCover::in_ball(const SpherePoint& z, int k) const {
    const SpherePoint& t = targets[k];
    double r = radii[k];
    if (t.at_infinity) return chordal(z, t) < r;
    if (z.at_infinity) return false;
    return std::norm(z.value - t.value) < r * r;
}

int SeparatingCover::symbol_of(const SpherePoint& z) const {
    for (int k = 0; k < int(targets.size()); ++k)
        if (in_ball(z, k)) return k;
    return kOutside;
}

SeparatingCover build_cover(const std::vector<SpherePoint>& targets, double radius) {
    if (targets.empty()) throw std::invalid_argument("build_cover: no targets");
    SeparatingCover c;
    c.targets = targets;
    c.radii.assign(targets.size(), radius);
    for (size_t k = 0; k < targets.size(); ++k)
        for (size_t j = k + 1; j < targets.size(); ++j) {
            const SpherePoint &a = targets[k], &b = targets[j];
            bool overlap;
            if (a.at_infinity && b.at_infinity)
                overlap = true;  // duplicate target
            else if (a.at_infinity || b.at_infinity) {
                const Complex fin = a.at_infinity ? b.value : a.value;
                overlap = std::abs(fin) + radius > infinity_ball_floor(radius);
            } else
                overlap = std::abs(a.value - b.value) < 2 * radius;
            if (overlap) throw OverlappingCover(int(k), int(j));
        }
    return c;
}

ItinerarySeq extract_itinerary(const MapSpec& map, const SpherePoint& z0,
                               const SeparatingCover& cover, int budget) {
    return extract_itinerary(iterate_orbit(map, z0, budget), cover);
}

ItinerarySeq extract_itinerary(const OrbitRecord& orbit, const SeparatingCover& cover) {
    ItinerarySeq seq;
    int first = -1;
    for (size_t i = 0; i < orbit.iterates.size(); ++i) {
        int s = cover.symbol_of(orbit.iterates[i]);
        if (first < 0) {
            if (s == SeparatingCover::kOutside) continue;
            first = int(i);
        }
        seq.symbols.push_back(s);
    }
    if (first < 0) throw NeverEntersCover("orbit never enters the cover");
    seq.offset = first;
    return seq;
}

namespace {

// Smallest p such that w is p-periodic.
int minimal_period(const std::vector<int>& w) {
    for (int p = 1; p <= int(w.size()); ++p) {
        if (int(w.size()) % p) continue;
        bool ok = true;
        for (size_t i = p; i < w.size() && ok; ++i) ok = (w[i] == w[i - p]);
        if (ok) return p;
    }
    return int(w.size());
}

// Lexicographically least rotation of w (canonical form of the cyclic word).
std::vector<int> least_rotation(const std::vector<int>& w) {
    std::vector<int> best = w;
    std::vector<int> cur = w;
    for (size_t i = 1; i < w.size(); ++i) {
        std::rotate(cur.begin(), cur.begin() + 1, cur.end());
        if (cur < best) best = cur;
    }
    return best;
}

std::vector<int> canonical_tail(const std::vector<int>& tail) {
    int p = minimal_period(tail);
    return least_rotation(std::vector<int>(tail.begin(), tail.begin() + p));
}

}  // namespace

EventualSeq infer_eventual(const ItinerarySeq& seq) {
    EventualSeq out;
    out.prefix = seq.symbols;
    const int n = int(seq.symbols.size());
    // Look for a short period holding over the trailing window.
    for (int p = 1; p <= 16 && 3 * p <= n; ++p) {
        int window = std::max(24, 3 * p);
        if (window > n) window = n;
        bool ok = true;
        for (int i = n - window + p; i < n && ok; ++i)
            ok = (seq.symbols[i] == seq.symbols[i - p]);
        if (ok) {
            out.tail.assign(seq.symbols.end() - p, seq.symbols.end());
            out.prefix.assign(seq.symbols.begin(), seq.symbols.end() - p);
            return out;
        }
    }
    return out;
}

EventualEqualResult eventually_equal(const EventualSeq& s, const EventualSeq& t) {
    EventualEqualResult r;
    if (s.has_tail() && t.has_tail()) {
        // Shift orbits of eventually periodic sequences intersect exactly when
        // the periodic tails are rotations of one another.
        r.exact = true;
        r.equal = canonical_tail(s.tail) == canonical_tail(t.tail);
        return r;
    }
    // Heuristic: compare trailing windows over all small relative shifts.
    r.exact = false;
    auto full = [](const EventualSeq& e) {
        std::vector<int> w = e.prefix;
        for (int rep = 0; rep < 3; ++rep) w.insert(w.end(), e.tail.begin(), e.tail.end());
        return w;
    };
    std::vector<int> a = full(s), b = full(t);
    if (a.empty() || b.empty()) return r;
    int window = int(std::min({a.size(), b.size(), size_t(16)}));
    for (int shift = -8; shift <= 8 && !r.equal; ++shift) {
        int na = int(a.size()) - window + std::min(0, shift);
        int nb = int(b.size()) - window - std::max(0, shift);
        if (na < 0 || nb < 0) continue;
        bool ok = true;
        for (int i = 0; i < window && ok; ++i) ok = (a[na + i] == b[nb + i]);
        r.equal = ok;
    }
    return r;
}

std::string escape_kind_name(EscapeClass::Kind k) {
    switch (k) {
        case EscapeClass::Kind::EscapingToPoint: return "escaping-to-point";
        case EscapeClass::Kind::EscapingPeriodic: return "escaping-periodic";
        case EscapeClass::Kind::EscapingOscillating: return "escaping-oscillating";
        case EscapeClass::Kind::EscapingWandering: return "escaping-wandering";
        case EscapeClass::Kind::NonEscaping: return "non-escaping";
        case EscapeClass::Kind::Undecided: return "undecided";
    }
    return "?";
}

EscapeClass classify_escape(const MapSpec& map, const SpherePoint& z0,
                            const SeparatingCover& cover,
                            const std::vector<int>& budgets) {
    EscapeClass cls;
    if (budgets.empty()) {
        cls.detail = "no budgets";
        return cls;
    }
    int big = *std::max_element(budgets.begin(), budgets.end());
    OrbitRecord orbit = iterate_orbit(map, z0, big);

    if (orbit.termination == OrbitRecord::Termination::HitSingularity) {
        // Landing exactly on B(f) after finitely many steps: the orbit is a
        // finite set ending in a (pre-)singularity; treat the landing point
        // as the escape target when it is a cover target.
        int s = cover.symbol_of(orbit.singularity);
        if (s != SeparatingCover::kOutside) {
            cls.kind = EscapeClass::Kind::EscapingToPoint;
            cls.target = cover.targets[s];
            cls.detail = "orbit lands on the singular set";
            return cls;
        }
        cls.detail = "orbit hit a singularity outside the cover";
        return cls;
    }

    if (orbit.termination == OrbitRecord::Termination::OverflowedToInfinity) {
        // The orbit left every bounded set for good.
        for (int k = 0; k < int(cover.targets.size()); ++k)
            if (cover.targets[k].at_infinity) {
                cls.kind = EscapeClass::Kind::EscapingToPoint;
                cls.target = cover.targets[k];
                cls.detail = "orbit overflowed to infinity";
                try {
                    cls.itinerary = infer_eventual(extract_itinerary(orbit, cover));
                } catch (const NeverEntersCover&) {
                }
                return cls;
            }
        cls.detail = "orbit overflowed to infinity outside the cover";
        return cls;
    }

    if (orbit.termination == OrbitRecord::Termination::ConvergedToPoint) {
        int s = cover.symbol_of(orbit.limit);
        if (s == SeparatingCover::kOutside) {
            cls.kind = EscapeClass::Kind::NonEscaping;
            cls.detail = "converged outside the cover";
            return cls;
        }
        // The limit is the whole omega set, so no tail statistics are needed;
        // this also covers orbits that converge in only a handful of steps.
        cls.kind = EscapeClass::Kind::EscapingToPoint;
        cls.target = cover.targets[s];
        cls.period = 1;
        cls.detail = "orbit converged inside the cover";
        try {
            cls.itinerary = infer_eventual(extract_itinerary(orbit, cover));
        } catch (const NeverEntersCover&) {
        }
        return cls;
    }

    // Wandering heuristic: strictly growing distinct-symbol count per budget.
    if (budgets.size() >= 2) {
        std::vector<size_t> distinct;
        for (int b : budgets) {
            std::set<int> syms;
            size_t n = std::min(orbit.iterates.size(), size_t(b) + 1);
            for (size_t i = 0; i < n; ++i) {
                int s = cover.symbol_of(orbit.iterates[i]);
                if (s != SeparatingCover::kOutside) syms.insert(s);
            }
            distinct.push_back(syms.size());
        }
        bool growing = distinct.front() > 0;
        for (size_t i = 1; i < distinct.size(); ++i)
            growing = growing && distinct[i] > distinct[i - 1];
        if (growing) {
            cls.kind = EscapeClass::Kind::EscapingWandering;
            cls.heuristic_flag = true;
            cls.detail = "distinct cover symbols still growing at max budget";
            return cls;
        }
    }

    int tail_len = std::min(200, int(orbit.iterates.size()) / 2);
    if (tail_len < 10) {
        cls.detail = "orbit too short";
        return cls;
    }
    OmegaEstimate omega = omega_limit(map, orbit, tail_len, 0.05);

    bool all_in_cover = true;
    std::set<int> cluster_syms;
    for (const auto& c : omega.clusters) {
        int s = cover.symbol_of(c.center);
        if (s == SeparatingCover::kOutside) all_in_cover = false;
        else cluster_syms.insert(s);
    }

    if (!all_in_cover || omega.clusters.empty()) {
        if (orbit.termination == OrbitRecord::Termination::ConvergedToPoint ||
            orbit.termination == OrbitRecord::Termination::EnteredCycle) {
            cls.kind = EscapeClass::Kind::NonEscaping;
            cls.detail = "omega limit leaves the cover";
        } else {
            cls.detail = "omega clusters not contained in the cover";
        }
        return cls;
    }

    try {
        cls.itinerary = infer_eventual(extract_itinerary(orbit, cover));
    } catch (const NeverEntersCover&) {
    }

    if (omega.clusters.size() == 1) {
        cls.kind = EscapeClass::Kind::EscapingToPoint;
        cls.target = cover.targets[*cluster_syms.begin()];
        cls.period = 1;
        return cls;
    }
    cls.kind = EscapeClass::Kind::EscapingOscillating;
    cls.symbol_set.assign(cluster_syms.begin(), cluster_syms.end());
    if (cls.itinerary.has_tail()) cls.period = int(cls.itinerary.tail.size());
    return cls;
}

Membership membership_report(const MapSpec& map, const SpherePoint& z0,
                             const SpherePoint& e, const std::vector<int>& budgets) {
    const int M = 50;
    const double radius = 0.15;
    int big = budgets.empty() ? 2000 : *std::max_element(budgets.begin(), budgets.end());
    OrbitRecord orbit = iterate_orbit(map, z0, big);

    auto in_ball = [&](const SpherePoint& z) {
        if (e.at_infinity) return chordal(z, e) < radius;
        if (z.at_infinity) return false;
        return std::abs(z.value - e.value) < radius;
    };

    if (int(orbit.iterates.size()) > M) {
        bool in = true, monotone = true;
        double prev = -1.0;
        for (size_t i = orbit.iterates.size() - M; i < orbit.iterates.size(); ++i) {
            const SpherePoint& z = orbit.iterates[i];
            if (!in_ball(z)) in = false;
            double d = chordal(z, e);
            if (prev >= 0.0 && d > prev + 1e-12) monotone = false;
            prev = d;
        }
        if (in && monotone) return Membership::LikelyIn;
    }

    if (orbit.termination == OrbitRecord::Termination::ConvergedToPoint &&
        !in_ball(orbit.limit) && chordal(orbit.limit, e) > 2 * radius)
        return Membership::LikelyOut;

    if (orbit.termination != OrbitRecord::Termination::HitSingularity &&
        int(orbit.iterates.size()) >= 400) {
        OmegaEstimate omega = omega_limit(map, orbit, 200, 0.05);
        if (omega.confident) {
            for (const auto& c : omega.clusters)
                if (chordal(c.center, e) > c.radius + radius) return Membership::LikelyOut;
        }
    }
    return Membership::Undecided;
}

nlohmann::json classification_to_json(const MapSpec& map, const SpherePoint& z0,
                                      const SeparatingCover& cover,
                                      const std::vector<int>& budgets,
                                      const EscapeClass& cls) {
    nlohmann::json j;
    j["map"] = map.label;
    j["point"] = z0.str();
    j["class"] = escape_kind_name(cls.kind);
    if (cls.kind == EscapeClass::Kind::EscapingToPoint) j["target"] = cls.target.str();
    if (cls.period > 0) j["period"] = cls.period;
    if (!cls.detail.empty()) j["detail"] = cls.detail;
    j["budgets"] = budgets;
    j["flags"] = nlohmann::json::array();
    if (cls.heuristic_flag) j["flags"].push_back("heuristic");

    auto sym_name = [&](int s) {
        return s == SeparatingCover::kOutside ? std::string("OUTSIDE")
                                              : cover.targets[s].str();
    };
    nlohmann::json itin;
    itin["offset"] = 0;
    nlohmann::json symbols = nlohmann::json::array(), tail = nlohmann::json::array();
    size_t start = cls.itinerary.prefix.size() > 64 ? cls.itinerary.prefix.size() - 64 : 0;
    for (size_t i = start; i < cls.itinerary.prefix.size(); ++i)
        symbols.push_back(sym_name(cls.itinerary.prefix[i]));
    for (int s : cls.itinerary.tail) tail.push_back(sym_name(s));
    itin["symbols"] = symbols;
    itin["tail"] = tail;
    j["itinerary"] = itin;

    nlohmann::json clusters = nlohmann::json::array();
    int big = budgets.empty() ? 2000 : *std::max_element(budgets.begin(), budgets.end());
    OrbitRecord orbit = iterate_orbit(map, z0, big);
    if (orbit.termination != OrbitRecord::Termination::HitSingularity) {
        try {
            OmegaEstimate omega = omega_limit(map, orbit,
                                              std::min<int>(200, int(orbit.iterates.size()) / 2));
            for (const auto& c : omega.clusters) {
                clusters.push_back({{"center", c.center.str()},
                                    {"radius", c.radius},
                                    {"hits", c.hits}});
            }
        } catch (const TailTooShort&) {
        }
    }
    j["omega"] = {{"clusters", clusters}};
    return j;
}

}  // namespace essdyn
