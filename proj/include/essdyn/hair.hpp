#pragma once

#include <cstdint>
#include <optional>

#include "essdyn/escape.hpp"
#include "essdyn/singularity.hpp"

namespace essdyn {

/// Escaping hairs, singular orbits of their endpoints, and the verified
/// region constructions for the sine-lattice maps.

struct DegenerateCurve : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EndpointNotSingular : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct LimitDidNotStabilize : std::runtime_error {
    int level;
    explicit LimitDidNotStabilize(int k)
        : std::runtime_error("endpoint limit did not stabilize at step " +
                             std::to_string(k)),
          level(k) {}
};

/// Curve parametrized toward the declared endpoint at t in (0, 1]: for a
/// finite endpoint e, z(t) = e + t * (from - e); for endpoint infinity the
/// ray z(t) = from / t. Presets may instead supply explicit samples (ordered
/// toward the endpoint).
struct CurveSpec {
    Complex from{};
    std::vector<Complex> explicit_samples;
};

struct HairTrace {
    struct Sample {
        double t = 0.0;
        SpherePoint z;
        EscapeClass cls;
    };
    std::vector<Sample> samples;  // strictly decreasing t, toward the endpoint
    SpherePoint endpoint;
    std::optional<EventualSeq> common_itinerary;
    std::string disagreement;  // first disagreeing pair when ABSENT
};

HairTrace trace_hair(const MapSpec& map, const CurveSpec& curve, const SpherePoint& endpoint,
                     const SeparatingCover& cover, const std::vector<int>& budgets,
                     int sample_count);

std::string hair_to_csv(const HairTrace& trace);

enum class SingularOrbitClass { Periodic, PrePeriodic, Oscillating, Wandering, Undecided };

std::string singular_orbit_class_name(SingularOrbitClass c);

struct SingularOrbit {
    std::vector<SpherePoint> points;  // p_0 .. p_n
    std::vector<double> residuals;    // distance of the k-limit to p_k
    SingularOrbitClass classification = SingularOrbitClass::Undecided;
    bool heuristic_flag = false;  // wandering is a finite-prefix heuristic
    int period = 0;               // Periodic / PrePeriodic
};

SingularOrbit singular_orbit(const MapSpec& map, const HairTrace& hair, int steps);

/// Hair presets for the lattice maps: the negative real ray into infinity
/// for h (pulled back to depth to build deeper hairs on request).
CurveSpec h_infinity_hair(const MapSpec& h, int depth);

// --- regions -------------------------------------------------------------

struct RegionSpec {
    enum class Kind { T0Disc, V0, UpperHalfplane };
    Kind kind = Kind::V0;
    int translate_k = 0;   // shift by 2*pi*k
    double height = 3.0;   // UpperHalfplane: Im z > height
};

bool region_membership(const RegionSpec& region, Complex z);

struct AbsorbingReport {
    int samples = 0;
    std::uint64_t seed = 0;
    int violations_a = 0;  // g(z) not in the region
    int violations_b = 0;  // Re g(z) <= Re z or Re g(z) >= 0 (mod translate)
    int violations_c = 0;  // |Im g(z)| > |Im z|
    double min_margin_a = 0.0;  // most negative when violated
    double min_margin_b = 0.0;
    double min_margin_c = 0.0;
};

AbsorbingReport verify_absorbing(const MapSpec& map, const RegionSpec& region,
                                 int sample_count, std::uint64_t seed = 20260826);

nlohmann::json absorbing_report_to_json(const RegionSpec& region, const AbsorbingReport& r);

struct TranslationReport {
    int samples = 0;
    std::uint64_t seed = 0;
    double height = 3.0;
    double max_deviation = 0.0;  // max |g(w) - (w+1)|
};

TranslationReport verify_translation(const MapSpec& map, double height, int sample_count,
                                     std::uint64_t seed = 20260826);

nlohmann::json translation_report_to_json(const TranslationReport& r);

}  // namespace essdyn
