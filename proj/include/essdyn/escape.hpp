#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "essdyn/orbit.hpp"

#include "json.hpp"

namespace essdyn {

/// Escaping sets, separating covers and eventual itineraries.

struct OverlappingCover : std::runtime_error {
    int k, j;
    OverlappingCover(int k_, int j_)
        : std::runtime_error("cover balls " + std::to_string(k_) + " and " +
                             std::to_string(j_) + " intersect"),
          k(k_), j(j_) {}
};

struct NeverEntersCover : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pairwise-disjoint balls around singular/pre-singular targets: Euclidean
/// balls for finite targets, the chordal ball {|z| > sqrt(4/r^2 - 1)} at
/// infinity.
struct SeparatingCover {
    std::vector<SpherePoint> targets;
    std::vector<double> radii;

    static constexpr int kOutside = -1;

    /// Index of the ball containing z, or kOutside.
    int symbol_of(const SpherePoint& z) const;
    bool in_ball(const SpherePoint& z, int k) const;
};

SeparatingCover build_cover(const std::vector<SpherePoint>& targets, double radius);

/// Raw per-iterate symbol stream; symbols[n] is the ball index of iterate
/// offset+n (kOutside when in no ball).
struct ItinerarySeq {
    std::vector<int> symbols;
    int offset = 0;
};

ItinerarySeq extract_itinerary(const MapSpec& map, const SpherePoint& z0,
                               const SeparatingCover& cover, int budget);
ItinerarySeq extract_itinerary(const OrbitRecord& orbit, const SeparatingCover& cover);

/// Finite representation of an eventual symbol sequence: explicit prefix plus
/// an optional declared periodic tail (empty tail = none declared).
struct EventualSeq {
    std::vector<int> prefix;
    std::vector<int> tail;

    bool has_tail() const { return !tail.empty(); }
};

/// Declares a periodic tail when the trailing window of the stream is
/// convincingly periodic.
EventualSeq infer_eventual(const ItinerarySeq& seq);

struct EventualEqualResult {
    bool equal = false;
    bool exact = false;  // false = prefix-window heuristic
};

EventualEqualResult eventually_equal(const EventualSeq& s, const EventualSeq& t);

struct EscapeClass {
    enum class Kind {
        EscapingToPoint,
        EscapingPeriodic,
        EscapingOscillating,
        EscapingWandering,
        NonEscaping,
        Undecided,
    };
    Kind kind = Kind::Undecided;
    SpherePoint target;            // EscapingToPoint
    int period = 0;                // periodic tail length when known
    std::vector<int> symbol_set;   // EscapingOscillating
    std::string detail;
    bool heuristic_flag = false;   // wandering detection is always heuristic
    EventualSeq itinerary;
};

std::string escape_kind_name(EscapeClass::Kind k);

EscapeClass classify_escape(const MapSpec& map, const SpherePoint& z0,
                            const SeparatingCover& cover,
                            const std::vector<int>& budgets = {1000, 4000, 16000});

enum class Membership { LikelyIn, LikelyOut, Undecided };

Membership membership_report(const MapSpec& map, const SpherePoint& z0,
                             const SpherePoint& e,
                             const std::vector<int>& budgets = {1000, 4000, 16000});

nlohmann::json classification_to_json(const MapSpec& map, const SpherePoint& z0,
                                      const SeparatingCover& cover,
                                      const std::vector<int>& budgets,
                                      const EscapeClass& cls);

}  // namespace essdyn
