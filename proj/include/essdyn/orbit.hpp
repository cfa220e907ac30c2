#pragma once

#include <optional>
#include <string>
#include <vector>

#include "essdyn/map_spec.hpp"

namespace essdyn {

struct OrbitRecord {
    enum class Termination {
        BudgetExhausted,
        HitSingularity,
        OverflowedToInfinity,
        ConvergedToPoint,
        EnteredCycle,
    };
    SpherePoint start;
    std::vector<SpherePoint> iterates;  // iterates[0] = start
    Termination termination = Termination::BudgetExhausted;
    SpherePoint singularity;  // HitSingularity
    SpherePoint limit;        // ConvergedToPoint
};

OrbitRecord iterate_orbit(const MapSpec& map, const SpherePoint& z0, int budget);

std::string orbit_to_csv(const OrbitRecord& orbit);

struct OmegaEstimate {
    struct Cluster {
        SpherePoint center;
        double radius = 0.0;
        int hits = 0;
    };
    std::vector<Cluster> clusters;
    int tail_length = 0;
    bool confident = false;
};

struct TailTooShort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

OmegaEstimate omega_limit(const MapSpec& map, const OrbitRecord& orbit, int tail = 200,
                          double cluster_radius = 0.05);

enum class CycleClass {
    SuperAttracting,
    Attracting,
    Repelling,
    RationallyIndifferent,
    IrrationallyIndifferent,
};

std::string cycle_class_name(CycleClass c);

struct CycleRecord {
    std::vector<SpherePoint> points;
    Complex multiplier{};
    CycleClass cls = CycleClass::Attracting;
    bool class_heuristic = true;  // floating-point rationality test, never exact
};

std::optional<CycleRecord> refine_cycle(const MapSpec& map, const SpherePoint& seed,
                                        int period);

CycleClass classify_cycle(Complex multiplier);

}  // namespace essdyn
