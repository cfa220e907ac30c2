#pragma once

#include <optional>
#include <vector>

#include "essdyn/map_spec.hpp"
#include "essdyn/roots.hpp"

#include "json.hpp"

namespace essdyn {

/// B(f) and its pullbacks, window-truncated.

/// Pre-singularity tree rooted at e in B(f): level j holds the numeric
/// solutions of f(p) = (level j-1 target) inside the window, so the union
/// over levels approximates B_n = union of f^{-j}(B(f)) in the window.
struct PreSingularityTree {
    SpherePoint root;
    Window window;
    int depth = 0;
    std::vector<std::vector<Complex>> levels;  // levels[j-1] = order-j points
};

std::vector<SpherePoint> singularities_in_window(const MapSpec& map, const Window& window,
                                                 bool sphere_mode = false);

PreSingularityTree presingularities(const MapSpec& map, const SpherePoint& e, int depth,
                                    const Window& window);

nlohmann::json tree_to_json(const PreSingularityTree& tree);

/// Cardinality of B(f^n) per singularity class. Indeterminate marks the
/// cases the class table leaves open (class M and twin-point classes at
/// the second iterate).
struct ClassCountResult {
    enum class Kind { Count, CountInfinite, Indeterminate };
    Kind kind = Kind::Count;
    int count = 0;

    static ClassCountResult finite(int n) { return {Kind::Count, n}; }
    static ClassCountResult infinite() { return {Kind::CountInfinite, 0}; }
    static ClassCountResult indeterminate() { return {Kind::Indeterminate, 0}; }
};

ClassCountResult composition_class_count(ClassTag tag, int n, int m = 0);

std::vector<SpherePoint> critical_points(const MapSpec& map, const Window& window);

}  // namespace essdyn
