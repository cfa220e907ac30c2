// Classifier invariance on a 50-point corpus: cover-radius halving preserves
// eventual tails; an escaping verdict survives one forward step and passing
// to the second and third iterates.
#include "common.hpp"

#include <vector>

namespace {

using namespace acceptance;

bool escaping(EscapeClass::Kind k) {
    return k == EscapeClass::Kind::EscapingToPoint ||
           k == EscapeClass::Kind::EscapingPeriodic ||
           k == EscapeClass::Kind::EscapingOscillating ||
           k == EscapeClass::Kind::EscapingWandering;
}

}  // namespace

int main() {
    using namespace acceptance;
    using std::numbers::pi;
    Criterion crit(7, 60.0);

    struct Case {
        MapSpec map;
        SpherePoint z;
        std::vector<SpherePoint> targets;
        double radius;
    };
    auto g = make_catalog_map("g");
    auto f = make_catalog_map("f");
    auto h = make_catalog_map("h");

    std::vector<Case> corpus;
    for (int i = 0; i < 20; ++i) {
        double x = -0.07 + 0.05 * i / 19.0;  // in (-pi/4, 0), inside both radii
        double y = (i % 3 == 0) ? 0.01 : (i % 3 == 1 ? -0.01 : 0.0);
        corpus.push_back({g, fin(x, y), {fin(0)}, 0.15});
    }
    for (int i = 0; i < 15; ++i) {
        double x = -0.12 + 0.10 * i / 14.0;
        corpus.push_back({f, fin(x), {SpherePoint::infinity()}, 0.3});
    }
    for (int i = 0; i < 15; ++i) {
        double x = -5.0 - i;
        corpus.push_back({h, fin(x), {SpherePoint::infinity(), fin(0)}, 0.3});
    }

    int bad_base = 0, bad_half = 0, bad_step = 0, bad_iter = 0;
    for (const auto& c : corpus) {
        auto full_cover = build_cover(c.targets, c.radius);
        auto base = classify_escape(c.map, c.z, full_cover);
        if (!escaping(base.kind)) {
            ++bad_base;
            continue;
        }

        auto half = classify_escape(c.map, c.z, build_cover(c.targets, c.radius / 2));
        if (!escaping(half.kind) ||
            !eventually_equal(base.itinerary, half.itinerary).equal)
            ++bad_half;

        auto next = evaluate(c.map, c.z);
        if (!next.is_finite() ||
            !escaping(classify_escape(c.map, next.point(), full_cover).kind))
            ++bad_step;

        for (int n : {2, 3}) {
            auto iter = classify_escape(iterate_map(c.map, n), c.z, full_cover);
            if (!escaping(iter.kind)) ++bad_iter;
        }
    }

    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "50-point corpus: non-escaping base %d, tail changed on halving %d, "
                  "lost after forward step %d, lost under f^2/f^3 %d",
                  bad_base, bad_half, bad_step, bad_iter);
    bool ok = bad_base == 0 && bad_half == 0 && bad_step == 0 && bad_iter == 0;
    return crit.finish(ok, buf);
}
