#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>
#include <random>
#include <sstream>

#include "essdyn/hair.hpp"

using namespace essdyn;
using std::numbers::pi;
using C = Complex;

namespace {
SpherePoint fin(double re, double im = 0) { return SpherePoint::finite({re, im}); }
}  // namespace

TEST_CASE("region membership") {
    RegionSpec v0;
    v0.kind = RegionSpec::Kind::V0;
    CHECK(region_membership(v0, {-0.1, 0}));
    CHECK(!region_membership(v0, {-0.2, 0.05}));
    CHECK(!region_membership(v0, {0, 0}));
    CHECK(!region_membership(v0, {0.1, 0}));
    // Points inside the two excluded discs around +-2i/pi are out.
    CHECK(!region_membership(v0, {-0.05, 2 / pi}));
    CHECK(!region_membership(v0, {-0.05, -2 / pi}));

    RegionSpec shifted = v0;
    shifted.translate_k = 1;
    CHECK(region_membership(shifted, {2 * pi - 0.1, 0}));
    CHECK(!region_membership(shifted, {-0.1, 0}));

    RegionSpec half;
    half.kind = RegionSpec::Kind::UpperHalfplane;
    half.height = 3.0;
    CHECK(region_membership(half, {0, 4}));
    CHECK(!region_membership(half, {0, 2}));
}

TEST_CASE("absorbing-domain verification: drift and contraction are clean") {
    auto g = make_catalog_map("g");
    RegionSpec v0;
    v0.kind = RegionSpec::Kind::V0;
    auto rep = verify_absorbing(g, v0, 20000);
    CHECK(rep.samples == 20000);
    // Horizontal drift toward 0 and vertical contraction hold without
    // exception; the disc-complement containment does not (the image leaks
    // into the excluded discs), which the report must surface honestly.
    CHECK(rep.violations_b == 0);
    CHECK(rep.violations_c == 0);
    CHECK(rep.violations_a > 0);
    CHECK(rep.min_margin_a < -1e-3);

    // Deterministic in the seed.
    auto rep2 = verify_absorbing(g, v0, 20000);
    CHECK(rep2.violations_a == rep.violations_a);
    CHECK(rep2.min_margin_a == rep.min_margin_a);
    auto rep3 = verify_absorbing(g, v0, 20000, 12345);
    CHECK(rep3.violations_b == 0);
    CHECK(rep3.violations_c == 0);

    auto j = absorbing_report_to_json(v0, rep);
    CHECK(j.contains("samples"));
    CHECK(j.contains("violations"));
}

TEST_CASE("lattice equivariance: g(z + 2 pi k) = g(z) + 2 pi k, f = g + 2 pi") {
    auto g = make_catalog_map("g");
    auto f = make_catalog_map("f");
    std::mt19937_64 rng(3);
    auto uni = [&](double lo, double hi) {
        return lo + (hi - lo) * double(rng() >> 11) * 0x1.0p-53;
    };
    int accepted = 0;
    while (accepted < 500) {
        C z(uni(-3, 3), uni(-3, 3));
        auto base = evaluate(g, SpherePoint::finite(z));
        if (!base.is_finite()) continue;
        ++accepted;
        for (int k : {-2, 1, 3}) {
            C zs = z + 2 * pi * double(k);
            auto shifted = evaluate(g, SpherePoint::finite(zs));
            REQUIRE(shifted.is_finite());
            CHECK(std::abs(shifted.value.value - (base.value.value + 2 * pi * double(k))) <
                  1e-8 * std::max(1.0, std::abs(base.value.value)));
        }
        auto fv = evaluate(f, SpherePoint::finite(z));
        REQUIRE(fv.is_finite());
        CHECK(std::abs(fv.value.value - (base.value.value + 2 * pi)) <
              1e-10 * std::max(1.0, std::abs(base.value.value)));
    }
}

TEST_CASE("translation behaviour high in the plane") {
    auto g = make_catalog_map("g");
    auto r10 = verify_translation(g, 10.0, 2000);
    CHECK(r10.max_deviation < 2e-4);
    auto r6 = verify_translation(g, 6.0, 10000);
    CHECK(r6.max_deviation < 5e-3);
    auto r3 = verify_translation(g, 3.0, 10000);
    CHECK(r3.max_deviation < 0.11);
    CHECK(r3.max_deviation > r6.max_deviation);

    auto j = translation_report_to_json(r6);
    CHECK(j.contains("height"));
    CHECK(j.contains("max_deviation"));
}

TEST_CASE("hair tracing") {
    auto f = make_catalog_map("f");
    CurveSpec seg;
    seg.from = {-pi / 4 + 0.01, 0};
    auto cover = build_cover({SpherePoint::infinity()}, 0.3);
    auto trace = trace_hair(f, seg, fin(0), cover, {1000, 4000}, 10);
    CHECK(trace.samples.size() == 10);
    for (size_t i = 1; i < trace.samples.size(); ++i)
        CHECK(trace.samples[i].t < trace.samples[i - 1].t);
    for (const auto& s : trace.samples)
        CHECK(s.cls.kind == EscapeClass::Kind::EscapingToPoint);
    CHECK(trace.common_itinerary.has_value());

    // Degenerate curve: from == endpoint.
    CurveSpec degenerate;
    degenerate.from = {0, 0};
    CHECK_THROWS_AS(trace_hair(f, degenerate, fin(0), cover, {1000}, 10), DegenerateCurve);

    // Endpoint whose own orbit never hits a singularity is rejected.
    auto zexp = make_catalog_map("zexp", {{"lambda", C(0.5, 0)}});
    CurveSpec seg2;
    seg2.from = {1, 0};
    CHECK_THROWS_AS(trace_hair(zexp, seg2, fin(0.1), cover, {1000}, 10),
                    EndpointNotSingular);

    // Too few samples cannot support the endpoint limit.
    CHECK_THROWS_AS(trace_hair(f, seg, fin(0), cover, {1000}, 4), std::invalid_argument);
}

TEST_CASE("wandering hair of the shifted lattice map") {
    auto f = make_catalog_map("f");
    CurveSpec seg;
    seg.from = {-pi / 4 + 0.01, 0};
    auto cover = build_cover({SpherePoint::infinity()}, 0.3);
    auto trace = trace_hair(f, seg, fin(0), cover, {1000, 4000}, 12);
    auto orb = singular_orbit(f, trace, 8);
    REQUIRE(orb.points.size() >= 9);
    for (int k = 0; k <= 8; ++k) {
        REQUIRE(!orb.points[k].at_infinity);
        CHECK(std::abs(orb.points[k].value - C(2 * pi * k, 0)) <= 1e-4);
    }
    CHECK(orb.classification == SingularOrbitClass::Wandering);
    CHECK(orb.heuristic_flag);
}

TEST_CASE("period-two singular orbit of h along the negative ray") {
    auto h = make_catalog_map("h");
    CurveSpec ray;
    ray.from = {-15, 0};
    auto cover = build_cover({SpherePoint::infinity(), fin(0)}, 0.3);
    auto trace = trace_hair(h, ray, SpherePoint::infinity(), cover, {1000, 4000}, 10);
    CHECK(trace.common_itinerary.has_value());
    auto orb = singular_orbit(h, trace, 4);
    CHECK(orb.classification == SingularOrbitClass::Periodic);
    CHECK(orb.period == 2);
    REQUIRE(orb.points.size() >= 3);
    CHECK(orb.points[0].at_infinity);
    CHECK(!orb.points[1].at_infinity);
    CHECK(std::abs(orb.points[1].value) < 1e-3);
    CHECK(orb.points[2].at_infinity);
}

TEST_CASE("preset hair into the essential singularity of h") {
    auto h = make_catalog_map("h");
    auto curve = h_infinity_hair(h, 0);
    REQUIRE(curve.explicit_samples.size() >= 8);
    auto cover = build_cover({SpherePoint::infinity(), fin(0)}, 0.3);
    auto trace = trace_hair(h, curve, SpherePoint::infinity(), cover, {1000}, 10);
    CHECK(trace.common_itinerary.has_value());
    auto orb = singular_orbit(h, trace, 4);
    CHECK(orb.classification == SingularOrbitClass::Periodic);
    CHECK(orb.period == 1);
    for (const auto& p : orb.points) CHECK(p.at_infinity);
}

TEST_CASE("hair CSV format") {
    auto f = make_catalog_map("f");
    CurveSpec seg;
    seg.from = {-pi / 4 + 0.01, 0};
    auto cover = build_cover({SpherePoint::infinity()}, 0.3);
    auto trace = trace_hair(f, seg, fin(0), cover, {1000}, 8);
    std::string csv = hair_to_csv(trace);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,re,im,class");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++rows;
    CHECK(rows == 8);
}
