#include <doctest.h>

#include <cmath>

#include "mrx/robot_model.hpp"

using namespace mrx;

namespace {

KnownEdge edge(TerrainClass t, double difficulty, int hazard = 0) {
    return {sector(0), sector(1), hazard, t, difficulty};
}

constexpr TerrainClass kAllTerrains[]{TerrainClass::Flat,          TerrainClass::Stairs, TerrainClass::Rubble,
                                      TerrainClass::NarrowPassage, TerrainClass::VerticalShaft,
                                      TerrainClass::Mud,           TerrainClass::Rails,  TerrainClass::Doorway};
constexpr MobilityClass kAllMobility[]{MobilityClass::Wheeled, MobilityClass::Legged, MobilityClass::Aerial};

}  // namespace

TEST_CASE("default matrix entries are probabilities and Flat is always 1") {
    CapabilityMatrix m;
    for (auto mob : kAllMobility) {
        CHECK(m.base_success(mob, TerrainClass::Flat) == 1.0);
        for (auto t : kAllTerrains) {
            CHECK(m.base_success(mob, t) >= 0.0);
            CHECK(m.base_success(mob, t) <= 1.0);
        }
    }
}

TEST_CASE("traversal_success_prob examples") {
    CapabilityMatrix m;
    RobotCapability legged{MobilityClass::Legged, 0.9, 0.0};
    RobotCapability wheeled{MobilityClass::Wheeled, 0.9, 0.0};
    for (auto mob : kAllMobility) {
        RobotCapability c{mob, 1.0, 0.0};
        CHECK(traversal_success_prob(m, c, nullptr, false) == 1.0);
        CHECK(traversal_success_prob(m, c, edge(TerrainClass::Flat, 0.0, -1), false) == 1.0);
        for (auto t : kAllTerrains) CHECK(traversal_success_prob(m, c, edge(t, 0.0), false) == 1.0);
    }
    CHECK(traversal_success_prob(m, legged, edge(TerrainClass::Stairs, 1.0), false) == doctest::Approx(0.9));
    CHECK(traversal_success_prob(m, wheeled, edge(TerrainClass::Stairs, 1.0), false) == doctest::Approx(0.2));
    // Supervised: failure halved.
    CHECK(traversal_success_prob(m, wheeled, edge(TerrainClass::Stairs, 1.0), true) == doctest::Approx(0.6));
    HazardSpec h{"h", TerrainClass::Stairs, 1.0};
    CHECK(traversal_success_prob(m, wheeled, &h, false) == doctest::Approx(0.2));
}

TEST_CASE("traversal_success_prob monotonicity and supervision dominance") {
    CapabilityMatrix m;
    for (auto mob : kAllMobility) {
        for (auto t : kAllTerrains) {
            for (int li = 0; li <= 4; ++li) {
                RobotCapability c{mob, 1.0, li / 4.0};
                double prev = 2.0;
                for (int di = 0; di <= 10; ++di) {
                    double d = di / 10.0;
                    double p = traversal_success_prob(m, c, edge(t, d), false);
                    CHECK(p <= prev + 1e-15);
                    CHECK(traversal_success_prob(m, c, edge(t, d), true) >= p);
                    if (li > 0) {
                        RobotCapability less{mob, 1.0, (li - 1) / 4.0};
                        CHECK(p >= traversal_success_prob(m, less, edge(t, d), false));
                    }
                    prev = p;
                }
            }
        }
    }
    // Non-decreasing in base success.
    RobotCapability c{MobilityClass::Wheeled, 1.0, 0.0};
    double prev = -1.0;
    for (int b = 0; b <= 10; ++b) {
        CapabilityMatrix custom;
        custom.set(MobilityClass::Wheeled, TerrainClass::Mud, b / 10.0);
        double p = traversal_success_prob(custom, c, edge(TerrainClass::Mud, 0.7), false);
        CHECK(p >= prev);
        prev = p;
    }
}

TEST_CASE("autonomy level one removes capability failures") {
    CapabilityMatrix m;
    RobotCapability c{MobilityClass::Wheeled, 1.0, 1.0};
    CHECK(traversal_success_prob(m, c, edge(TerrainClass::VerticalShaft, 1.0), false) == 1.0);
    TraversalParams half{0.5, 0.5};
    CHECK(traversal_success_prob(m, c, edge(TerrainClass::VerticalShaft, 1.0), false, half) == doctest::Approx(0.5));
}

TEST_CASE("apply_traversal") {
    CapabilityMatrix m;
    Rng rng(5);
    RandomChance chance(rng);
    RobotState start;
    start.position = sector(0);
    start.unreported = {sector(0), sector(0)};

    SUBCASE("certain success") {
        RobotState s = start;
        RobotCapability c{MobilityClass::Aerial, 1.0, 0.0};
        CHECK_FALSE(apply_traversal(s, m, c, edge(TerrainClass::Flat, 1.0), false, chance));
        CHECK(s.position == sector(1));
        CHECK(s.unreported.size() == 2);
    }
    SUBCASE("certain failure loses findings") {
        RobotState s = start;
        RobotCapability c{MobilityClass::Wheeled, 1.0, 0.0};
        CHECK(apply_traversal(s, m, c, edge(TerrainClass::VerticalShaft, 1.0), false, chance));
        CHECK(s.failed());
        CHECK(s.position == kNoSector);
        CHECK(s.unreported.empty());
        CHECK_THROWS_AS(apply_traversal(s, m, c, edge(TerrainClass::Flat, 0.0), false, chance), ContractViolation);
    }
    SUBCASE("wrong endpoint") {
        RobotState s = start;
        s.position = sector(4);
        RobotCapability c{MobilityClass::Aerial, 1.0, 0.0};
        CHECK_THROWS_AS(apply_traversal(s, m, c, edge(TerrainClass::Flat, 1.0), false, chance), ContractViolation);
    }
    SUBCASE("failure frequency matches 1 - p") {
        // Wheeled on Narrow at difficulty 1: base 0.8, failure 0.2.
        RobotCapability c{MobilityClass::Wheeled, 1.0, 0.0};
        auto e = edge(TerrainClass::NarrowPassage, 1.0);
        const double p = traversal_success_prob(m, c, e, false);
        REQUIRE(p == doctest::Approx(0.8));
        const int n = 100000;
        int failures = 0;
        for (int i = 0; i < n; ++i) {
            RobotState s = start;
            failures += apply_traversal(s, m, c, e, false, chance) ? 1 : 0;
        }
        CHECK(std::abs(failures / double(n) - (1.0 - p)) < 0.005);
    }
}

TEST_CASE("traversal works in both directions of an edge") {
    CapabilityMatrix m;
    Rng rng(1);
    RandomChance chance(rng);
    RobotCapability c{MobilityClass::Legged, 1.0, 0.0};
    RobotState s;
    s.position = sector(1);
    CHECK_FALSE(apply_traversal(s, m, c, edge(TerrainClass::Flat, 0.0, -1), false, chance));
    CHECK(s.position == sector(0));
}

TEST_CASE("report") {
    RobotState s;
    s.position = sector(0);
    s.unreported = {sector(2), sector(3)};
    RobotState copy = s;
    CHECK(report(copy, false) == 0);
    CHECK(copy == s);
    CHECK(report(copy, true) == 2);
    CHECK(copy.unreported.empty());
    CHECK(report(copy, true) == 0);
}
