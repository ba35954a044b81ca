#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mrx/mdp.hpp"
#include "mrx/scenario.hpp"
#include "toys.hpp"

using namespace mrx;

namespace {

struct Fixture {
    Scenario sc;
    MissionModel model;
    TruthWorld world;
    JointState state;

    explicit Fixture(Scenario s)
        : sc(std::move(s)), model(sc.model()), world(sc.map), state(initial_state(sc.map, sc.team.size())) {}
};

Scenario single_sector(const std::string& sector_extra = "artifacts=1", const std::string& team = "perception=1") {
    return load_scenario("[sectors]\nid=a comm=1 staging=1 " + sector_extra + "\n[team]\nlabel=r mobility=Legged " +
                         team + "\n");
}

// Brute-force oracle: full product of per-robot sets, filtered by supervisor capacity.
std::vector<JointAction> brute_joint(const JointState& s) {
    std::vector<JointAction> out{JointAction{}};
    for (std::size_t i = 0; i < s.robots.size(); ++i) {
        std::vector<JointAction> grown;
        for (const auto& prefix : out)
            for (const auto& a : legal_robot_actions(s, static_cast<int>(i))) {
                auto j = prefix;
                j.push_back(a);
                grown.push_back(j);
            }
        out = std::move(grown);
    }
    std::erase_if(out, [](const JointAction& a) { return guided_count(a) > 1; });
    std::sort(out.begin(), out.end(), [](const JointAction& x, const JointAction& y) {
        return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
    });
    return out;
}

}  // namespace

TEST_CASE("legal robot actions") {
    Fixture f(build_urban7());
    SUBCASE("failed robot can only stay") {
        f.state.robots[0].mobility_ok = false;
        f.state.robots[0].position = kNoSector;
        auto acts = legal_robot_actions(f.state, 0);
        REQUIRE(acts.size() == 1);
        CHECK(acts[0] == RobotAction::stay());
    }
    SUBCASE("urban step 0: guided targets are the revealed sectors except staging") {
        auto acts = legal_robot_actions(f.state, 0);
        std::set<SectorId> targets;
        for (const auto& a : acts)
            if (a.kind == ActionKind::GuidedExploration) targets.insert(a.target);
        std::set<SectorId> oracle;
        for (std::size_t i = 0; i < f.state.map.size(); ++i)
            if (f.state.map.sectors[i].revealed && sector(i) != f.sc.map.staging()) oracle.insert(sector(i));
        CHECK(targets == oracle);
        CHECK(acts[0] == RobotAction::stay());
        CHECK(acts[1] == RobotAction::local_search());
        CHECK(acts[2] == RobotAction::frontier());
    }
    SUBCASE("fully covered revealed map has no frontier") {
        for (auto& sb : f.state.map.sectors)
            if (sb.revealed) sb.coverage = CoverageLevel::Searched;
        for (const auto& a : legal_robot_actions(f.state, 1)) CHECK(a.kind != ActionKind::FrontierSeeking);
    }
    CHECK_THROWS_AS(legal_robot_actions(f.state, 5), ContractViolation);
}

TEST_CASE("joint action space matches the brute-force product") {
    Fixture urban(build_urban7());
    Fixture chain(toys::chain3(3));
    for (auto* f : {&urban, &chain}) {
        JointActionSpace space(f->state);
        auto oracle = brute_joint(f->state);
        auto listed = space.enumerate();
        CHECK(listed.size() == oracle.size());
        CHECK(space.size() == doctest::Approx(static_cast<double>(oracle.size())));
        CHECK(std::equal(listed.begin(), listed.end(), oracle.begin(), oracle.end()));
        for (const auto& a : oracle) CHECK(space.contains(a));
        CHECK_THROWS_AS(space.enumerate(oracle.size() - 1), std::length_error);
    }

    // Two robots restricted to {Stay, GE(a)}: four products minus GE+GE.
    auto two = brute_joint(urban.state);
    SectorId a = sector(1);
    auto restricted = std::count_if(two.begin(), two.end(), [&](const JointAction& j) {
        return std::all_of(j.begin(), j.end(), [&](const RobotAction& x) {
            return x == RobotAction::stay() || x == RobotAction::guided(a);
        });
    });
    CHECK(restricted == 3);
}

TEST_CASE("single robot joint actions are the lifted robot actions") {
    Fixture f(toys::two_sector());
    auto joint = JointActionSpace(f.state).enumerate();
    auto single = legal_robot_actions(f.state, 0);
    REQUIRE(joint.size() == single.size());
    for (std::size_t i = 0; i < single.size(); ++i) {
        REQUIRE(joint[i].size() == 1);
        CHECK(joint[i][0] == single[i]);
    }
}

TEST_CASE("uniform sampler respects the supervisor constraint and covers the space") {
    Fixture f(build_urban7());
    JointActionSpace space(f.state);
    auto all = space.enumerate();
    std::map<std::string, int> hits;
    Rng rng(17);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        auto a = space.sample_uniform(rng);
        REQUIRE(guided_count(a) <= 1);
        REQUIRE(space.contains(a));
        hits[to_string(a)]++;
    }
    CHECK(hits.size() == all.size());
    // Uniformity: every cell within 6 sigma of n / |A|.
    const double expect = double(n) / all.size();
    for (const auto& [k, v] : hits) CHECK(std::abs(v - expect) < 6.0 * std::sqrt(expect));
}

TEST_CASE("check_legal rejects violations") {
    Fixture f(build_urban7());
    CHECK_THROWS_AS(check_legal(f.state, {RobotAction::guided(sector(1)), RobotAction::guided(sector(4))}),
                    ContractViolation);
    CHECK_THROWS_AS(check_legal(f.state, {RobotAction::guided(sector(6)), RobotAction::stay()}), ContractViolation);
    CHECK_THROWS_AS(check_legal(f.state, {RobotAction::guided(sector(0)), RobotAction::stay()}), ContractViolation);
    CHECK_THROWS_AS(check_legal(f.state, {RobotAction::stay()}), ContractViolation);
    CHECK_NOTHROW(check_legal(f.state, {RobotAction::guided(sector(1)), RobotAction::frontier()}));
}

TEST_CASE("all-stay on a fully reported map only advances the clock") {
    Fixture f(build_urban7());
    Rng rng(1);
    RandomChance chance(rng);
    auto out = step(f.model, f.world, f.state, {RobotAction::stay(), RobotAction::stay()}, chance);
    JointState expected = f.state;
    expected.mission.step += 1;
    CHECK(out.next == expected);
    CHECK(out.reward == 0.0);
    CHECK(out.events.empty());
}

TEST_CASE("local search in an in-comm artifact sector detects, reports and scores") {
    Fixture f(single_sector());
    Rng rng(1);
    RandomChance chance(rng);
    REQUIRE(f.state.map[sector(0)].coverage == CoverageLevel::Visited);
    auto out = step(f.model, f.world, f.state, {RobotAction::local_search()}, chance);
    CHECK(out.next.mission.reported_total == 1);
    CHECK(out.next.map[sector(0)].detected == 1);
    CHECK(out.next.map[sector(0)].scored == 1);
    CHECK(out.next.robots[0].unreported.empty());
    // One reported artifact plus beta times the Visited -> Searched value step.
    const double beta = f.model.beta;
    CHECK(out.reward == doctest::Approx(1.0 + beta * (1.0 - 0.5)));
    int detections = 0, reports = 0;
    for (const auto& e : out.events) {
        if (e.kind == EventKind::Detection) detections += e.count;
        if (e.kind == EventKind::Report) reports += e.count;
    }
    CHECK(detections == 1);
    CHECK(reports == 1);
}

TEST_CASE("guided exploration across stairs: wheeled failure rate is halved by supervision") {
    auto sc = load_scenario(
        "[hazards]\nid=st terrain=Stairs difficulty=1\n[sectors]\nid=a comm=1 staging=1\nid=b\n"
        "[edges]\na=a b=b hazard=st\n[team]\nlabel=w mobility=Wheeled\n");
    Fixture f(sc);
    const auto& e = f.state.map.edge(0);
    const double unsupervised = 1.0 - traversal_success_prob(f.model.matrix, f.model.team[0], e, false);
    const double oracle = unsupervised * f.model.traversal.supervision_factor;
    REQUIRE(unsupervised == doctest::Approx(0.8));
    Rng rng(99);
    RandomChance chance(rng);
    JointState next;
    double r;
    const int n = 100000;
    int failed = 0;
    for (int i = 0; i < n; ++i) {
        step_into(f.model, f.world, f.state, {RobotAction::guided(sector(1))}, chance, next, r, nullptr);
        failed += next.robots[0].failed() ? 1 : 0;
    }
    CHECK(std::abs(failed / double(n) - oracle) < 0.01);
    CHECK(std::abs(failed / double(n) - 0.4) < 0.01);

    // Exact enumeration agrees with the oracle.
    auto outs = enumerate_outcomes(f.model, f.world, f.state, {RobotAction::guided(sector(1))});
    double p_fail = 0.0, total = 0.0;
    for (const auto& o : outs) {
        total += o.probability;
        if (o.next.robots[0].failed()) p_fail += o.probability;
    }
    CHECK(total == doctest::Approx(1.0));
    CHECK(p_fail == doctest::Approx(oracle));
}

TEST_CASE("reward rule") {
    Fixture f(toys::chain3());
    JointAction stay{RobotAction::stay()};
    JointState next = f.state;
    CHECK(reward(f.model, f.state, stay, next) == 0.0);
    next.mission.reported_total += 2;
    CHECK(reward(f.model, f.state, stay, next) == doctest::Approx(2.0));

    JointState before = f.state;
    before.map[sector(1)].coverage = CoverageLevel::Unvisited;
    JointState after = before;
    after.map[sector(1)].coverage = CoverageLevel::Searched;
    CHECK(reward(f.model, before, stay, after) == doctest::Approx(0.1));

    // Fully rewarded sector earns no coverage bonus.
    before.map[sector(1)].scored = 1;
    CHECK(reward(f.model, before, stay, after) == 0.0);

    MissionModel no_shaping = f.model;
    no_shaping.beta = 0.0;
    before.map[sector(1)].scored = 0;
    CHECK(reward(no_shaping, before, stay, after) == 0.0);
}

TEST_CASE("termination") {
    Fixture f(build_urban7());
    CHECK(is_terminal(f.state, 40) == Termination::None);
    JointState s = f.state;
    s.mission.step = 40;
    CHECK(is_terminal(s, 40) == Termination::Timeout);

    JointState lost = f.state;
    for (auto& r : lost.robots) {
        r.mobility_ok = false;
        r.position = kNoSector;
    }
    CHECK(is_terminal(lost, 40) == Termination::AllRobotsLost);

    JointState done = f.state;
    for (auto& sb : done.map.sectors) {
        sb.revealed = true;
        sb.coverage = CoverageLevel::Searched;
    }
    done.mission.reported_total = f.sc.map.artifact_total();
    REQUIRE(done.mission.reported_total == 4);
    CHECK(is_terminal(done, 40) == Termination::FullCompletion);
    done.robots[0].unreported.push_back(sector(2));
    CHECK(is_terminal(done, 40) == Termination::None);
}

TEST_CASE("terminal states absorb all-stay") {
    Fixture f(build_urban7());
    JointState lost = f.state;
    for (auto& r : lost.robots) {
        r.mobility_ok = false;
        r.position = kNoSector;
    }
    Rng rng(2);
    RandomChance chance(rng);
    auto out = step(f.model, f.world, lost, {RobotAction::stay(), RobotAction::stay()}, chance);
    JointState expected = lost;
    expected.mission.step++;
    CHECK(out.next == expected);
    CHECK(out.reward == 0.0);
}

TEST_CASE("enumerated outcomes agree with sampled frequencies") {
    Fixture f(build_urban7());
    JointAction a{RobotAction::guided(sector(4)), RobotAction::local_search()};
    auto outs = enumerate_outcomes(f.model, f.world, f.state, a);
    double total = 0.0;
    for (const auto& o : outs) total += o.probability;
    CHECK(total == doctest::Approx(1.0));

    Rng rng(123);
    RandomChance chance(rng);
    const int n = 50000;
    std::vector<int> counts(outs.size(), 0);
    JointState next;
    double r;
    for (int i = 0; i < n; ++i) {
        step_into(f.model, f.world, f.state, a, chance, next, r, nullptr);
        auto it = std::find_if(outs.begin(), outs.end(), [&](const WeightedOutcome& o) { return o.next == next; });
        REQUIRE(it != outs.end());
        CHECK(it->reward == doctest::Approx(r));
        counts[static_cast<std::size_t>(it - outs.begin())]++;
    }
    for (std::size_t k = 0; k < outs.size(); ++k) {
        double p = outs[k].probability;
        CHECK(std::abs(counts[k] / double(n) - p) < 5.0 * std::sqrt(p * (1 - p) / n) + 1e-9);
    }
}

TEST_CASE("a robot's transition does not depend on the other robot's unsupervised action") {
    Fixture f(build_urban7());
    // Robot 1 (legged) crosses the stairs under guidance; robot 0 varies its own action.
    auto marginal = [&](RobotAction other) {
        auto outs = enumerate_outcomes(f.model, f.world, f.state, {other, RobotAction::guided(sector(4))});
        std::map<std::pair<bool, int>, double> m;
        for (const auto& o : outs) m[{o.next.robots[1].failed(), static_cast<int>(o.next.robots[1].position)}] += o.probability;
        return m;
    };
    auto base = marginal(RobotAction::stay());
    for (auto other : {RobotAction::local_search(), RobotAction::frontier()}) {
        auto m = marginal(other);
        REQUIRE(m.size() == base.size());
        for (const auto& [k, p] : base) CHECK(m[k] == doctest::Approx(p));
    }
}

TEST_CASE("frontier seeking moves one edge toward the nearest under-covered sector, lowest id first") {
    Fixture f(build_urban7());
    // From m0 the stubs m1 and m4 are both at distance 1; m1 has the lower id.
    REQUIRE(nearest_frontier(f.state.map, sector(0)) == sector(1));
    Rng rng(4);
    RandomChance chance(rng);
    auto out = step(f.model, f.world, f.state, {RobotAction::frontier(), RobotAction::stay()}, chance);
    CHECK(out.next.robots[0].position == sector(1));
    CHECK(out.next.map[sector(1)].coverage == CoverageLevel::Visited);
    CHECK(out.next.map[sector(2)].revealed);
    CHECK(out.next.map[sector(3)].revealed);
}

TEST_CASE("hash is consistent with equality") {
    Fixture f(build_urban7());
    JointState copy = f.state;
    CHECK(hash_value(copy) == hash_value(f.state));
    copy.mission.step++;
    CHECK_FALSE(copy == f.state);
}
