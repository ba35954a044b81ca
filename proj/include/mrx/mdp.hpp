#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mrx/robot_model.hpp"
#include "mrx/world_model.hpp"

namespace mrx {

enum class ActionKind : std::uint8_t { Stay = 0, LocalSearch, FrontierSeeking, GuidedExploration };

struct RobotAction {
    ActionKind kind = ActionKind::Stay;
    SectorId target = kNoSector;  // GuidedExploration only

    static constexpr RobotAction stay() { return {ActionKind::Stay, kNoSector}; }
    static constexpr RobotAction local_search() { return {ActionKind::LocalSearch, kNoSector}; }
    static constexpr RobotAction frontier() { return {ActionKind::FrontierSeeking, kNoSector}; }
    static constexpr RobotAction guided(SectorId t) { return {ActionKind::GuidedExploration, t}; }

    bool operator==(const RobotAction&) const = default;
    auto operator<=>(const RobotAction& o) const {
        if (kind != o.kind) return static_cast<int>(kind) <=> static_cast<int>(o.kind);
        return static_cast<int>(target) <=> static_cast<int>(o.target);
    }
};

using JointAction = SmallVec<RobotAction, 8>;

std::string to_string(const RobotAction& a, const MapGraph* names = nullptr);
std::string to_string(const JointAction& a, const MapGraph* names = nullptr);
int guided_count(const JointAction& a);

struct MissionState {
    int reported_total = 0;
    int step = 0;
    bool operator==(const MissionState&) const = default;
};

/// Factored state: map belief, robot states, mission progress.
struct JointState {
    MapBelief map;
    SmallVec<RobotState, 8> robots;
    MissionState mission;

    bool operator==(const JointState&) const = default;
};

std::size_t hash_value(const JointState& s);

/// Static description of the decision process shared by the simulator and planners.
struct MissionModel {
    CapabilityMatrix matrix;
    std::vector<RobotCapability> team;
    TraversalParams traversal;
    CoverageValues coverage_values = kDefaultCoverageValues;
    double beta = 0.1;             // coverage shaping bonus
    double artifact_prior = 0.5;   // expected artifacts in a not-yet-searched sector (planners only)
    double perception_failure = 0.0;  // per-step probability of losing perception
    bool relay = true;
    int time_limit = 40;
};

/// Where revealed structure and hidden artifacts come from during a transition.
class WorldView {
public:
    virtual ~WorldView() = default;
    /// Robot entered `sector`; returns true if the belief changed.
    virtual bool visit(MapBelief& belief, SectorId sector) const = 0;
    /// Artifacts present and not yet detected in `sector`.
    virtual int hidden_artifacts(const MapBelief& belief, SectorId sector, Chance& chance) const = 0;
};

/// Ground truth, used by the simulator.
class TruthWorld final : public WorldView {
public:
    explicit TruthWorld(const MapGraph& truth) : truth_(truth) {}
    bool visit(MapBelief& belief, SectorId sector) const override;
    int hidden_artifacts(const MapBelief& belief, SectorId sector, Chance& chance) const override;
    const MapGraph& truth() const { return truth_; }

private:
    const MapGraph& truth_;
};

/// Belief-level world used for planning: no hidden topology is hallucinated beyond the
/// revealed graph, and artifact counts are drawn from the optimistic prior.
class BeliefWorld final : public WorldView {
public:
    explicit BeliefWorld(double artifact_prior) : prior_(artifact_prior) {}
    bool visit(MapBelief& belief, SectorId sector) const override;
    int hidden_artifacts(const MapBelief& belief, SectorId sector, Chance& chance) const override;

private:
    double prior_;
};

enum class EventKind : std::uint8_t { Reveal, TraversalFailure, PerceptionFailure, Detection, Report };

struct Event {
    EventKind kind;
    int robot = -1;
    SectorId sector = kNoSector;
    int count = 0;
    bool operator==(const Event&) const = default;
};

std::string_view to_string(EventKind k);

struct TransitionOutcome {
    JointState next;
    double reward = 0.0;
    std::vector<Event> events;
};

enum class Termination : std::uint8_t { None = 0, AllRobotsLost, Timeout, FullCompletion };

std::string_view to_string(Termination t);

// ---- navigation over the revealed graph -------------------------------------------

/// Nearest sector other than `from` with coverage below Searched (hop count, lowest id).
std::optional<SectorId> nearest_frontier(const MapBelief& belief, SectorId from);

/// First edge (index into the topology) on a shortest-hop path from `from` to `to`,
/// preferring the lowest-id next sector.
std::optional<std::uint16_t> shortest_hop_step(const MapBelief& belief, SectorId from, SectorId to);

/// Best path success probability and hop count from every sector to `target` when
/// traversed supervised by a robot with `capability`.
struct SafestPaths {
    SmallVec<double, 128> success;
    SmallVec<std::uint16_t, 128> hops;
};
SafestPaths safest_paths_to(const MapBelief& belief, SectorId target, const MissionModel& model,
                            const RobotCapability& capability);

/// First edge on the risk-aware supervised path (max success, then hops, then sector id).
std::optional<std::uint16_t> guided_step(const MapBelief& belief, SectorId from, SectorId target,
                                         const MissionModel& model, const RobotCapability& capability);

// ---- MDP operations ---------------------------------------------------------------

bool frontier_available(const JointState& state, int robot);

/// Legal actions of one robot, in canonical order (Stay, LocalSearch, FrontierSeeking,
/// GuidedExploration by target id).
std::vector<RobotAction> legal_robot_actions(const JointState& state, int robot);

/// Product of the per-robot legal sets restricted to at most one GuidedExploration.
class JointActionSpace {
public:
    explicit JointActionSpace(const JointState& state);

    std::size_t robots() const { return per_robot_.size(); }
    std::span<const RobotAction> robot_actions(int robot) const { return per_robot_[robot]; }
    /// Number of constrained joint actions (as a double, may be astronomically large).
    double size() const;
    bool contains(const JointAction& a) const;
    /// Deterministic enumeration in lexicographic order; throws std::length_error past `cap`.
    std::vector<JointAction> enumerate(std::size_t cap = 1'000'000) const;
    /// Exactly uniform draw over the constrained product.
    JointAction sample_uniform(Rng& rng) const;

private:
    std::vector<std::vector<RobotAction>> per_robot_;
    std::vector<std::size_t> guided_begin_;  // index of first GuidedExploration per robot
};

/// Pure reward rule: artifacts reported this step plus beta times coverage gained in
/// sectors that have not yet yielded their expected artifacts.
double reward(const MissionModel& model, const JointState& state, const JointAction& action,
              const JointState& next);

/// Samples one transition. `events` may be null when no trace is needed.
void step_into(const MissionModel& model, const WorldView& world, const JointState& state,
               const JointAction& action, Chance& chance, JointState& next, double& reward_out,
               std::vector<Event>* events);

TransitionOutcome step(const MissionModel& model, const WorldView& world, const JointState& state,
                       const JointAction& action, Chance& chance);

/// Throws ContractViolation if `action` is not legal in `state`.
void check_legal(const JointState& state, const JointAction& action);

Termination is_terminal(const JointState& state, int time_limit);

struct WeightedOutcome {
    JointState next;
    double reward = 0.0;
    double probability = 0.0;
};

/// Every distinct outcome of a transition with its probability (identical next states merged).
std::vector<WeightedOutcome> enumerate_outcomes(const MissionModel& model, const WorldView& world,
                                                const JointState& state, const JointAction& action);

/// Model + world bundle handed to planners.
struct Mdp {
    const MissionModel& model;
    const WorldView& world;

    Termination terminal(const JointState& s) const { return is_terminal(s, model.time_limit); }
};

/// Robots at staging, staging revealed.
JointState initial_state(const MapGraph& truth, std::size_t team_size);

}  // namespace mrx
