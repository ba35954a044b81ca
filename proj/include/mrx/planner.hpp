#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrx/mdp.hpp"

namespace mrx {

struct Widening {
    double k = 4.0;
    double alpha = 0.5;

    /// Maximum number of children allowed after `visits` visits.
    double limit(double visits) const;
};

struct MctsParams {
    int iterations = 10000;
    int horizon = 5;
    double discount = 0.95;
    double exploration = 1.4;  // multiplied by the reward scale of the root state
    Widening action_widening{};
    Widening state_widening{};
    /// Value credited at the planning horizon for artifacts still held: each is worth its
    /// safest-path success probability to the nearest comm sector, discounted by hops.
    bool horizon_bootstrap = true;

    void validate() const;
};

enum class PolicyKind : std::uint8_t { Mcts = 0, FullSupervision, NaiveAutonomy, Random };

std::string_view to_string(PolicyKind k);
PolicyKind parse_policy(std::string_view name);  // mcts|supervised|naive|random; throws std::invalid_argument

struct Policy {
    PolicyKind kind = PolicyKind::Mcts;
    MctsParams mcts{};
};

/// Double-progressive-widening search tree. Decision nodes hold states; action nodes
/// hold the sampled outcome states with their transition rewards.
class DpwTree {
public:
    struct Outcome {
        int node;
        double reward;
        int count;
    };
    struct ActionNode {
        JointAction action;
        int visits = 0;
        double value = 0.0;  // running mean of returns
        std::vector<Outcome> outcomes;
    };
    struct StateNode {
        JointState state;
        std::size_t hash = 0;
        int visits = 0;
        bool terminal = false;
        std::vector<int> actions;  // indices into action_nodes()
        std::shared_ptr<const JointActionSpace> space;  // built on first expansion
        JointAction naive;
    };

    std::span<const StateNode> state_nodes() const { return states_; }
    std::span<const ActionNode> action_nodes() const { return actions_; }
    const StateNode& root() const { return states_.front(); }

private:
    friend class MctsPlanner;
    std::vector<StateNode> states_;
    std::vector<ActionNode> actions_;
};

/// Receding-horizon MCTS with double progressive widening over a generative MDP.
class MctsPlanner {
public:
    MctsPlanner(const Mdp& mdp, MctsParams params);

    /// Runs `iterations` simulations from `state` and returns the most visited root action
    /// (ties: higher value, then canonical action order).
    JointAction plan(const JointState& state, Rng& rng);

    const DpwTree& tree() const { return tree_; }
    double exploration_constant() const { return exploration_; }

private:
    double simulate(int node, int depth, Rng& rng);
    double rollout(const JointState& state, int depth, Rng& rng);
    double bootstrap(const JointState& state) const;
    int add_state(const JointState& s);
    JointAction propose_action(const JointAction& naive, const JointActionSpace& space, int attempt, Rng& rng) const;

    const Mdp& mdp_;
    MctsParams params_;
    DpwTree tree_;
    double exploration_ = 0.0;
};

JointAction plan_action(const JointState& state, const Mdp& mdp, const MctsParams& params, Rng& rng);

/// Reward scale used for the UCB exploration term: artifacts a team could plausibly report
/// within the horizon from this state (at least 1).
double reward_scale(const JointState& state, const MissionModel& model, int horizon);

class OracleInfeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExpectimaxOptions {
    double discount = 1.0;
    std::size_t node_budget = 2'000'000;
    bool horizon_bootstrap = false;
};

/// Exact finite-horizon optimal value by full enumeration of joint actions and outcomes.
/// Throws OracleInfeasible when more than `node_budget` nodes would be expanded.
double expectimax_value(const JointState& state, const Mdp& mdp, int depth, const ExpectimaxOptions& opts = {});

/// Exact value of taking `action` first, then acting optimally.
double expectimax_q(const JointState& state, const JointAction& action, const Mdp& mdp, int depth,
                    const ExpectimaxOptions& opts = {});

/// Hand-written policies restricted to their action subsets.
JointAction baseline_policy(PolicyKind kind, const JointState& state, const Mdp& mdp, Rng& rng);

JointAction naive_autonomy(const JointState& state);
JointAction full_supervision(const JointState& state, const MissionModel& model);

/// Uniform dispatch to the planner or a baseline.
JointAction run_policy(const Policy& policy, const JointState& state, const Mdp& mdp, Rng& rng);

/// Horizon-end value of unreported artifacts (see MctsParams::horizon_bootstrap).
double unreported_value(const JointState& state, const MissionModel& model, double discount);

}  // namespace mrx
