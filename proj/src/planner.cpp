#include "mrx/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace mrx {

double Widening::limit(double visits) const { return k * std::pow(visits, alpha); }

void MctsParams::validate() const {
    expects(iterations >= 0, "iterations must be non-negative");
    expects(horizon >= 1, "horizon must be at least 1");
    expects(discount > 0.0 && discount <= 1.0, "discount must lie in (0,1]");
    for (const auto& w : {action_widening, state_widening})
        expects(w.k > 0.0 && w.alpha > 0.0 && w.alpha < 1.0, "widening needs k > 0 and 0 < alpha < 1");
}

std::string_view to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::Mcts: return "mcts";
        case PolicyKind::FullSupervision: return "supervised";
        case PolicyKind::NaiveAutonomy: return "naive";
        case PolicyKind::Random: return "random";
    }
    return "?";
}

PolicyKind parse_policy(std::string_view name) {
    for (auto k : {PolicyKind::Mcts, PolicyKind::FullSupervision, PolicyKind::NaiveAutonomy, PolicyKind::Random})
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

// ---- baselines --------------------------------------------------------------------

namespace {

bool searchable(const JointState& s, const RobotState& r) {
    return r.perception_ok && s.map[r.position].coverage < CoverageLevel::Searched;
}

}  // namespace

JointAction naive_autonomy(const JointState& state) {
    JointAction a;
    for (std::size_t i = 0; i < state.robots.size(); ++i) {
        const auto& r = state.robots[i];
        if (r.failed())
            a.push_back(RobotAction::stay());
        else if (searchable(state, r))
            a.push_back(RobotAction::local_search());
        else if (nearest_frontier(state.map, r.position))
            a.push_back(RobotAction::frontier());
        else
            a.push_back(RobotAction::stay());
    }
    return a;
}

JointAction full_supervision(const JointState& state, const MissionModel& model) {
    JointAction a;
    SmallVec<std::size_t, 8> operational, idle;
    for (std::size_t i = 0; i < state.robots.size(); ++i) {
        const auto& r = state.robots[i];
        a.push_back(r.failed() ? RobotAction::stay()
                               : (searchable(state, r) ? RobotAction::local_search() : RobotAction::stay()));
        if (r.failed()) continue;
        operational.push_back(i);
        if (!searchable(state, r)) idle.push_back(i);
    }
    if (operational.empty()) return a;
    const auto& pool = idle.empty() ? operational : idle;
    std::size_t chosen = pool[static_cast<std::size_t>(state.mission.step) % pool.size()];
    const auto& robot = state.robots[chosen];

    // Paths are symmetric, so one search from the robot scores every target.
    auto paths = safest_paths_to(state.map, robot.position, model, model.team[chosen]);
    const bool holding = !robot.unreported.empty() && !state.map.in_comm(robot.position);
    std::optional<SectorId> best;
    double best_score = -1.0;
    unsigned best_hops = 0;
    for (std::size_t t = 0; t < state.map.size(); ++t) {
        const auto& sb = state.map.sectors[t];
        if (!sb.revealed || sector(t) == robot.position || paths.hops[t] == 0xFFFF) continue;
        double value = sb.coverage < CoverageLevel::Searched ? model.artifact_prior : 0.0;
        if (holding && sb.comm == CommKnowledge::InRange) value += static_cast<double>(robot.unreported.size());
        double score = paths.success[t] * value * std::pow(0.95, paths.hops[t]);
        if (!best || score > best_score || (score == best_score && paths.hops[t] < best_hops)) {
            best = sector(t);
            best_score = score;
            best_hops = paths.hops[t];
        }
    }
    if (best) a[chosen] = RobotAction::guided(*best);
    return a;
}

JointAction baseline_policy(PolicyKind kind, const JointState& state, const Mdp& mdp, Rng& rng) {
    expects(mdp.terminal(state) == Termination::None, "baseline_policy: state is terminal");
    switch (kind) {
        case PolicyKind::FullSupervision: return full_supervision(state, mdp.model);
        case PolicyKind::NaiveAutonomy: return naive_autonomy(state);
        case PolicyKind::Random: return JointActionSpace(state).sample_uniform(rng);
        case PolicyKind::Mcts: break;
    }
    throw ContractViolation("baseline_policy: not a baseline policy kind");
}

JointAction run_policy(const Policy& policy, const JointState& state, const Mdp& mdp, Rng& rng) {
    if (policy.kind == PolicyKind::Mcts) return plan_action(state, mdp, policy.mcts, rng);
    return baseline_policy(policy.kind, state, mdp, rng);
}

// ---- value helpers -------------------------------------------------------------------

double reward_scale(const JointState& state, const MissionModel& model, int horizon) {
    double held = 0.0;
    int operational = 0;
    for (const auto& r : state.robots) {
        if (r.failed()) continue;
        ++operational;
        held += static_cast<double>(r.unreported.size());
    }
    int unsearched = 0;
    for (const auto& sb : state.map.sectors)
        if (sb.revealed && sb.coverage < CoverageLevel::Searched) ++unsearched;
    double reachable = std::min<double>(unsearched, operational * ((horizon + 1) / 2));
    return std::max(1.0, held + reachable * model.artifact_prior);
}

double unreported_value(const JointState& state, const MissionModel& model, double discount) {
    double total = 0.0;
    for (std::size_t i = 0; i < state.robots.size(); ++i) {
        const auto& r = state.robots[i];
        if (r.failed() || r.unreported.empty()) continue;
        double best = 0.0;
        if (state.map.in_comm(r.position)) {
            best = 1.0;
        } else {
            auto paths = safest_paths_to(state.map, r.position, model, model.team[i]);
            for (std::size_t t = 0; t < state.map.size(); ++t) {
                if (state.map.sectors[t].comm != CommKnowledge::InRange || paths.hops[t] == 0xFFFF) continue;
                best = std::max(best, paths.success[t] * std::pow(discount, paths.hops[t]));
            }
        }
        total += best * static_cast<double>(r.unreported.size());
    }
    return total;
}

// ---- MCTS-DPW ---------------------------------------------------------------------

MctsPlanner::MctsPlanner(const Mdp& mdp, MctsParams params) : mdp_(mdp), params_(params) { params_.validate(); }

int MctsPlanner::add_state(const JointState& s) {
    DpwTree::StateNode node;
    node.state = s;
    node.hash = hash_value(s);
    node.terminal = mdp_.terminal(s) != Termination::None;
    tree_.states_.push_back(std::move(node));
    return static_cast<int>(tree_.states_.size() - 1);
}

double MctsPlanner::bootstrap(const JointState& s) const {
    if (!params_.horizon_bootstrap || mdp_.terminal(s) != Termination::None) return 0.0;
    return unreported_value(s, mdp_.model, params_.discount);
}

JointAction MctsPlanner::propose_action(const JointAction& naive, const JointActionSpace& space, int attempt,
                                        Rng& rng) const {
    if (attempt == 0 && space.contains(naive)) return naive;
    // Uniform per-robot draws conditioned on supervisor capacity are exactly a uniform
    // draw over the constrained product, so sample that directly.
    JointAction u = space.sample_uniform(rng);
    if (uniform01(rng) < 0.5) return u;
    // Perturb the default action: each robot takes the uniform draw's entry with
    // probability 1/2. The naive action has no guided entry, so capacity still holds.
    JointAction a = naive;
    for (std::size_t i = 0; i < space.robots(); ++i)
        if (uniform01(rng) < 0.5) a[i] = u[i];
    return a;
}

double MctsPlanner::rollout(const JointState& state, int depth, Rng& rng) {
    if (mdp_.terminal(state) != Termination::None) return 0.0;
    JointState s = state, next;
    RandomChance chance(rng);
    double total = 0.0, weight = 1.0;
    for (int d = 0; d < depth; ++d) {
        double r = 0.0;
        step_into(mdp_.model, mdp_.world, s, naive_autonomy(s), chance, next, r, nullptr);
        total += weight * r;
        weight *= params_.discount;
        std::swap(s, next);
        if (mdp_.terminal(s) != Termination::None) return total;
    }
    return total + weight * bootstrap(s);
}

double MctsPlanner::simulate(int node, int depth, Rng& rng) {
    if (tree_.states_[node].terminal) return 0.0;
    if (depth == 0) return bootstrap(tree_.states_[node].state);

    // Action widening.
    {
        auto& sn = tree_.states_[node];
        const double allowed = params_.action_widening.limit(static_cast<double>(sn.visits + 1));
        if (static_cast<double>(sn.actions.size() + 1) <= allowed) {
            if (!sn.space) {
                sn.space = std::make_shared<const JointActionSpace>(sn.state);
                sn.naive = naive_autonomy(sn.state);
            }
            const bool exhausted = static_cast<double>(sn.actions.size()) >= sn.space->size();
            for (int attempt = 0; attempt < 16 && !exhausted; ++attempt) {
                auto a = propose_action(sn.naive, *sn.space, static_cast<int>(sn.actions.size()) + attempt, rng);
                bool duplicate = std::any_of(sn.actions.begin(), sn.actions.end(), [&](int ai) {
                    return tree_.actions_[static_cast<std::size_t>(ai)].action == a;
                });
                if (duplicate) continue;
                tree_.actions_.push_back({std::move(a), 0, 0.0, {}});
                tree_.states_[node].actions.push_back(static_cast<int>(tree_.actions_.size() - 1));
                break;
            }
        }
    }

    // UCB1 selection; unvisited actions first.
    int chosen = -1;
    {
        const auto& sn = tree_.states_[node];
        double best = -std::numeric_limits<double>::infinity();
        const double log_n = std::log(static_cast<double>(std::max(sn.visits, 1)));
        for (int ai : sn.actions) {
            const auto& an = tree_.actions_[static_cast<std::size_t>(ai)];
            if (an.visits == 0) {
                chosen = ai;
                break;
            }
            double ucb = an.value + exploration_ * std::sqrt(log_n / an.visits);
            if (ucb > best) {
                best = ucb;
                chosen = ai;
            }
        }
    }

    // State widening.
    double q = 0.0;
    auto& an0 = tree_.actions_[static_cast<std::size_t>(chosen)];
    const double allowed = params_.state_widening.limit(static_cast<double>(an0.visits + 1));
    if (static_cast<double>(an0.outcomes.size() + 1) <= allowed || an0.outcomes.empty()) {
        JointState next;
        double r = 0.0;
        RandomChance chance(rng);
        step_into(mdp_.model, mdp_.world, tree_.states_[node].state, an0.action, chance, next, r, nullptr);
        const std::size_t h = hash_value(next);
        int existing = -1;
        for (std::size_t k = 0; k < an0.outcomes.size(); ++k) {
            const auto& child = tree_.states_[static_cast<std::size_t>(an0.outcomes[k].node)];
            if (child.hash == h && child.state == next) {
                existing = static_cast<int>(k);
                break;
            }
        }
        if (existing >= 0) {
            auto& o = tree_.actions_[static_cast<std::size_t>(chosen)].outcomes[static_cast<std::size_t>(existing)];
            ++o.count;
            int child = o.node;
            q = r + params_.discount * simulate(child, depth - 1, rng);
        } else {
            int child = add_state(next);
            tree_.actions_[static_cast<std::size_t>(chosen)].outcomes.push_back({child, r, 1});
            q = r + params_.discount * rollout(tree_.states_[static_cast<std::size_t>(child)].state, depth - 1, rng);
        }
    } else {
        int total = 0;
        for (const auto& o : an0.outcomes) total += o.count;
        int pick = static_cast<int>(uniform01(rng) * total);
        std::size_t k = 0;
        for (; k + 1 < an0.outcomes.size(); ++k) {
            if (pick < an0.outcomes[k].count) break;
            pick -= an0.outcomes[k].count;
        }
        int child = an0.outcomes[k].node;
        double r = an0.outcomes[k].reward;
        q = r + params_.discount * simulate(child, depth - 1, rng);
    }

    auto& sn = tree_.states_[node];
    auto& an = tree_.actions_[static_cast<std::size_t>(chosen)];
    ++sn.visits;
    ++an.visits;
    an.value += (q - an.value) / an.visits;
    return q;
}

JointAction MctsPlanner::plan(const JointState& state, Rng& rng) {
    expects(mdp_.terminal(state) == Termination::None, "plan_action: state is terminal");
    tree_ = DpwTree{};
    JointActionSpace space(state);
    if (space.size() == 1.0) return space.enumerate(1).front();

    exploration_ = params_.exploration * reward_scale(state, mdp_.model, params_.horizon);
    add_state(state);
    for (int it = 0; it < params_.iterations; ++it) simulate(0, params_.horizon, rng);

    const auto& root = tree_.states_.front();
    if (root.actions.empty()) return naive_autonomy(state);
    const DpwTree::ActionNode* best = nullptr;
    for (int ai : root.actions) {
        const auto& an = tree_.actions_[static_cast<std::size_t>(ai)];
        if (!best || an.visits > best->visits ||
            (an.visits == best->visits &&
             (an.value > best->value || (an.value == best->value && an.action < best->action))))
            best = &an;
    }
    return best->action;
}

JointAction plan_action(const JointState& state, const Mdp& mdp, const MctsParams& params, Rng& rng) {
    MctsPlanner planner(mdp, params);
    return planner.plan(state, rng);
}

// ---- expectimax oracle ------------------------------------------------------------

namespace {

class Expectimax {
public:
    Expectimax(const Mdp& mdp, const ExpectimaxOptions& opts) : mdp_(mdp), opts_(opts) {}

    double value(const JointState& s, int depth) {
        if (mdp_.terminal(s) != Termination::None) return 0.0;
        if (depth == 0) return opts_.horizon_bootstrap ? unreported_value(s, mdp_.model, opts_.discount) : 0.0;
        const std::size_t h = hash_value(s) ^ (static_cast<std::size_t>(depth) * 0x9E3779B97F4A7C15ULL);
        auto [lo, hi] = memo_.equal_range(h);
        for (auto it = lo; it != hi; ++it)
            if (it->second.depth == depth && it->second.state == s) return it->second.value;

        if (++expanded_ > opts_.node_budget)
            throw OracleInfeasible("expectimax node budget exceeded (" + std::to_string(opts_.node_budget) + ")");
        std::vector<JointAction> actions;
        try {
            actions = JointActionSpace(s).enumerate(opts_.node_budget);
        } catch (const std::length_error&) {
            throw OracleInfeasible("joint action space too large to enumerate");
        }
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& a : actions) best = std::max(best, q(s, a, depth));
        memo_.emplace(h, Entry{s, depth, best});
        return best;
    }

    double q(const JointState& s, const JointAction& a, int depth) {
        double total = 0.0;
        for (const auto& o : enumerate_outcomes(mdp_.model, mdp_.world, s, a))
            total += o.probability * (o.reward + opts_.discount * value(o.next, depth - 1));
        return total;
    }

private:
    struct Entry {
        JointState state;
        int depth;
        double value;
    };
    const Mdp& mdp_;
    ExpectimaxOptions opts_;
    std::size_t expanded_ = 0;
    std::unordered_multimap<std::size_t, Entry> memo_;
};

}  // namespace

double expectimax_value(const JointState& state, const Mdp& mdp, int depth, const ExpectimaxOptions& opts) {
    expects(depth >= 0, "expectimax depth must be non-negative");
    Expectimax solver(mdp, opts);
    return solver.value(state, depth);
}

double expectimax_q(const JointState& state, const JointAction& action, const Mdp& mdp, int depth,
                    const ExpectimaxOptions& opts) {
    expects(depth >= 1, "expectimax_q needs depth >= 1");
    check_legal(state, action);
    if (mdp.terminal(state) != Termination::None) return 0.0;
    Expectimax solver(mdp, opts);
    return solver.q(state, action, depth);
}

}  // namespace mrx
