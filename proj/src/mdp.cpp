#include "mrx/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <unordered_map>

namespace mrx {

// ---- printing -------------------------------------------------------------------

std::string to_string(const RobotAction& a, const MapGraph* names) {
    switch (a.kind) {
        case ActionKind::Stay: return "Stay";
        case ActionKind::LocalSearch: return "LocalSearch";
        case ActionKind::FrontierSeeking: return "FrontierSeeking";
        case ActionKind::GuidedExploration: {
            std::string t = names && index(a.target) < names->sector_count() ? names->at(a.target).id
                                                                            : std::to_string(index(a.target));
            return "GuidedExploration(" + t + ")";
        }
    }
    return "?";
}

std::string to_string(const JointAction& a, const MapGraph* names) {
    std::string out = "[";
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) out += ", ";
        out += to_string(a[i], names);
    }
    return out + "]";
}

int guided_count(const JointAction& a) {
    return static_cast<int>(std::count_if(a.begin(), a.end(), [](const RobotAction& r) {
        return r.kind == ActionKind::GuidedExploration;
    }));
}

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::Reveal: return "reveal";
        case EventKind::TraversalFailure: return "traversal_failure";
        case EventKind::PerceptionFailure: return "perception_failure";
        case EventKind::Detection: return "detection";
        case EventKind::Report: return "report";
    }
    return "?";
}

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::None: return "none";
        case Termination::AllRobotsLost: return "all_robots_lost";
        case Termination::Timeout: return "timeout";
        case Termination::FullCompletion: return "full_completion";
    }
    return "?";
}

// ---- hashing ----------------------------------------------------------------------

namespace {

inline void mix(std::size_t& h, std::uint64_t v) {
    h ^= splitmix64(v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2));
}

}  // namespace

std::size_t hash_value(const JointState& s) {
    std::size_t h = s.map.size();
    for (const auto& sb : s.map.sectors) {
        std::uint64_t v = static_cast<std::uint64_t>(sb.revealed) | (static_cast<std::uint64_t>(sb.expanded) << 1) |
                          (static_cast<std::uint64_t>(sb.coverage) << 2) |
                          (static_cast<std::uint64_t>(sb.comm) << 4) |
                          (static_cast<std::uint64_t>(sb.detected) << 8) |
                          (static_cast<std::uint64_t>(sb.scored) << 24);
        mix(h, v);
    }
    mix(h, s.map.topology ? s.map.topology->edges.size() : 0);
    for (const auto& r : s.robots) {
        mix(h, static_cast<std::uint64_t>(r.position) | (static_cast<std::uint64_t>(r.mobility_ok) << 16) |
                   (static_cast<std::uint64_t>(r.perception_ok) << 17) |
                   (static_cast<std::uint64_t>(r.unreported.size()) << 18));
        for (auto u : r.unreported) mix(h, index(u));
    }
    mix(h, static_cast<std::uint64_t>(s.mission.reported_total));
    mix(h, static_cast<std::uint64_t>(s.mission.step));
    return h;
}

// ---- worlds -----------------------------------------------------------------------

bool TruthWorld::visit(MapBelief& belief, SectorId s) const { return reveal_on_visit(belief, truth_, s); }

int TruthWorld::hidden_artifacts(const MapBelief& belief, SectorId s, Chance&) const {
    return std::max(0, truth_.at(s).artifact_count - static_cast<int>(belief[s].detected));
}

bool BeliefWorld::visit(MapBelief& belief, SectorId s) const {
    auto& sb = belief[s];
    bool changed = !sb.revealed || sb.coverage < CoverageLevel::Visited;
    sb.revealed = true;
    if (sb.coverage < CoverageLevel::Visited) sb.coverage = CoverageLevel::Visited;
    return changed;
}

int BeliefWorld::hidden_artifacts(const MapBelief& belief, SectorId s, Chance& chance) const {
    if (belief[s].detected > 0) return 0;
    double whole = std::floor(prior_);
    return static_cast<int>(whole) + (chance.bernoulli(prior_ - whole) ? 1 : 0);
}

// ---- navigation ---------------------------------------------------------------------

std::optional<SectorId> nearest_frontier(const MapBelief& belief, SectorId from) {
    const std::size_t n = belief.size();
    SmallVec<std::uint8_t, 128> seen(n, 0);
    SmallVec<SectorId, 128> layer{from}, next;
    seen[index(from)] = 1;
    while (!layer.empty()) {
        next.clear();
        std::optional<SectorId> best;
        for (SectorId s : layer) {
            for (const auto& [nb, e] : belief.neighbours(s)) {
                if (seen[index(nb)]) continue;
                seen[index(nb)] = 1;
                next.push_back(nb);
                if (belief[nb].coverage < CoverageLevel::Searched && (!best || nb < *best)) best = nb;
            }
        }
        if (best) return best;
        layer.swap(next);
    }
    return std::nullopt;
}

std::optional<std::uint16_t> shortest_hop_step(const MapBelief& belief, SectorId from, SectorId to) {
    if (from == to) return std::nullopt;
    const std::size_t n = belief.size();
    constexpr std::uint16_t kInf = 0xFFFF;
    SmallVec<std::uint16_t, 128> dist(n, kInf);
    SmallVec<SectorId, 128> queue{to};
    dist[index(to)] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        SectorId s = queue[head];
        if (s == from) break;
        for (const auto& [nb, e] : belief.neighbours(s)) {
            if (dist[index(nb)] != kInf) continue;
            dist[index(nb)] = static_cast<std::uint16_t>(dist[index(s)] + 1);
            queue.push_back(nb);
        }
    }
    if (dist[index(from)] == kInf) return std::nullopt;
    // Neighbour lists are sorted by id, so the first match is the lowest-id next sector.
    for (const auto& [nb, e] : belief.neighbours(from))
        if (dist[index(nb)] + 1 == dist[index(from)]) return e;
    return std::nullopt;
}

SafestPaths safest_paths_to(const MapBelief& belief, SectorId target, const MissionModel& model,
                            const RobotCapability& capability) {
    const std::size_t n = belief.size();
    SafestPaths out;
    out.success.assign(n, 0.0);
    out.hops.assign(n, 0xFFFF);
    SmallVec<std::uint8_t, 128> done(n, 0);
    out.success[index(target)] = 1.0;
    out.hops[index(target)] = 0;
    // Dense Dijkstra on max-product success (graphs are small).
    for (;;) {
        int best = -1;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i] || out.hops[i] == 0xFFFF) continue;
            if (best < 0 || out.success[i] > out.success[best] ||
                (out.success[i] == out.success[best] && out.hops[i] < out.hops[best]))
                best = static_cast<int>(i);
        }
        if (best < 0) break;
        done[best] = 1;
        SectorId s = sector(static_cast<std::size_t>(best));
        for (const auto& [nb, e] : belief.neighbours(s)) {
            if (done[index(nb)]) continue;
            double p = out.success[best] *
                       traversal_success_prob(model.matrix, capability, belief.edge(e), true, model.traversal);
            auto h = static_cast<std::uint16_t>(out.hops[best] + 1);
            auto& cur = out.success[index(nb)];
            auto& curh = out.hops[index(nb)];
            if (curh == 0xFFFF || p > cur || (p == cur && h < curh)) {
                cur = p;
                curh = h;
            }
        }
    }
    return out;
}

std::optional<std::uint16_t> guided_step(const MapBelief& belief, SectorId from, SectorId target,
                                         const MissionModel& model, const RobotCapability& capability) {
    if (from == target) return std::nullopt;
    auto paths = safest_paths_to(belief, target, model, capability);
    std::optional<std::uint16_t> best;
    double best_p = -1.0;
    unsigned best_h = 0;
    for (const auto& [nb, e] : belief.neighbours(from)) {
        if (paths.hops[index(nb)] == 0xFFFF) continue;
        double p = traversal_success_prob(model.matrix, capability, belief.edge(e), true, model.traversal) *
                   paths.success[index(nb)];
        unsigned h = paths.hops[index(nb)] + 1u;
        // Strict improvement keeps the lowest-id neighbour on ties.
        if (!best || p > best_p || (p == best_p && h < best_h)) {
            best = e;
            best_p = p;
            best_h = h;
        }
    }
    return best;
}

// ---- actions ------------------------------------------------------------------------

bool frontier_available(const JointState& state, int robot) {
    const auto& r = state.robots.at(robot);
    return !r.failed() && nearest_frontier(state.map, r.position).has_value();
}

std::vector<RobotAction> legal_robot_actions(const JointState& state, int robot) {
    expects(robot >= 0 && static_cast<std::size_t>(robot) < state.robots.size(), "robot index out of range");
    const auto& r = state.robots[robot];
    if (r.failed()) return {RobotAction::stay()};
    std::vector<RobotAction> out{RobotAction::stay(), RobotAction::local_search()};
    if (frontier_available(state, robot)) out.push_back(RobotAction::frontier());
    for (std::size_t i = 0; i < state.map.size(); ++i)
        if (state.map.sectors[i].revealed && sector(i) != r.position) out.push_back(RobotAction::guided(sector(i)));
    return out;
}

JointActionSpace::JointActionSpace(const JointState& state) {
    for (std::size_t i = 0; i < state.robots.size(); ++i) {
        per_robot_.push_back(legal_robot_actions(state, static_cast<int>(i)));
        const auto& acts = per_robot_.back();
        auto it = std::find_if(acts.begin(), acts.end(),
                               [](const RobotAction& a) { return a.kind == ActionKind::GuidedExploration; });
        guided_begin_.push_back(static_cast<std::size_t>(it - acts.begin()));
    }
}

double JointActionSpace::size() const {
    double none = 1.0;
    for (std::size_t i = 0; i < per_robot_.size(); ++i) none *= static_cast<double>(guided_begin_[i]);
    double total = none;
    for (std::size_t j = 0; j < per_robot_.size(); ++j) {
        double g = static_cast<double>(per_robot_[j].size() - guided_begin_[j]);
        if (g == 0.0) continue;
        double term = g;
        for (std::size_t i = 0; i < per_robot_.size(); ++i)
            if (i != j) term *= static_cast<double>(guided_begin_[i]);
        total += term;
    }
    return total;
}

bool JointActionSpace::contains(const JointAction& a) const {
    if (a.size() != per_robot_.size() || guided_count(a) > 1) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::binary_search(per_robot_[i].begin(), per_robot_[i].end(), a[i])) return false;
    return true;
}

std::vector<JointAction> JointActionSpace::enumerate(std::size_t cap) const {
    std::vector<JointAction> out;
    if (per_robot_.empty()) return {JointAction{}};
    std::vector<std::size_t> idx(per_robot_.size(), 0);
    for (;;) {
        JointAction a;
        for (std::size_t i = 0; i < idx.size(); ++i) a.push_back(per_robot_[i][idx[i]]);
        if (guided_count(a) <= 1) {
            if (out.size() >= cap) throw std::length_error("joint action space exceeds enumeration cap");
            out.push_back(std::move(a));
        }
        std::size_t k = idx.size();
        while (k > 0) {
            --k;
            if (++idx[k] < per_robot_[k].size()) break;
            idx[k] = 0;
            if (k == 0) return out;
        }
    }
}

JointAction JointActionSpace::sample_uniform(Rng& rng) const {
    const std::size_t n = per_robot_.size();
    // Category 0: no guided robot; category j+1: robot j guided.
    SmallVec<double, 9> weights;
    double none = 1.0;
    for (std::size_t i = 0; i < n; ++i) none *= static_cast<double>(guided_begin_[i]);
    weights.push_back(none);
    for (std::size_t j = 0; j < n; ++j) {
        double w = static_cast<double>(per_robot_[j].size() - guided_begin_[j]);
        for (std::size_t i = 0; i < n && w > 0.0; ++i)
            if (i != j) w *= static_cast<double>(guided_begin_[i]);
        weights.push_back(w);
    }
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform01(rng) * total;
    std::size_t cat = 0;
    for (; cat + 1 < weights.size(); ++cat) {
        if (u < weights[cat]) break;
        u -= weights[cat];
    }
    while (weights[cat] == 0.0) --cat;  // guards rounding at the upper end

    JointAction a;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& acts = per_robot_[i];
        if (cat == i + 1) {
            std::size_t g = acts.size() - guided_begin_[i];
            a.push_back(acts[guided_begin_[i] + static_cast<std::size_t>(uniform01(rng) * g)]);
        } else {
            a.push_back(acts[static_cast<std::size_t>(uniform01(rng) * guided_begin_[i])]);
        }
    }
    return a;
}

void check_legal(const JointState& state, const JointAction& action) {
    expects(action.size() == state.robots.size(), "joint action size does not match team");
    expects(guided_count(action) <= 1, "supervisor capacity exceeded");
    for (std::size_t i = 0; i < action.size(); ++i) {
        const auto& r = state.robots[i];
        const auto& a = action[i];
        if (r.failed()) {
            expects(a.kind == ActionKind::Stay, "failed robot can only stay");
            continue;
        }
        switch (a.kind) {
            case ActionKind::Stay:
            case ActionKind::LocalSearch: break;
            case ActionKind::FrontierSeeking:
                expects(frontier_available(state, static_cast<int>(i)), "frontier-seeking without a frontier");
                break;
            case ActionKind::GuidedExploration:
                expects(index(a.target) < state.map.size() && state.map[a.target].revealed &&
                            a.target != r.position,
                        "guided-exploration target must be a revealed sector other than the robot's");
                break;
        }
    }
}

// ---- transition -------------------------------------------------------------------

double reward(const MissionModel& model, const JointState& state, const JointAction&, const JointState& next) {
    double r = static_cast<double>(next.mission.reported_total - state.mission.reported_total);
    if (model.beta == 0.0) return r;
    double gained = 0.0;
    for (std::size_t i = 0; i < state.map.size(); ++i) {
        const auto& before = state.map.sectors[i];
        if (static_cast<double>(before.scored) >= model.artifact_prior) continue;
        gained += coverage_value(model.coverage_values, next.map.sectors[i].coverage) -
                  coverage_value(model.coverage_values, before.coverage);
    }
    return r + model.beta * gained;
}

void step_into(const MissionModel& model, const WorldView& world, const JointState& state,
               const JointAction& action, Chance& chance, JointState& next, double& reward_out,
               std::vector<Event>* events) {
    check_legal(state, action);
    expects(model.team.size() == state.robots.size(), "team size does not match state");
    next = state;
    const std::size_t team = state.robots.size();
    auto emit = [&](EventKind k, int robot, SectorId s, int count) {
        if (events) events->push_back({k, robot, s, count});
    };

    // (1) movement, resolved against the pre-step belief.
    SmallVec<SectorId, 8> entered;
    for (std::size_t i = 0; i < team; ++i) {
        const auto& a = action[i];
        const auto& r = state.robots[i];
        if (r.failed()) continue;
        std::optional<std::uint16_t> e;
        bool supervised = false;
        if (a.kind == ActionKind::FrontierSeeking) {
            if (auto target = nearest_frontier(state.map, r.position))
                e = shortest_hop_step(state.map, r.position, *target);
        } else if (a.kind == ActionKind::GuidedExploration) {
            e = guided_step(state.map, r.position, a.target, model, model.team[i]);
            supervised = true;
        }
        if (!e) continue;
        auto& nr = next.robots[i];
        if (apply_traversal(nr, model.matrix, model.team[i], state.map.edge(*e), supervised, chance,
                            model.traversal)) {
            emit(EventKind::TraversalFailure, static_cast<int>(i), r.position, 0);
        } else {
            entered.push_back(nr.position);
        }
    }
    if (model.perception_failure > 0.0) {
        for (std::size_t i = 0; i < team; ++i) {
            auto& nr = next.robots[i];
            if (nr.failed() || !nr.perception_ok) continue;
            if (chance.bernoulli(model.perception_failure)) {
                nr.perception_ok = false;
                emit(EventKind::PerceptionFailure, static_cast<int>(i), nr.position, 0);
            }
        }
    }

    // (2) reveal.
    for (SectorId s : entered)
        if (world.visit(next.map, s)) emit(EventKind::Reveal, -1, s, 0);

    // (3) local search, robots grouped by sector in robot order.
    SmallVec<std::uint8_t, 8> handled(team, 0);
    for (std::size_t i = 0; i < team; ++i) {
        if (handled[i] || action[i].kind != ActionKind::LocalSearch || next.robots[i].failed()) continue;
        SectorId s = next.robots[i].position;
        SmallVec<Searcher, 8> searchers;
        SmallVec<std::size_t, 8> who;
        for (std::size_t j = i; j < team; ++j) {
            if (action[j].kind != ActionKind::LocalSearch || next.robots[j].failed() ||
                next.robots[j].position != s)
                continue;
            handled[j] = 1;
            searchers.push_back({&next.robots[j], &model.team[j]});
            who.push_back(j);
        }
        auto upd = update_coverage(next.map, s, std::span<const Searcher>(searchers.data(), searchers.size()), chance, model.coverage_values);
        if (!upd.reached_searched) continue;
        std::size_t finder = who[static_cast<std::size_t>(upd.completed_by)];
        int hidden = world.hidden_artifacts(next.map, s, chance);
        double perception = effective_perception(next.robots[finder], model.team[finder]);
        int found = sample_detection(hidden, true, upd.delta, perception, chance);
        if (found > 0) {
            next.map[s].detected = static_cast<std::uint16_t>(next.map[s].detected + found);
            for (int k = 0; k < found; ++k) next.robots[finder].unreported.push_back(s);
            emit(EventKind::Detection, static_cast<int>(finder), s, found);
        }
    }

    // (4) communication and reporting.
    SmallVec<SectorId, 8> relays;
    for (std::size_t i = 0; i < team; ++i)
        if (!next.robots[i].failed() && action[i].kind == ActionKind::Stay) relays.push_back(next.robots[i].position);
    auto connected = effective_comm_set(next.map, std::span<const SectorId>(relays.data(), relays.size()), model.relay);
    int reported = 0;
    for (std::size_t i = 0; i < team; ++i) {
        auto& nr = next.robots[i];
        if (nr.failed() || nr.unreported.empty() || !connected[index(nr.position)]) continue;
        for (SectorId src : nr.unreported) next.map[src].scored++;
        int n = report(nr, true);
        reported += n;
        emit(EventKind::Report, static_cast<int>(i), nr.position, n);
    }

    // (5) mission progress, (6) reward.
    next.mission.reported_total += reported;
    next.mission.step += 1;
    reward_out = reward(model, state, action, next);
}

TransitionOutcome step(const MissionModel& model, const WorldView& world, const JointState& state,
                       const JointAction& action, Chance& chance) {
    TransitionOutcome out;
    step_into(model, world, state, action, chance, out.next, out.reward, &out.events);
    return out;
}

Termination is_terminal(const JointState& state, int time_limit) {
    bool any_alive = std::any_of(state.robots.begin(), state.robots.end(),
                                 [](const RobotState& r) { return !r.failed(); });
    if (!any_alive) return Termination::AllRobotsLost;
    bool complete = std::all_of(state.map.sectors.begin(), state.map.sectors.end(), [](const SectorBelief& s) {
        return s.revealed && s.coverage == CoverageLevel::Searched;
    });
    if (complete) {
        complete = std::all_of(state.robots.begin(), state.robots.end(),
                               [](const RobotState& r) { return r.failed() || r.unreported.empty(); });
    }
    if (complete) return Termination::FullCompletion;
    if (state.mission.step >= time_limit) return Termination::Timeout;
    return Termination::None;
}

std::vector<WeightedOutcome> enumerate_outcomes(const MissionModel& model, const WorldView& world,
                                                const JointState& state, const JointAction& action) {
    std::vector<WeightedOutcome> out;
    std::unordered_multimap<std::size_t, std::size_t> by_hash;
    JointState next;
    double r = 0.0;
    enumerate_paths(
        [&](Chance& chance) { step_into(model, world, state, action, chance, next, r, nullptr); },
        [&](double p) {
            if (p <= 0.0) return;
            std::size_t h = hash_value(next);
            auto [lo, hi] = by_hash.equal_range(h);
            for (auto it = lo; it != hi; ++it) {
                auto& o = out[it->second];
                if (o.next == next) {
                    o.probability += p;
                    return;
                }
            }
            by_hash.emplace(h, out.size());
            out.push_back({next, r, p});
        });
    return out;
}

JointState initial_state(const MapGraph& truth, std::size_t team_size) {
    JointState s;
    s.map = initial_belief(truth);
    RobotState r;
    r.position = truth.staging();
    s.robots.assign(team_size, r);
    return s;
}

}  // namespace mrx
