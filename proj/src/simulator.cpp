#include "mrx/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace mrx {

bool EpisodeResult::operator==(const EpisodeResult& o) const {
    if (reported_rewards != o.reported_rewards || robot_failures != o.robot_failures ||
        mission_time != o.mission_time || termination != o.termination ||
        coverage_fraction != o.coverage_fraction || sectors_revealed_fraction != o.sectors_revealed_fraction ||
        trace.size() != o.trace.size())
        return false;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace[i].action != o.trace[i].action || !(trace[i].outcome.next == o.trace[i].outcome.next) ||
            trace[i].outcome.events != o.trace[i].outcome.events)
            return false;
    }
    return true;
}

EpisodeResult run_episode(const Scenario& scenario, const Policy& policy, std::uint64_t seed,
                          const EpisodeOptions& options) {
    const MissionModel model = scenario.model();
    const TruthWorld truth(scenario.map);
    const BeliefWorld planning_world(model.artifact_prior);
    const Mdp planning{model, planning_world};

    // Environment and planner draws come from separate substreams.
    Rng env_rng(derive_seed(seed, 0, 0));
    Rng plan_rng(derive_seed(seed, 0, 1));
    RandomChance env_chance(env_rng);

    EpisodeResult result;
    JointState state = initial_state(scenario.map, scenario.team.size());
    if (options.record_trace) result.initial = state;

    Termination term;
    while ((term = is_terminal(state, model.time_limit)) == Termination::None) {
        Rng call_rng(plan_rng());
        JointAction action = run_policy(policy, state, planning, call_rng);
        TransitionOutcome out;
        step_into(model, truth, state, action, env_chance, out.next, out.reward,
                  options.record_trace ? &out.events : nullptr);
        if (options.record_trace) {
            result.trace.push_back({state, action, out});
            state = result.trace.back().outcome.next;
        } else {
            state = std::move(out.next);
        }
    }

    result.termination = term;
    result.reported_rewards = state.mission.reported_total;
    result.mission_time = state.mission.step;
    result.robot_failures = static_cast<int>(
        std::count_if(state.robots.begin(), state.robots.end(), [](const RobotState& r) { return r.failed(); }));
    std::size_t searched = 0, revealed = 0;
    for (const auto& sb : state.map.sectors) {
        if (sb.coverage == CoverageLevel::Searched) ++searched;
        if (sb.revealed) ++revealed;
    }
    const double n = static_cast<double>(scenario.map.sector_count());
    result.coverage_fraction = static_cast<double>(searched) / n;
    result.sectors_revealed_fraction = static_cast<double>(revealed) / n;
    return result;
}

MetricStats summarize(std::vector<double> values) {
    MetricStats s;
    if (values.empty()) return s;
    // Sorting first makes the floating-point sums independent of episode order.
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / (n - 1.0));
        s.ci95 = 1.96 * s.stddev / std::sqrt(n);
    }
    s.min = values.front();
    s.max = values.back();
    return s;
}

BatchStats aggregate(const std::vector<EpisodeResult>& episodes, std::uint64_t base_seed) {
    BatchStats b;
    b.n = episodes.size();
    b.base_seed = base_seed;
    auto metric = [&](auto field) {
        std::vector<double> v;
        v.reserve(episodes.size());
        for (const auto& e : episodes) v.push_back(static_cast<double>(field(e)));
        return summarize(std::move(v));
    };
    b.reward = metric([](const EpisodeResult& e) { return e.reported_rewards; });
    b.failures = metric([](const EpisodeResult& e) { return e.robot_failures; });
    b.mission_time = metric([](const EpisodeResult& e) { return e.mission_time; });
    b.coverage = metric([](const EpisodeResult& e) { return e.coverage_fraction; });
    b.revealed = metric([](const EpisodeResult& e) { return e.sectors_revealed_fraction; });
    return b;
}

std::vector<EpisodeResult> run_episodes(const Scenario& scenario, const Policy& policy, std::size_t n,
                                        std::uint64_t base_seed, const BatchOptions& options) {
    expects(n >= 1, "run_batch: n must be at least 1");
    std::vector<EpisodeResult> results(n);
    const EpisodeOptions episode{options.record_trace};
    const unsigned workers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) results[i] = run_episode(scenario, policy, base_seed + i, episode);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) results[i] = run_episode(scenario, policy, base_seed + i, episode);
        });
    }
    pool.clear();
    return results;
}

BatchStats run_batch(const Scenario& scenario, const Policy& policy, std::size_t n, std::uint64_t base_seed,
                     const BatchOptions& options) {
    return aggregate(run_episodes(scenario, policy, n, base_seed, options), base_seed);
}

std::optional<std::string> validate_trace(const Scenario& scenario, const EpisodeResult& episode) {
    if (!episode.initial) return "trace has no initial state";
    const MissionModel model = scenario.model();
    const int total = scenario.map.artifact_total();
    const JointState* prev = &*episode.initial;
    int reported_events = 0;
    for (std::size_t k = 0; k < episode.trace.size(); ++k) {
        const auto& st = episode.trace[k];
        const auto& next = st.outcome.next;
        auto at = [&](const std::string& what) { return "step " + std::to_string(k) + ": " + what; };
        if (!(st.state == *prev)) return at("state does not continue the previous outcome");
        if (guided_count(st.action) > 1) return at("supervisor capacity exceeded");
        try {
            check_legal(st.state, st.action);
        } catch (const ContractViolation& e) {
            return at(std::string("illegal action: ") + e.what());
        }
        if (next.mission.step != st.state.mission.step + 1) return at("step counter did not advance by one");
        if (next.mission.reported_total < st.state.mission.reported_total) return at("reported_total decreased");
        if (next.mission.reported_total > total) return at("reported_total exceeds artifact total");
        for (std::size_t i = 0; i < next.map.size(); ++i) {
            const auto& a = st.state.map.sectors[i];
            const auto& b = next.map.sectors[i];
            if (b.coverage < a.coverage) return at("coverage decreased in sector " + scenario.map.sectors()[i].id);
            if (a.revealed && !b.revealed) return at("sector became unrevealed");
            if (b.detected > scenario.map.sectors()[i].artifact_count) return at("detected more artifacts than exist");
            if (b.scored > b.detected) return at("scored more artifacts than detected");
        }
        int failed_now = 0;
        for (std::size_t i = 0; i < next.robots.size(); ++i) {
            const auto& a = st.state.robots[i];
            const auto& b = next.robots[i];
            if (!a.mobility_ok && b.mobility_ok) return at("mobility health recovered");
            if (!a.perception_ok && b.perception_ok) return at("perception health recovered");
            if (b.failed() != (b.position == kNoSector)) return at("failed flag and position disagree");
            if (a.mobility_ok && !b.mobility_ok) {
                ++failed_now;
                if (!b.unreported.empty()) return at("failed robot kept unreported artifacts");
            }
        }
        int failure_events = 0, step_reports = 0;
        for (const auto& e : st.outcome.events) {
            if (e.kind == EventKind::TraversalFailure) ++failure_events;
            if (e.kind == EventKind::Report) step_reports += e.count;
        }
        if (failure_events != failed_now) return at("failure events do not match health changes");
        if (step_reports != next.mission.reported_total - st.state.mission.reported_total)
            return at("report events do not match reported_total");
        reported_events += step_reports;
        double r = reward(model, st.state, st.action, next);
        if (std::abs(r - st.outcome.reward) > 1e-12) return at("reward does not match the reward rule");
        prev = &next;
    }
    if (!episode.trace.empty()) {
        if (prev->mission.reported_total != episode.reported_rewards) return "final score does not match result";
        if (reported_events != episode.reported_rewards) return "score is not the sum of reports";
    }
    return std::nullopt;
}

}  // namespace mrx
