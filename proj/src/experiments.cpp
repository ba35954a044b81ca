#include "mrx/experiments.hpp"

#include <cstdio>

namespace mrx {

namespace {

std::string fixed(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

std::vector<PolicyRow> compare_policies(const Scenario& scenario, std::size_t n, std::uint64_t base_seed,
                                        const MctsParams& mcts, const BatchOptions& options) {
    std::vector<PolicyRow> rows;
    for (auto kind : {PolicyKind::Mcts, PolicyKind::FullSupervision, PolicyKind::NaiveAutonomy, PolicyKind::Random})
        rows.push_back({kind, run_batch(scenario, Policy{kind, mcts}, n, base_seed, options)});
    return rows;
}

void write_compare_csv(std::ostream& out, const std::vector<PolicyRow>& rows) {
    out << "policy,reward_mean,reward_ci,failures_mean,failures_ci,mission_time_mean,mission_time_ci,coverage_mean\n";
    for (const auto& r : rows) {
        const auto& s = r.stats;
        out << to_string(r.policy) << ',' << fixed(s.reward.mean) << ',' << fixed(s.reward.ci95) << ','
            << fixed(s.failures.mean) << ',' << fixed(s.failures.ci95) << ',' << fixed(s.mission_time.mean) << ','
            << fixed(s.mission_time.ci95) << ',' << fixed(s.coverage.mean) << '\n';
    }
}

std::vector<FormationRow> formation_sweep(const Scenario& base, std::size_t n, std::uint64_t base_seed,
                                          const MctsParams& mcts, const BatchOptions& options) {
    std::vector<FormationRow> rows;
    for (const auto& variant : formation_variants(base)) {
        auto slash = variant.name.rfind('/');
        rows.push_back({variant.name.substr(slash + 1),
                        run_batch(variant, Policy{PolicyKind::Mcts, mcts}, n, base_seed, options)});
    }
    return rows;
}

void write_formation_csv(std::ostream& out, const std::vector<FormationRow>& rows) {
    out << "formation,reward_mean,reward_ci,failures_mean,failures_ci\n";
    for (const auto& r : rows)
        out << r.formation << ',' << fixed(r.stats.reward.mean) << ',' << fixed(r.stats.reward.ci95) << ','
            << fixed(r.stats.failures.mean) << ',' << fixed(r.stats.failures.ci95) << '\n';
}

std::vector<CommRow> comm_sweep(const CommSweepOptions& sweep, std::size_t n, std::uint64_t base_seed,
                                const BatchOptions& options) {
    std::vector<CommRow> rows;
    for (const auto& cell : comm_autonomy_grid(sweep.base, sweep.comm_fractions, sweep.autonomy_levels)) {
        auto episodes = run_episodes(cell.scenario, sweep.policy, n, base_seed, options);
        std::vector<double> pct;
        const double total = static_cast<double>(cell.scenario.map.artifact_total());
        for (const auto& e : episodes) pct.push_back(100.0 * e.reported_rewards / total);
        rows.push_back({cell.comm_fraction, cell.autonomy_level, summarize(std::move(pct)),
                        aggregate(episodes, base_seed)});
    }
    return rows;
}

void write_comm_csv(std::ostream& out, const std::vector<CommRow>& rows) {
    out << "comm_fraction,autonomy_level,scored_artifact_pct_mean,scored_artifact_pct_ci\n";
    for (const auto& r : rows)
        out << fixed(r.comm_fraction) << ',' << fixed(r.autonomy_level) << ',' << fixed(r.scored_pct.mean) << ','
            << fixed(r.scored_pct.ci95) << '\n';
}

}  // namespace mrx
