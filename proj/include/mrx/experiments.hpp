#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "mrx/simulator.hpp"

namespace mrx {

struct PolicyRow {
    PolicyKind policy;
    BatchStats stats;
};

/// Mcts, FullSupervision, NaiveAutonomy and Random on one scenario.
std::vector<PolicyRow> compare_policies(const Scenario& scenario, std::size_t n, std::uint64_t base_seed,
                                        const MctsParams& mcts, const BatchOptions& options = {});

/// policy,reward_mean,reward_ci,failures_mean,failures_ci,mission_time_mean,mission_time_ci,coverage_mean
void write_compare_csv(std::ostream& out, const std::vector<PolicyRow>& rows);

struct FormationRow {
    std::string formation;
    BatchStats stats;
};

std::vector<FormationRow> formation_sweep(const Scenario& base, std::size_t n, std::uint64_t base_seed,
                                          const MctsParams& mcts, const BatchOptions& options = {});

/// formation,reward_mean,reward_ci,failures_mean,failures_ci
void write_formation_csv(std::ostream& out, const std::vector<FormationRow>& rows);

struct CommRow {
    double comm_fraction;
    double autonomy_level;
    MetricStats scored_pct;  // percentage of the course's artifacts reported
    BatchStats stats;
};

struct CommSweepOptions {
    Subt121Params base{};
    std::vector<double> comm_fractions = kDefaultCommFractions;
    std::vector<double> autonomy_levels = kDefaultAutonomyLevels;
    Policy policy{};
};

/// Runs `n` episodes per grid cell; rows in grid order (comm major, autonomy minor).
std::vector<CommRow> comm_sweep(const CommSweepOptions& sweep, std::size_t n, std::uint64_t base_seed,
                                const BatchOptions& options = {});

/// comm_fraction,autonomy_level,scored_artifact_pct_mean,scored_artifact_pct_ci
void write_comm_csv(std::ostream& out, const std::vector<CommRow>& rows);

}  // namespace mrx
