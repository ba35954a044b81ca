#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mrx/planner.hpp"
#include "mrx/scenario.hpp"

namespace mrx {

struct TraceStep {
    JointState state;  // state the action was chosen in
    JointAction action;
    TransitionOutcome outcome;
};

struct EpisodeResult {
    int reported_rewards = 0;
    int robot_failures = 0;
    int mission_time = 0;
    Termination termination = Termination::None;
    double coverage_fraction = 0.0;          // ground-truth sectors at Searched
    double sectors_revealed_fraction = 0.0;  // ground-truth sectors revealed
    std::optional<JointState> initial;       // set with the trace
    std::vector<TraceStep> trace;            // empty unless requested

    bool operator==(const EpisodeResult& o) const;  // compares metrics and trace actions
};

struct EpisodeOptions {
    bool record_trace = false;
};

/// Plan-execute-replan loop; fully deterministic in (scenario, policy, seed).
EpisodeResult run_episode(const Scenario& scenario, const Policy& policy, std::uint64_t seed,
                          const EpisodeOptions& options = {});

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0;   // sample standard deviation, 0 for n = 1
    double ci95 = 0.0;     // normal-approximation half-width
    double min = 0.0;
    double max = 0.0;
    bool operator==(const MetricStats&) const = default;
};

struct BatchStats {
    std::size_t n = 0;
    std::uint64_t base_seed = 0;
    MetricStats reward;
    MetricStats failures;
    MetricStats mission_time;
    MetricStats coverage;
    MetricStats revealed;
    bool operator==(const BatchStats&) const = default;
};

MetricStats summarize(std::vector<double> values);

/// Aggregation is independent of the order of `episodes`.
BatchStats aggregate(const std::vector<EpisodeResult>& episodes, std::uint64_t base_seed);

struct BatchOptions {
    unsigned workers = 1;
    bool record_trace = false;
};

/// Runs episodes with seeds base_seed .. base_seed + n - 1.
std::vector<EpisodeResult> run_episodes(const Scenario& scenario, const Policy& policy, std::size_t n,
                                        std::uint64_t base_seed, const BatchOptions& options = {});

BatchStats run_batch(const Scenario& scenario, const Policy& policy, std::size_t n, std::uint64_t base_seed,
                     const BatchOptions& options = {});

/// Checks a recorded trace against the transition invariants. Returns a description of
/// the first violation, or nullopt.
std::optional<std::string> validate_trace(const Scenario& scenario, const EpisodeResult& episode);

}  // namespace mrx
