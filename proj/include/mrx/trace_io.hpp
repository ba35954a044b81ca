#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mrx/simulator.hpp"

namespace mrx {

/// One line of a JSON Lines episode trace: the action taken at `step`, the resulting
/// events and a summary of the state after the transition.
struct TraceRecord {
    struct Robot {
        std::string position;  // empty when failed
        bool mobility_ok = true;
        bool perception_ok = true;
        int unreported = 0;
    };
    struct EventRecord {
        std::string kind;
        int robot = -1;
        std::string sector;
        int count = 0;
    };
    int step = 0;
    std::vector<std::string> actions;
    double reward = 0.0;
    std::vector<EventRecord> events;
    std::vector<Robot> robots;
    std::vector<double> coverage;  // coverage value per sector, scenario order
    int reported_total = 0;
};

struct TraceHeader {
    std::string scenario;
    std::string policy;
    std::uint64_t seed = 0;
    int artifact_total = 0;
    int team_size = 0;
    TraceRecord initial;  // step 0 state summary (no actions)
};

void write_trace(std::ostream& out, const Scenario& scenario, const Policy& policy, std::uint64_t seed,
                 const EpisodeResult& episode);

struct ParsedTrace {
    TraceHeader header;
    std::vector<TraceRecord> steps;
};

ParsedTrace read_trace(std::istream& in);  // throws std::runtime_error on malformed input

/// Replays the invariants that survive serialization (health, coverage, supervisor
/// capacity, score bounds, step counter). Returns the first violation, if any.
std::optional<std::string> validate_trace_records(const ParsedTrace& trace);

}  // namespace mrx
