#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrx/planner.hpp"

namespace mrx {

struct TeamMember {
    std::string label;
    RobotCapability capability;
    bool operator==(const TeamMember&) const = default;
};

/// A complete, validated mission: ground-truth map, team and model configuration.
struct Scenario {
    std::string name = "scenario";
    TerrainTable terrains;
    MapGraph map;
    std::vector<TeamMember> team;
    int time_limit = 40;
    int horizon = 5;
    std::optional<int> iterations;  // planner iteration override
    int declared_artifacts = 0;
    CoverageValues coverage_values = kDefaultCoverageValues;
    double artifact_prior = 0.5;
    bool relay = true;
    double beta = 0.1;
    double perception_failure = 0.0;
    TraversalParams traversal;
    CapabilityMatrix matrix;

    MissionModel model() const;
    MctsParams mcts_params() const;  // defaults with the scenario's horizon / iterations
};

/// Parse or validation failure; `line` is 0 for whole-file invariants.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

/// Throws ScenarioError naming the violated invariant.
void validate(const Scenario& s);

Scenario load_scenario(std::string_view text);
Scenario load_scenario_file(const std::string& path);
std::string serialize(const Scenario& s);

/// Two-floor building: 7 sectors, one stair edge between floors, V_o = m0..m5,
/// 4 artifacts, one wheeled and one legged robot.
Scenario build_urban7();

struct Subt121Params {
    std::uint64_t seed = 2021;
    double comm_fraction = 0.3;
    std::optional<double> autonomy_level;  // applied to every robot when set
};

/// Synthetic 121-sector Tunnel/Urban/Cave course with 40 artifacts and a 7-robot team.
Scenario build_subt121(const Subt121Params& params = {});

/// Team compositions on the base map: (1W,1L), (2W,0L), (0W,2L), (1W,0L), (0W,1L).
std::vector<Scenario> formation_variants(const Scenario& base);

inline const std::vector<double> kDefaultCommFractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
inline const std::vector<double> kDefaultAutonomyLevels{0.25, 0.5, 0.75, 1.0};

struct GridCell {
    double comm_fraction;
    double autonomy_level;
    Scenario scenario;
};

/// Cartesian grid (comm fraction major, autonomy minor) of SubT course variants.
std::vector<GridCell> comm_autonomy_grid(const Subt121Params& base,
                                         const std::vector<double>& comm_fractions = kDefaultCommFractions,
                                         const std::vector<double>& autonomy_levels = kDefaultAutonomyLevels);

/// Sectors of V_o grown breadth-first from staging (lowest id first) to cover `fraction`.
std::vector<bool> comm_region(const MapGraph& map, double fraction);

}  // namespace mrx
