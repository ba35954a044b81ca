#pragma once

#include <array>
#include <vector>

#include "mrx/world_model.hpp"

namespace mrx {

/// Base traversal success at difficulty 1.0, per mobility class and terrain class.
class CapabilityMatrix {
public:
    /// Calibrated defaults for the eight built-in terrain classes.
    CapabilityMatrix();

    double base_success(MobilityClass m, TerrainClass t) const;
    void set(MobilityClass m, TerrainClass t, double value);  // grows for extension classes
    bool defined(MobilityClass m, TerrainClass t) const;
    std::size_t terrain_count() const { return table_[0].size(); }

    bool operator==(const CapabilityMatrix&) const = default;

private:
    std::array<std::vector<double>, kMobilityClassCount> table_;  // NaN = undefined
};

struct RobotCapability {
    MobilityClass mobility = MobilityClass::Wheeled;
    double perception = 1.0;      // per-step search success
    double autonomy_level = 0.0;  // lambda in [0,1]

    bool operator==(const RobotCapability&) const = default;
};

/// Knobs of the traversal model shared by a scenario.
struct TraversalParams {
    double supervision_factor = 0.5;  // multiplies failure probability when supervised
    double autonomy_scale = 1.0;
};

struct RobotState {
    SectorId position{};
    bool mobility_ok = true;
    bool perception_ok = true;
    SmallVec<SectorId, 6> unreported;  // source sector of each detected, unreported artifact

    bool failed() const { return !mobility_ok; }
    bool operator==(const RobotState&) const = default;
};

inline double effective_perception(const RobotState& s, const RobotCapability& c) {
    return s.perception_ok && s.mobility_ok ? c.perception : 0.0;
}

double traversal_success_prob(const CapabilityMatrix& matrix, const RobotCapability& capability,
                              const KnownEdge& edge, bool supervised,
                              const TraversalParams& params = {});

/// Same model, with the hazard given directly (nullptr = hazard-free edge).
double traversal_success_prob(const CapabilityMatrix& matrix, const RobotCapability& capability,
                              const HazardSpec* hazard, bool supervised,
                              const TraversalParams& params = {});

/// Moves the robot across `edge` or breaks it. A broken robot loses its unreported artifacts.
/// Returns true if the robot failed.
bool apply_traversal(RobotState& state, const CapabilityMatrix& matrix, const RobotCapability& capability,
                     const KnownEdge& edge, bool supervised, Chance& chance,
                     const TraversalParams& params = {});

/// Empties the unreported set if connected; returns the number reported.
int report(RobotState& state, bool connected);

}  // namespace mrx
