#include "mrx/robot_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mrx {

namespace {

constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

// Columns: Flat, Stairs, Rubble, NarrowPassage, VerticalShaft, Mud, Rails, Doorway.
constexpr std::array<std::array<double, kBuiltinTerrainCount>, kMobilityClassCount> kDefaultMatrix{{
    {1.0, 0.2, 0.6, 0.8, 0.0, 0.5, 0.9, 0.9},     // Wheeled
    {1.0, 0.9, 0.85, 0.9, 0.0, 0.7, 0.8, 0.95},   // Legged
    {1.0, 1.0, 1.0, 0.6, 0.95, 1.0, 1.0, 0.7},    // Aerial
}};

}  // namespace

CapabilityMatrix::CapabilityMatrix() {
    for (std::size_t m = 0; m < kMobilityClassCount; ++m)
        table_[m].assign(kDefaultMatrix[m].begin(), kDefaultMatrix[m].end());
}

double CapabilityMatrix::base_success(MobilityClass m, TerrainClass t) const {
    const auto& row = table_[static_cast<std::size_t>(m)];
    auto i = static_cast<std::size_t>(t);
    expects(i < row.size() && !std::isnan(row[i]), "capability matrix has no entry for terrain class");
    return row[i];
}

void CapabilityMatrix::set(MobilityClass m, TerrainClass t, double value) {
    auto i = static_cast<std::size_t>(t);
    for (auto& row : table_)
        if (row.size() <= i) row.resize(i + 1, kUndefined);
    table_[static_cast<std::size_t>(m)][i] = value;
}

bool CapabilityMatrix::defined(MobilityClass m, TerrainClass t) const {
    const auto& row = table_[static_cast<std::size_t>(m)];
    auto i = static_cast<std::size_t>(t);
    return i < row.size() && !std::isnan(row[i]);
}

namespace {

double success_from(double base, double difficulty, const RobotCapability& cap, bool supervised,
                    const TraversalParams& params) {
    double failure = (1.0 - base) * difficulty;
    failure *= std::clamp(1.0 - params.autonomy_scale * cap.autonomy_level, 0.0, 1.0);
    if (supervised) failure *= params.supervision_factor;
    return std::clamp(1.0 - failure, 0.0, 1.0);
}

}  // namespace

double traversal_success_prob(const CapabilityMatrix& matrix, const RobotCapability& capability,
                              const KnownEdge& edge, bool supervised, const TraversalParams& params) {
    if (!edge.hazardous()) return 1.0;
    return success_from(matrix.base_success(capability.mobility, edge.terrain), edge.difficulty, capability,
                        supervised, params);
}

double traversal_success_prob(const CapabilityMatrix& matrix, const RobotCapability& capability,
                              const HazardSpec* hazard, bool supervised, const TraversalParams& params) {
    if (hazard == nullptr) return 1.0;
    return success_from(matrix.base_success(capability.mobility, hazard->terrain), hazard->difficulty, capability,
                        supervised, params);
}

bool apply_traversal(RobotState& state, const CapabilityMatrix& matrix, const RobotCapability& capability,
                     const KnownEdge& edge, bool supervised, Chance& chance, const TraversalParams& params) {
    expects(state.mobility_ok, "apply_traversal: robot has failed");
    expects(state.position == edge.a || state.position == edge.b, "apply_traversal: robot not on edge");
    if (chance.bernoulli(traversal_success_prob(matrix, capability, edge, supervised, params))) {
        state.position = edge.other(state.position);
        return false;
    }
    state.mobility_ok = false;
    state.position = kNoSector;
    state.unreported.clear();
    return true;
}

int report(RobotState& state, bool connected) {
    if (!connected || state.unreported.empty()) return 0;
    int n = static_cast<int>(state.unreported.size());
    state.unreported.clear();
    return n;
}

}  // namespace mrx
