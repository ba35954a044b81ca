#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mrx {

/// Dense sector index within one scenario. Names live in the MapGraph.
enum class SectorId : std::uint16_t {};

inline constexpr SectorId kNoSector{0xFFFF};

constexpr std::size_t index(SectorId s) { return static_cast<std::size_t>(s); }
constexpr SectorId sector(std::size_t i) { return static_cast<SectorId>(i); }

/// Terrain classes. The first eight are built in; scenario files may register more,
/// which receive indices from kBuiltinTerrainCount upward.
enum class TerrainClass : std::uint8_t {
    Flat = 0,
    Stairs,
    Rubble,
    NarrowPassage,
    VerticalShaft,
    Mud,
    Rails,
    Doorway,
};

inline constexpr std::size_t kBuiltinTerrainCount = 8;

enum class MobilityClass : std::uint8_t { Wheeled = 0, Legged, Aerial };

inline constexpr std::size_t kMobilityClassCount = 3;

std::string_view to_string(MobilityClass m);
MobilityClass parse_mobility(std::string_view name);  // throws std::invalid_argument

/// Discretized coverage. Transitions only move upward.
enum class CoverageLevel : std::uint8_t { Unvisited = 0, Visited = 1, Searched = 2 };

constexpr auto operator<=>(CoverageLevel a, CoverageLevel b) {
    return static_cast<int>(a) <=> static_cast<int>(b);
}

constexpr CoverageLevel raised(CoverageLevel c) {
    return c == CoverageLevel::Searched ? c : static_cast<CoverageLevel>(static_cast<int>(c) + 1);
}

/// Thrown when a documented precondition of an operation does not hold.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline void expects(bool condition, const char* what) {
    if (!condition) throw ContractViolation(what);
}

}  // namespace mrx
