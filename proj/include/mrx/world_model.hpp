#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "mrx/chance.hpp"
#include "mrx/types.hpp"

namespace mrx {

template <typename T, std::size_t N>
using SmallVec = boost::container::small_vector<T, N>;

/// Per-sector flag array, one byte per sector.
using SectorMask = SmallVec<std::uint8_t, 128>;

/// Terrain class names for one scenario: the built-in eight plus any extensions.
class TerrainTable {
public:
    TerrainTable();

    std::size_t size() const { return names_.size(); }
    const std::string& name(TerrainClass t) const { return names_.at(static_cast<std::size_t>(t)); }
    std::optional<TerrainClass> find(std::string_view name) const;
    TerrainClass add(std::string name);  // returns existing class if already present
    std::span<const std::string> extensions() const {
        return std::span(names_).subspan(kBuiltinTerrainCount);
    }

private:
    std::vector<std::string> names_;
};

struct HazardSpec {
    std::string id;
    TerrainClass terrain = TerrainClass::Flat;
    double difficulty = 0.0;  // [0,1]
};

struct SectorGroundTruth {
    std::string id;
    int artifact_count = 0;
    bool in_comm_range = false;  // member of V_o
    bool is_staging = false;
    std::string region;  // free-form label (floor, course region)
    CoverageLevel initial_coverage = CoverageLevel::Unvisited;
};

struct MapEdge {
    SectorId a{};
    SectorId b{};
    int hazard = -1;  // index into MapGraph::hazards, -1 = hazard-free
};

/// Ground-truth topological map: sectors, hazards and undirected hazard-labelled edges.
class MapGraph {
public:
    MapGraph() = default;
    MapGraph(std::vector<SectorGroundTruth> sectors, std::vector<HazardSpec> hazards,
             std::vector<MapEdge> edges);

    std::span<const SectorGroundTruth> sectors() const { return sectors_; }
    std::span<const HazardSpec> hazards() const { return hazards_; }
    std::span<const MapEdge> edges() const { return edges_; }
    std::size_t sector_count() const { return sectors_.size(); }

    const SectorGroundTruth& at(SectorId s) const { return sectors_.at(index(s)); }
    const HazardSpec* hazard_of(const MapEdge& e) const {
        return e.hazard < 0 ? nullptr : &hazards_[static_cast<std::size_t>(e.hazard)];
    }
    /// Edge indices incident to a sector, ordered by neighbour id.
    std::span<const std::uint16_t> incident(SectorId s) const { return incident_.at(index(s)); }
    std::optional<SectorId> find_sector(std::string_view id) const;
    std::optional<int> find_hazard(std::string_view id) const;
    SectorId staging() const;
    int artifact_total() const;
    bool connected_from_staging() const;

private:
    std::vector<SectorGroundTruth> sectors_;
    std::vector<HazardSpec> hazards_;
    std::vector<MapEdge> edges_;
    std::vector<std::vector<std::uint16_t>> incident_;
};

/// An edge known to the team, carrying its hazard description.
struct KnownEdge {
    SectorId a{};
    SectorId b{};
    int hazard = -1;
    TerrainClass terrain = TerrainClass::Flat;
    double difficulty = 0.0;

    bool hazardous() const { return hazard >= 0; }
    SectorId other(SectorId s) const { return s == a ? b : a; }
    bool operator==(const KnownEdge&) const = default;
};

/// Revealed graph. Immutable once built; beliefs share it until a reveal adds edges.
struct Topology {
    std::vector<KnownEdge> edges;
    /// (neighbour, edge index) sorted by neighbour id, one list per sector.
    std::vector<std::vector<std::pair<SectorId, std::uint16_t>>> adjacency;

    explicit Topology(std::size_t sector_count) : adjacency(sector_count) {}
    void add(const KnownEdge& e);
};

enum class CommKnowledge : std::uint8_t { Unknown = 0, InRange, OutOfRange };

struct SectorBelief {
    bool revealed = false;
    bool expanded = false;  // visited: incident edges are known
    CoverageLevel coverage = CoverageLevel::Unvisited;
    CommKnowledge comm = CommKnowledge::Unknown;
    std::uint16_t detected = 0;  // artifacts found in this sector
    std::uint16_t scored = 0;    // artifacts reported from this sector

    bool operator==(const SectorBelief&) const = default;
};

/// The team's shared map belief: revealed sectors/edges, coverage, communicability.
struct MapBelief {
    SmallVec<SectorBelief, 128> sectors;
    std::shared_ptr<const Topology> topology;

    MapBelief() = default;
    explicit MapBelief(std::size_t sector_count);

    std::size_t size() const { return sectors.size(); }
    const SectorBelief& operator[](SectorId s) const { return sectors[index(s)]; }
    SectorBelief& operator[](SectorId s) { return sectors[index(s)]; }
    bool in_comm(SectorId s) const { return sectors[index(s)].comm == CommKnowledge::InRange; }

    std::span<const std::pair<SectorId, std::uint16_t>> neighbours(SectorId s) const {
        return topology->adjacency[index(s)];
    }
    const KnownEdge& edge(std::uint16_t e) const { return topology->edges[e]; }

    bool operator==(const MapBelief& o) const;
};

/// Coverage level values, scenario-configurable (default 0, 0.5, 1).
using CoverageValues = std::array<double, 3>;
inline constexpr CoverageValues kDefaultCoverageValues{0.0, 0.5, 1.0};

inline double coverage_value(const CoverageValues& v, CoverageLevel c) {
    return v[static_cast<std::size_t>(c)];
}

/// Marks `sector` visited: reveals it, its incident edges and its neighbours (as stubs),
/// raises its coverage to at least Visited and records its comm membership.
/// Returns true if the belief changed.
bool reveal_on_visit(MapBelief& belief, const MapGraph& truth, SectorId sector);

/// Initial belief: sectors with a non-zero initial coverage are pre-revealed, then the
/// staging sector is visited.
MapBelief initial_belief(const MapGraph& truth);

struct RobotState;
struct RobotCapability;

struct Searcher {
    const RobotState* state;
    const RobotCapability* capability;
};

struct CoverageUpdate {
    double delta = 0.0;          // total coverage value increase
    int completed_by = -1;       // index of the searcher whose step reached Searched
    bool reached_searched = false;
};

/// Sequentially applies each searcher's one-level step (success probability = effective
/// perception) to the sector's coverage.
CoverageUpdate update_coverage(MapBelief& belief, SectorId sector, std::span<const Searcher> searchers,
                               Chance& chance, const CoverageValues& values = kDefaultCoverageValues);

/// Number of artifacts found among `hidden` when coverage transitioned into Searched;
/// each is found independently with probability `perception`.
int sample_detection(int hidden, bool reached_searched, double coverage_delta, double perception,
                     Chance& chance);

/// Ground-truth convenience overload: hidden = truth count minus already detected.
int sample_detection(const SectorGroundTruth& truth, const MapBelief& belief, SectorId sector,
                     const CoverageUpdate& update, double perception, Chance& chance);

/// Sectors from which a report reaches the base: the known comm set closed under relay by
/// staying robots (a staying robot in a connected sector connects its neighbours).
SectorMask effective_comm_set(const MapBelief& belief, std::span<const SectorId> relay_positions,
                              bool relay_enabled = true);

}  // namespace mrx
