#include "mrx/world_model.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include "mrx/robot_model.hpp"

namespace mrx {

std::string_view to_string(MobilityClass m) {
    switch (m) {
        case MobilityClass::Wheeled: return "Wheeled";
        case MobilityClass::Legged: return "Legged";
        case MobilityClass::Aerial: return "Aerial";
    }
    return "?";
}

MobilityClass parse_mobility(std::string_view name) {
    for (auto m : {MobilityClass::Wheeled, MobilityClass::Legged, MobilityClass::Aerial})
        if (to_string(m) == name) return m;
    throw std::invalid_argument("unknown mobility class '" + std::string(name) + "'");
}

// ---- TerrainTable -------------------------------------------------------------

TerrainTable::TerrainTable()
    : names_{"Flat", "Stairs", "Rubble", "NarrowPassage", "VerticalShaft", "Mud", "Rails", "Doorway"} {}

std::optional<TerrainClass> TerrainTable::find(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<TerrainClass>(i);
    return std::nullopt;
}

TerrainClass TerrainTable::add(std::string name) {
    if (auto t = find(name)) return *t;
    if (names_.size() >= 255) throw std::length_error("too many terrain classes");
    names_.push_back(std::move(name));
    return static_cast<TerrainClass>(names_.size() - 1);
}

// ---- MapGraph -----------------------------------------------------------------

MapGraph::MapGraph(std::vector<SectorGroundTruth> sectors, std::vector<HazardSpec> hazards,
                   std::vector<MapEdge> edges)
    : sectors_(std::move(sectors)), hazards_(std::move(hazards)), edges_(std::move(edges)) {
    if (sectors_.size() >= index(kNoSector)) throw std::length_error("too many sectors");
    incident_.resize(sectors_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto& edge = edges_[e];
        if (index(edge.a) >= sectors_.size() || index(edge.b) >= sectors_.size())
            throw std::out_of_range("edge references unknown sector");
        if (edge.a == edge.b) throw std::invalid_argument("self-loop edge on sector " + sectors_[index(edge.a)].id);
        if (edge.hazard >= static_cast<int>(hazards_.size())) throw std::out_of_range("edge references unknown hazard");
        incident_[index(edge.a)].push_back(static_cast<std::uint16_t>(e));
        incident_[index(edge.b)].push_back(static_cast<std::uint16_t>(e));
    }
    for (std::size_t s = 0; s < incident_.size(); ++s) {
        auto other = [&](std::uint16_t e) {
            const auto& ed = edges_[e];
            return index(ed.a) == s ? ed.b : ed.a;
        };
        std::stable_sort(incident_[s].begin(), incident_[s].end(),
                         [&](std::uint16_t x, std::uint16_t y) { return other(x) < other(y); });
    }
}

std::optional<SectorId> MapGraph::find_sector(std::string_view id) const {
    for (std::size_t i = 0; i < sectors_.size(); ++i)
        if (sectors_[i].id == id) return sector(i);
    return std::nullopt;
}

std::optional<int> MapGraph::find_hazard(std::string_view id) const {
    for (std::size_t i = 0; i < hazards_.size(); ++i)
        if (hazards_[i].id == id) return static_cast<int>(i);
    return std::nullopt;
}

SectorId MapGraph::staging() const {
    for (std::size_t i = 0; i < sectors_.size(); ++i)
        if (sectors_[i].is_staging) return sector(i);
    throw ContractViolation("map has no staging sector");
}

int MapGraph::artifact_total() const {
    int n = 0;
    for (const auto& s : sectors_) n += s.artifact_count;
    return n;
}

bool MapGraph::connected_from_staging() const {
    if (sectors_.empty()) return false;
    std::vector<bool> seen(sectors_.size(), false);
    std::deque<SectorId> queue{staging()};
    seen[index(queue.front())] = true;
    std::size_t count = 1;
    while (!queue.empty()) {
        SectorId s = queue.front();
        queue.pop_front();
        for (auto e : incident_[index(s)]) {
            const auto& ed = edges_[e];
            SectorId n = ed.a == s ? ed.b : ed.a;
            if (!seen[index(n)]) {
                seen[index(n)] = true;
                ++count;
                queue.push_back(n);
            }
        }
    }
    return count == sectors_.size();
}

// ---- belief -------------------------------------------------------------------

void Topology::add(const KnownEdge& e) {
    auto id = static_cast<std::uint16_t>(edges.size());
    edges.push_back(e);
    auto insert = [&](SectorId from, SectorId to) {
        auto& list = adjacency[index(from)];
        auto pos = std::lower_bound(list.begin(), list.end(), to,
                                    [](const auto& p, SectorId t) { return p.first < t; });
        list.insert(pos, {to, id});
    };
    insert(e.a, e.b);
    insert(e.b, e.a);
}

MapBelief::MapBelief(std::size_t sector_count)
    : sectors(sector_count), topology(std::make_shared<const Topology>(sector_count)) {}

bool MapBelief::operator==(const MapBelief& o) const {
    if (sectors != o.sectors) return false;
    if (topology == o.topology) return true;
    if (!topology || !o.topology) return false;
    return topology->edges == o.topology->edges;
}

bool reveal_on_visit(MapBelief& belief, const MapGraph& truth, SectorId s) {
    expects(index(s) < truth.sector_count() && belief.size() == truth.sector_count(),
            "reveal_on_visit: unknown sector");
    auto& sb = belief[s];
    bool changed = false;
    if (!sb.revealed) sb.revealed = changed = true;
    if (sb.coverage < CoverageLevel::Visited) {
        sb.coverage = CoverageLevel::Visited;
        changed = true;
    }
    auto comm = truth.at(s).in_comm_range ? CommKnowledge::InRange : CommKnowledge::OutOfRange;
    if (sb.comm != comm) {
        sb.comm = comm;
        changed = true;
    }
    if (sb.expanded) return changed;
    sb.expanded = true;

    auto topo = std::make_shared<Topology>(*belief.topology);
    for (auto e : truth.incident(s)) {
        const auto& ed = truth.edges()[e];
        SectorId n = ed.a == s ? ed.b : ed.a;
        auto& nb = belief[n];
        nb.revealed = true;
        // An edge is known once either endpoint has been expanded.
        if (nb.expanded) continue;
        KnownEdge known{ed.a, ed.b, ed.hazard, TerrainClass::Flat, 0.0};
        if (const auto* h = truth.hazard_of(ed)) {
            known.terrain = h->terrain;
            known.difficulty = h->difficulty;
        }
        topo->add(known);
    }
    belief.topology = std::move(topo);
    return true;
}

MapBelief initial_belief(const MapGraph& truth) {
    MapBelief belief(truth.sector_count());
    for (std::size_t i = 0; i < truth.sector_count(); ++i) {
        const auto& s = truth.sectors()[i];
        if (s.initial_coverage > CoverageLevel::Unvisited) {
            reveal_on_visit(belief, truth, sector(i));
            belief.sectors[i].coverage = s.initial_coverage;
        }
    }
    reveal_on_visit(belief, truth, truth.staging());
    return belief;
}

CoverageUpdate update_coverage(MapBelief& belief, SectorId s, std::span<const Searcher> searchers,
                               Chance& chance, const CoverageValues& values) {
    expects(index(s) < belief.size() && belief[s].revealed, "update_coverage: sector not revealed");
    CoverageUpdate out;
    auto& cov = belief[s].coverage;
    for (std::size_t i = 0; i < searchers.size(); ++i) {
        const auto& st = *searchers[i].state;
        expects(st.mobility_ok && st.position == s, "update_coverage: robot not operational in sector");
        if (cov == CoverageLevel::Searched) continue;
        if (!chance.bernoulli(effective_perception(st, *searchers[i].capability))) continue;
        auto before = cov;
        cov = raised(cov);
        out.delta += coverage_value(values, cov) - coverage_value(values, before);
        if (cov == CoverageLevel::Searched) {
            out.reached_searched = true;
            out.completed_by = static_cast<int>(i);
        }
    }
    return out;
}

int sample_detection(int hidden, bool reached_searched, double coverage_delta, double perception,
                     Chance& chance) {
    expects(coverage_delta >= 0.0, "sample_detection: negative coverage delta");
    if (!reached_searched || coverage_delta <= 0.0) return 0;
    int found = 0;
    for (int k = 0; k < hidden; ++k)
        if (chance.bernoulli(perception)) ++found;
    return found;
}

int sample_detection(const SectorGroundTruth& truth, const MapBelief& belief, SectorId s,
                     const CoverageUpdate& update, double perception, Chance& chance) {
    int hidden = std::max(0, truth.artifact_count - static_cast<int>(belief[s].detected));
    return sample_detection(hidden, update.reached_searched, update.delta, perception, chance);
}

SectorMask effective_comm_set(const MapBelief& belief, std::span<const SectorId> relay_positions,
                              bool relay_enabled) {
    SectorMask connected(belief.size(), 0);
    for (std::size_t i = 0; i < belief.size(); ++i)
        connected[i] = belief.sectors[i].comm == CommKnowledge::InRange;
    if (!relay_enabled || relay_positions.empty()) return connected;

    // Fixed point: each pass lets connected relays extend by one edge.
    bool grew = true;
    while (grew) {
        grew = false;
        for (SectorId r : relay_positions) {
            if (r == kNoSector || !connected[index(r)]) continue;
            for (const auto& [n, e] : belief.neighbours(r)) {
                if (!connected[index(n)]) {
                    connected[index(n)] = 1;
                    grew = true;
                }
            }
        }
    }
    return connected;
}

}  // namespace mrx
