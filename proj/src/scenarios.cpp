#include <algorithm>
#include <cmath>
#include <deque>

#include "mrx/scenario.hpp"

namespace mrx {

namespace {

std::vector<int> hop_distances(const MapGraph& map, SectorId from) {
    std::vector<int> dist(map.sector_count(), -1);
    std::deque<SectorId> queue{from};
    dist[index(from)] = 0;
    while (!queue.empty()) {
        SectorId s = queue.front();
        queue.pop_front();
        for (auto e : map.incident(s)) {
            const auto& ed = map.edges()[e];
            SectorId n = ed.a == s ? ed.b : ed.a;
            if (dist[index(n)] >= 0) continue;
            dist[index(n)] = dist[index(s)] + 1;
            queue.push_back(n);
        }
    }
    return dist;
}

TeamMember member(std::string label, MobilityClass m, double perception, double autonomy = 0.0) {
    return {std::move(label), {m, perception, autonomy}};
}

constexpr double kWheeledPerception = 0.9;
constexpr double kLeggedPerception = 0.9;
// Field-course sensing is harder (dust, darkness, occlusion) than in the building.
constexpr double kSubtGroundPerception = 0.75;
constexpr double kSubtAerialPerception = 0.6;

}  // namespace

std::vector<bool> comm_region(const MapGraph& map, double fraction) {
    const std::size_t n = map.sector_count();
    auto target = static_cast<std::size_t>(std::lround(std::clamp(fraction, 0.0, 1.0) * static_cast<double>(n)));
    target = std::max<std::size_t>(target, 1);
    std::vector<bool> in(n, false);
    // Breadth-first from staging; neighbours visited in ascending id order.
    std::deque<SectorId> queue{map.staging()};
    std::vector<bool> seen(n, false);
    seen[index(map.staging())] = true;
    std::size_t count = 0;
    while (!queue.empty() && count < target) {
        SectorId s = queue.front();
        queue.pop_front();
        in[index(s)] = true;
        ++count;
        for (auto e : map.incident(s)) {
            const auto& ed = map.edges()[e];
            SectorId nb = ed.a == s ? ed.b : ed.a;
            if (seen[index(nb)]) continue;
            seen[index(nb)] = true;
            queue.push_back(nb);
        }
    }
    return in;
}

// ---- urban building --------------------------------------------------------------------

Scenario build_urban7() {
    Scenario s;
    s.name = "urban7";
    s.time_limit = 40;
    s.horizon = 5;

    std::vector<HazardSpec> hazards{
        {"stairs", TerrainClass::Stairs, 1.0},
        {"rubble_hall", TerrainClass::Rubble, 0.6},
        {"office_door", TerrainClass::Doorway, 0.8},
        {"basement_crawl", TerrainClass::NarrowPassage, 0.7},
    };
    // Upper floor (staging level): m0..m3. Lower floor: m4..m6.
    std::vector<SectorGroundTruth> sectors;
    for (int i = 0; i < 7; ++i) {
        SectorGroundTruth sec;
        sec.id = "m" + std::to_string(i);
        sec.in_comm_range = i <= 5;
        sec.is_staging = i == 0;
        sec.region = i <= 3 ? "upper" : "lower";
        sectors.push_back(sec);
    }
    std::vector<MapEdge> edges{
        {sector(0), sector(1), -1},
        {sector(1), sector(2), 1},
        {sector(1), sector(3), 2},
        {sector(0), sector(4), 0},
        {sector(4), sector(5), -1},
        {sector(5), sector(6), 3},
    };
    MapGraph layout(sectors, hazards, edges);

    // Two artifacts per floor, in the sectors farthest from staging (ties: lowest id).
    auto dist = hop_distances(layout, layout.staging());
    for (const std::string floor : {"upper", "lower"}) {
        std::vector<std::size_t> ids;
        for (std::size_t i = 0; i < sectors.size(); ++i)
            if (sectors[i].region == floor && !sectors[i].is_staging) ids.push_back(i);
        std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
        for (std::size_t k = 0; k < 2 && k < ids.size(); ++k) sectors[ids[k]].artifact_count = 1;
    }
    s.map = MapGraph(std::move(sectors), std::move(hazards), std::move(edges));
    s.declared_artifacts = s.map.artifact_total();
    s.team = {member("wheeled", MobilityClass::Wheeled, kWheeledPerception),
              member("legged", MobilityClass::Legged, kLeggedPerception)};
    validate(s);
    return s;
}

// ---- synthetic SubT course ----------------------------------------------------------

namespace {

struct TerrainDraw {
    TerrainClass terrain;
    double weight;
};

struct RegionSpec {
    const char* name;
    int sectors;
    double hazard_free;             // probability an edge carries no hazard
    std::vector<TerrainDraw> terrains;
    double difficulty_lo, difficulty_hi;
};

}  // namespace

Scenario build_subt121(const Subt121Params& params) {
    Rng rng(splitmix64(params.seed));
    const std::vector<RegionSpec> regions{
        {"Tunnel", 41, 0.6, {{TerrainClass::Rails, 0.4}, {TerrainClass::Mud, 0.3}, {TerrainClass::Flat, 0.3}}, 0.1, 0.4},
        {"Urban", 40, 0.4,
         {{TerrainClass::Stairs, 0.3}, {TerrainClass::NarrowPassage, 0.25}, {TerrainClass::Doorway, 0.3},
          {TerrainClass::VerticalShaft, 0.15}},
         0.2, 0.6},
        {"Cave", 40, 0.3, {{TerrainClass::Rubble, 0.6}, {TerrainClass::NarrowPassage, 0.4}}, 0.3, 0.7},
    };

    std::vector<SectorGroundTruth> sectors;
    std::vector<HazardSpec> hazards;
    std::vector<MapEdge> edges;

    auto add_edge = [&](std::size_t a, std::size_t b, const RegionSpec& region, bool force_hazard) {
        MapEdge e{sector(a), sector(b), -1};
        if (force_hazard || uniform01(rng) >= region.hazard_free) {
            double total = 0.0;
            for (const auto& t : region.terrains) total += t.weight;
            double u = uniform01(rng) * total;
            TerrainClass terrain = region.terrains.back().terrain;
            for (const auto& t : region.terrains) {
                if (u < t.weight) {
                    terrain = t.terrain;
                    break;
                }
                u -= t.weight;
            }
            double d = region.difficulty_lo + (region.difficulty_hi - region.difficulty_lo) * uniform01(rng);
            d = std::round(d * 100.0) / 100.0;
            hazards.push_back({"h" + std::to_string(hazards.size()), terrain, d});
            e.hazard = static_cast<int>(hazards.size() - 1);
        }
        edges.push_back(e);
    };

    // Regions are grown as corridor-like random trees: each new sector attaches to one of
    // the last few sectors of its region, with occasional extra loop edges.
    std::vector<std::vector<std::size_t>> members(regions.size());
    for (std::size_t r = 0; r < regions.size(); ++r) {
        const auto& spec = regions[r];
        for (int k = 0; k < spec.sectors; ++k) {
            std::size_t id = sectors.size();
            SectorGroundTruth sec;
            char name[8];
            std::snprintf(name, sizeof name, "s%03zu", id);
            sec.id = name;
            sec.region = spec.name;
            sec.is_staging = id == 0;
            sectors.push_back(sec);
            auto& mine = members[r];
            if (!mine.empty()) {
                std::size_t window = std::min<std::size_t>(mine.size(), 4);
                std::size_t parent = mine[mine.size() - 1 - static_cast<std::size_t>(uniform01(rng) * window)];
                add_edge(parent, id, spec, false);
                if (mine.size() > 4 && uniform01(rng) < 0.1) {
                    std::size_t other = mine[static_cast<std::size_t>(uniform01(rng) * (mine.size() - 4))];
                    if (other != parent) add_edge(other, id, spec, false);
                }
            } else if (r > 0) {
                // Region entrance hangs off the tunnel system.
                const auto& tunnel = members[0];
                std::size_t span = r == 1 ? 15 : 25;
                std::size_t parent = tunnel[static_cast<std::size_t>(uniform01(rng) * std::min(span, tunnel.size()))];
                add_edge(parent, id, spec, true);
            }
            mine.push_back(id);
        }
    }

    // 40 artifacts in distinct non-staging sectors.
    std::vector<std::size_t> pool;
    for (std::size_t i = 1; i < sectors.size(); ++i) pool.push_back(i);
    for (int k = 0; k < 40; ++k) {
        auto j = static_cast<std::size_t>(k) +
                 static_cast<std::size_t>(uniform01(rng) * static_cast<double>(pool.size() - static_cast<std::size_t>(k)));
        std::swap(pool[static_cast<std::size_t>(k)], pool[j]);
        sectors[pool[static_cast<std::size_t>(k)]].artifact_count = 1;
    }

    MapGraph layout(sectors, hazards, edges);
    auto comm = comm_region(layout, params.comm_fraction);
    for (std::size_t i = 0; i < sectors.size(); ++i) sectors[i].in_comm_range = comm[i];

    Scenario s;
    s.name = "subt121";
    s.map = MapGraph(std::move(sectors), std::move(hazards), std::move(edges));
    s.declared_artifacts = s.map.artifact_total();
    s.time_limit = 120;
    s.horizon = 5;
    s.iterations = 1000;
    double lambda = params.autonomy_level.value_or(0.0);
    for (int i = 0; i < 4; ++i)
        s.team.push_back(member("legged" + std::to_string(i), MobilityClass::Legged, kSubtGroundPerception, lambda));
    for (int i = 0; i < 2; ++i)
        s.team.push_back(member("wheeled" + std::to_string(i), MobilityClass::Wheeled, kSubtGroundPerception, lambda));
    s.team.push_back(member("aerial0", MobilityClass::Aerial, kSubtAerialPerception, lambda));
    validate(s);
    return s;
}

// ---- sweeps -----------------------------------------------------------------------------

std::vector<Scenario> formation_variants(const Scenario& base) {
    RobotCapability wheeled{MobilityClass::Wheeled, kWheeledPerception, 0.0};
    RobotCapability legged{MobilityClass::Legged, kLeggedPerception, 0.0};
    for (auto it = base.team.rbegin(); it != base.team.rend(); ++it) {
        if (it->capability.mobility == MobilityClass::Wheeled) wheeled = it->capability;
        if (it->capability.mobility == MobilityClass::Legged) legged = it->capability;
    }
    struct Row {
        const char* name;
        int wheeled, legged;
    };
    const Row rows[] = {{"multi_hybrid", 1, 1},
                        {"multi_wheeled", 2, 0},
                        {"multi_legged", 0, 2},
                        {"single_wheeled", 1, 0},
                        {"single_legged", 0, 1}};
    std::vector<Scenario> out;
    for (const auto& row : rows) {
        Scenario s = base;
        s.name = base.name + "/" + row.name;
        s.team.clear();
        for (int i = 0; i < row.wheeled; ++i) s.team.push_back({"wheeled" + std::to_string(i), wheeled});
        for (int i = 0; i < row.legged; ++i) s.team.push_back({"legged" + std::to_string(i), legged});
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<GridCell> comm_autonomy_grid(const Subt121Params& base, const std::vector<double>& comm_fractions,
                                         const std::vector<double>& autonomy_levels) {
    std::vector<GridCell> out;
    for (double c : comm_fractions) {
        for (double l : autonomy_levels) {
            Subt121Params p = base;
            p.comm_fraction = c;
            p.autonomy_level = l;
            out.push_back({c, l, build_subt121(p)});
        }
    }
    return out;
}

}  // namespace mrx
