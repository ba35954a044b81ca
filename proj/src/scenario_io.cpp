#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mrx/scenario.hpp"

namespace mrx {

ScenarioError::ScenarioError(int line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

MissionModel Scenario::model() const {
    MissionModel m;
    m.matrix = matrix;
    for (const auto& t : team) m.team.push_back(t.capability);
    m.traversal = traversal;
    m.coverage_values = coverage_values;
    m.beta = beta;
    m.artifact_prior = artifact_prior;
    m.perception_failure = perception_failure;
    m.relay = relay;
    m.time_limit = time_limit;
    return m;
}

MctsParams Scenario::mcts_params() const {
    MctsParams p;
    p.horizon = horizon;
    if (iterations) p.iterations = *iterations;
    return p;
}

// ---- validation -------------------------------------------------------------------

namespace {

bool unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

void validate(const Scenario& s) {
    const auto& map = s.map;
    if (map.sector_count() == 0) throw ScenarioError(0, "scenario has no sectors");
    std::set<std::string> ids;
    int staging = 0;
    for (const auto& sec : map.sectors()) {
        if (!ids.insert(sec.id).second) throw ScenarioError(0, "duplicate sector id '" + sec.id + "'");
        if (sec.artifact_count < 0) throw ScenarioError(0, "negative artifact count in sector '" + sec.id + "'");
        if (sec.is_staging) ++staging;
    }
    if (staging != 1) throw ScenarioError(0, "exactly one staging sector required, found " + std::to_string(staging));
    std::set<std::string> hazard_ids;
    for (const auto& h : map.hazards()) {
        if (!hazard_ids.insert(h.id).second) throw ScenarioError(0, "duplicate hazard id '" + h.id + "'");
        if (!unit(h.difficulty)) throw ScenarioError(0, "hazard '" + h.id + "' difficulty outside [0,1]");
        if (static_cast<std::size_t>(h.terrain) >= s.terrains.size())
            throw ScenarioError(0, "hazard '" + h.id + "' has an unknown terrain class");
    }
    if (!map.connected_from_staging()) throw ScenarioError(0, "map is not connected from the staging sector");
    if (s.team.empty()) throw ScenarioError(0, "team is empty");
    if (s.time_limit < 1) throw ScenarioError(0, "time_limit must be at least 1");
    if (s.horizon < 1) throw ScenarioError(0, "horizon must be at least 1");
    if (s.iterations && *s.iterations < 0) throw ScenarioError(0, "iterations must be non-negative");
    if (map.artifact_total() != s.declared_artifacts)
        throw ScenarioError(0, "artifact_total " + std::to_string(s.declared_artifacts) +
                                   " does not match the sector sum " + std::to_string(map.artifact_total()));
    const auto& cv = s.coverage_values;
    if (!(unit(cv[0]) && unit(cv[1]) && unit(cv[2]) && cv[0] < cv[1] && cv[1] < cv[2]))
        throw ScenarioError(0, "coverage_levels must be increasing values in [0,1]");
    if (s.artifact_prior < 0.0) throw ScenarioError(0, "artifact_prior must be non-negative");
    if (s.beta < 0.0) throw ScenarioError(0, "beta must be non-negative");
    if (!unit(s.perception_failure)) throw ScenarioError(0, "perception_failure outside [0,1]");
    if (!unit(s.traversal.supervision_factor)) throw ScenarioError(0, "supervision outside [0,1]");
    if (s.traversal.autonomy_scale < 0.0) throw ScenarioError(0, "autonomy_scale must be non-negative");
    std::set<std::string> labels;
    for (const auto& t : s.team) {
        if (!labels.insert(t.label).second) throw ScenarioError(0, "duplicate team label '" + t.label + "'");
        if (!unit(t.capability.perception)) throw ScenarioError(0, "robot '" + t.label + "' perception outside [0,1]");
        if (!unit(t.capability.autonomy_level))
            throw ScenarioError(0, "robot '" + t.label + "' autonomy outside [0,1]");
    }
    for (std::size_t m = 0; m < kMobilityClassCount; ++m) {
        auto mob = static_cast<MobilityClass>(m);
        for (std::size_t t = 0; t < s.terrains.size(); ++t) {
            auto terrain = static_cast<TerrainClass>(t);
            if (!s.matrix.defined(mob, terrain))
                throw ScenarioError(0, "capability for " + std::string(to_string(mob)) + " on " +
                                           s.terrains.name(terrain) + " is undefined");
            double v = s.matrix.base_success(mob, terrain);
            if (!unit(v)) throw ScenarioError(0, "capability entry outside [0,1]");
            if (terrain == TerrainClass::Flat && v != 1.0)
                throw ScenarioError(0, "Flat terrain must have base success 1.0");
        }
    }
}

// ---- parsing ----------------------------------------------------------------------

namespace {

struct Record {
    int line;
    std::map<std::string, std::string> fields;
};

std::string_view trim(std::string_view v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    return v;
}

double to_double(const Record& r, const std::string& key, const std::string& value) {
    double out = 0.0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || p != value.data() + value.size() || !std::isfinite(out))
        throw ScenarioError(r.line, "field '" + key + "': expected a number, got '" + value + "'");
    return out;
}

int to_int(const Record& r, const std::string& key, const std::string& value) {
    int out = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || p != value.data() + value.size())
        throw ScenarioError(r.line, "field '" + key + "': expected an integer, got '" + value + "'");
    return out;
}

bool to_bool(const Record& r, const std::string& key, const std::string& value) {
    if (value == "1" || value == "on" || value == "true") return true;
    if (value == "0" || value == "off" || value == "false") return false;
    throw ScenarioError(r.line, "field '" + key + "': expected on/off, got '" + value + "'");
}

class Fields {
public:
    explicit Fields(const Record& r) : r_(r) {}
    const std::string* get(const std::string& key) {
        used_.insert(key);
        auto it = r_.fields.find(key);
        return it == r_.fields.end() ? nullptr : &it->second;
    }
    const std::string& require(const std::string& key) {
        if (const auto* v = get(key)) return *v;
        throw ScenarioError(r_.line, "missing field '" + key + "'");
    }
    void finish() const {
        for (const auto& [k, v] : r_.fields)
            if (!used_.count(k)) throw ScenarioError(r_.line, "unknown field '" + k + "'");
    }
    const Record& record() const { return r_; }

private:
    const Record& r_;
    std::set<std::string> used_;
};

CoverageLevel level_from_value(const Record& r, const CoverageValues& cv, double v) {
    for (std::size_t i = 0; i < cv.size(); ++i)
        if (cv[i] == v) return static_cast<CoverageLevel>(i);
    throw ScenarioError(r.line, "coverage value does not match a configured level");
}

std::vector<std::string> split(std::string_view v, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= v.size(); ++i) {
        if (i == v.size() || v[i] == sep) {
            out.emplace_back(trim(v.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

}  // namespace

Scenario load_scenario(std::string_view text) {
    static const std::set<std::string> kSections{"config", "hazards", "sectors", "edges", "team"};
    std::map<std::string, std::vector<Record>> sections;
    std::string current;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') throw ScenarioError(line_no, "malformed section header");
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (!kSections.count(current)) throw ScenarioError(line_no, "unknown section [" + current + "]");
            sections[current];
            continue;
        }
        if (current.empty()) throw ScenarioError(line_no, "record outside of a section");
        Record rec{line_no, {}};
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            std::size_t j = i;
            while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
            if (j == i) break;
            std::string_view tok = line.substr(i, j - i);
            auto eq = tok.find('=');
            if (eq == std::string_view::npos || eq == 0)
                throw ScenarioError(line_no, "expected key=value, got '" + std::string(tok) + "'");
            std::string key(tok.substr(0, eq));
            if (!rec.fields.emplace(key, std::string(tok.substr(eq + 1))).second)
                throw ScenarioError(line_no, "duplicate field '" + key + "'");
            i = j;
        }
        if (current == "config") {
            // Config lines are independent settings; keep one record per key.
            for (auto& [k, v] : rec.fields) sections[current].push_back(Record{line_no, {{k, v}}});
        } else {
            sections[current].push_back(std::move(rec));
        }
        if (end == text.size()) break;
    }

    Scenario s;
    bool artifact_total_given = false;
    std::set<std::string> config_seen;
    std::vector<std::pair<Record, std::string>> capability_overrides;
    for (const auto& rec : sections["config"]) {
        const auto& [key, value] = *rec.fields.begin();
        if (!config_seen.insert(key).second) throw ScenarioError(rec.line, "duplicate config key '" + key + "'");
        if (key == "name") s.name = value;
        else if (key == "time_limit") s.time_limit = to_int(rec, key, value);
        else if (key == "horizon") s.horizon = to_int(rec, key, value);
        else if (key == "iterations") s.iterations = to_int(rec, key, value);
        else if (key == "artifact_total") { s.declared_artifacts = to_int(rec, key, value); artifact_total_given = true; }
        else if (key == "artifact_prior") s.artifact_prior = to_double(rec, key, value);
        else if (key == "relay") s.relay = to_bool(rec, key, value);
        else if (key == "beta") s.beta = to_double(rec, key, value);
        else if (key == "perception_failure") s.perception_failure = to_double(rec, key, value);
        else if (key == "supervision") s.traversal.supervision_factor = to_double(rec, key, value);
        else if (key == "autonomy_scale") s.traversal.autonomy_scale = to_double(rec, key, value);
        else if (key == "coverage_levels") {
            auto parts = split(value, ',');
            if (parts.size() != 3) throw ScenarioError(rec.line, "coverage_levels needs exactly 3 values");
            for (std::size_t i = 0; i < 3; ++i) s.coverage_values[i] = to_double(rec, key, parts[i]);
        } else if (key == "terrains") {
            for (const auto& t : split(value, ','))
                if (!t.empty()) s.terrains.add(t);
        } else if (key.rfind("capability.", 0) == 0) {
            capability_overrides.emplace_back(rec, value);
        } else {
            throw ScenarioError(rec.line, "unknown config key '" + key + "'");
        }
    }
    for (const auto& [rec, value] : capability_overrides) {
        const auto& key = rec.fields.begin()->first;
        auto parts = split(key, '.');
        if (parts.size() != 3) throw ScenarioError(rec.line, "capability key must be capability.<Mobility>.<Terrain>");
        MobilityClass mob;
        try {
            mob = parse_mobility(parts[1]);
        } catch (const std::invalid_argument& e) {
            throw ScenarioError(rec.line, e.what());
        }
        auto terrain = s.terrains.find(parts[2]);
        if (!terrain) throw ScenarioError(rec.line, "unknown terrain class '" + parts[2] + "'");
        s.matrix.set(mob, *terrain, to_double(rec, key, value));
    }

    std::vector<HazardSpec> hazards;
    for (const auto& rec : sections["hazards"]) {
        Fields f(rec);
        HazardSpec h;
        h.id = f.require("id");
        const auto& terrain = f.require("terrain");
        auto t = s.terrains.find(terrain);
        if (!t) throw ScenarioError(rec.line, "unknown terrain class '" + terrain + "'");
        h.terrain = *t;
        h.difficulty = to_double(rec, "difficulty", f.require("difficulty"));
        f.finish();
        hazards.push_back(std::move(h));
    }

    std::vector<SectorGroundTruth> sectors;
    std::vector<int> sector_lines;
    for (const auto& rec : sections["sectors"]) {
        Fields f(rec);
        SectorGroundTruth sec;
        sec.id = f.require("id");
        if (const auto* v = f.get("artifacts")) sec.artifact_count = to_int(rec, "artifacts", *v);
        if (const auto* v = f.get("comm")) sec.in_comm_range = to_bool(rec, "comm", *v);
        if (const auto* v = f.get("staging")) sec.is_staging = to_bool(rec, "staging", *v);
        if (const auto* v = f.get("region")) sec.region = *v;
        if (const auto* v = f.get("coverage"))
            sec.initial_coverage = level_from_value(rec, s.coverage_values, to_double(rec, "coverage", *v));
        f.finish();
        sectors.push_back(std::move(sec));
        sector_lines.push_back(rec.line);
    }
    auto find_sector = [&](const Record& rec, const std::string& id) {
        for (std::size_t i = 0; i < sectors.size(); ++i)
            if (sectors[i].id == id) return sector(i);
        throw ScenarioError(rec.line, "unknown sector id '" + id + "'");
    };

    std::vector<MapEdge> edges;
    for (const auto& rec : sections["edges"]) {
        Fields f(rec);
        MapEdge e;
        e.a = find_sector(rec, f.require("a"));
        e.b = find_sector(rec, f.require("b"));
        if (e.a == e.b) throw ScenarioError(rec.line, "self-loop edge on sector '" + sectors[index(e.a)].id + "'");
        const auto* hz = f.get("hazard");
        if (hz && *hz != "none") {
            auto it = std::find_if(hazards.begin(), hazards.end(), [&](const HazardSpec& h) { return h.id == *hz; });
            if (it == hazards.end()) throw ScenarioError(rec.line, "unknown hazard id '" + *hz + "'");
            e.hazard = static_cast<int>(it - hazards.begin());
        }
        f.finish();
        edges.push_back(e);
    }

    for (const auto& rec : sections["team"]) {
        Fields f(rec);
        TeamMember m;
        m.label = f.require("label");
        try {
            m.capability.mobility = parse_mobility(f.require("mobility"));
        } catch (const std::invalid_argument& e) {
            throw ScenarioError(rec.line, e.what());
        }
        if (const auto* v = f.get("perception")) m.capability.perception = to_double(rec, "perception", *v);
        if (const auto* v = f.get("autonomy")) m.capability.autonomy_level = to_double(rec, "autonomy", *v);
        f.finish();
        s.team.push_back(std::move(m));
    }

    try {
        s.map = MapGraph(std::move(sectors), std::move(hazards), std::move(edges));
    } catch (const std::exception& e) {
        throw ScenarioError(0, e.what());
    }
    if (!artifact_total_given) s.declared_artifacts = s.map.artifact_total();
    validate(s);
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

// ---- serialization ------------------------------------------------------------------

namespace {

std::string num(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

}  // namespace

std::string serialize(const Scenario& s) {
    std::ostringstream out;
    const CapabilityMatrix defaults;
    out << "# mrx scenario\n[config]\n";
    out << "name=" << s.name << '\n';
    out << "time_limit=" << s.time_limit << '\n';
    out << "horizon=" << s.horizon << '\n';
    if (s.iterations) out << "iterations=" << *s.iterations << '\n';
    out << "artifact_total=" << s.declared_artifacts << '\n';
    out << "artifact_prior=" << num(s.artifact_prior) << '\n';
    out << "relay=" << (s.relay ? "on" : "off") << '\n';
    out << "beta=" << num(s.beta) << '\n';
    out << "perception_failure=" << num(s.perception_failure) << '\n';
    out << "supervision=" << num(s.traversal.supervision_factor) << '\n';
    out << "autonomy_scale=" << num(s.traversal.autonomy_scale) << '\n';
    out << "coverage_levels=" << num(s.coverage_values[0]) << ',' << num(s.coverage_values[1]) << ','
        << num(s.coverage_values[2]) << '\n';
    if (!s.terrains.extensions().empty()) {
        out << "terrains=";
        bool first = true;
        for (const auto& t : s.terrains.extensions()) {
            out << (first ? "" : ",") << t;
            first = false;
        }
        out << '\n';
    }
    for (std::size_t m = 0; m < kMobilityClassCount; ++m) {
        auto mob = static_cast<MobilityClass>(m);
        for (std::size_t t = 0; t < s.terrains.size(); ++t) {
            auto terrain = static_cast<TerrainClass>(t);
            if (!s.matrix.defined(mob, terrain)) continue;
            double v = s.matrix.base_success(mob, terrain);
            if (t < kBuiltinTerrainCount && v == defaults.base_success(mob, terrain)) continue;
            out << "capability." << to_string(mob) << '.' << s.terrains.name(terrain) << '=' << num(v) << '\n';
        }
    }

    out << "\n[hazards]\n";
    for (const auto& h : s.map.hazards())
        out << "id=" << h.id << " terrain=" << s.terrains.name(h.terrain) << " difficulty=" << num(h.difficulty)
            << '\n';

    out << "\n[sectors]\n";
    for (const auto& sec : s.map.sectors()) {
        out << "id=" << sec.id << " artifacts=" << sec.artifact_count << " comm=" << (sec.in_comm_range ? 1 : 0);
        if (sec.is_staging) out << " staging=1";
        if (!sec.region.empty()) out << " region=" << sec.region;
        if (sec.initial_coverage != CoverageLevel::Unvisited)
            out << " coverage=" << num(coverage_value(s.coverage_values, sec.initial_coverage));
        out << '\n';
    }

    out << "\n[edges]\n";
    for (const auto& e : s.map.edges()) {
        out << "a=" << s.map.at(e.a).id << " b=" << s.map.at(e.b).id << " hazard=";
        if (const auto* h = s.map.hazard_of(e)) out << h->id;
        else out << "none";
        out << '\n';
    }

    out << "\n[team]\n";
    for (const auto& t : s.team)
        out << "label=" << t.label << " mobility=" << to_string(t.capability.mobility)
            << " perception=" << num(t.capability.perception) << " autonomy=" << num(t.capability.autonomy_level)
            << '\n';
    return out.str();
}

}  // namespace mrx
