#include "mrx/trace_io.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace mrx {

using nlohmann::json;

namespace {

json robots_json(const Scenario& sc, const JointState& s) {
    json arr = json::array();
    for (const auto& r : s.robots) {
        arr.push_back({{"position", r.failed() ? json(nullptr) : json(sc.map.at(r.position).id)},
                       {"mobility_ok", r.mobility_ok},
                       {"perception_ok", r.perception_ok},
                       {"unreported", r.unreported.size()}});
    }
    return arr;
}

json coverage_json(const Scenario& sc, const JointState& s) {
    json arr = json::array();
    for (const auto& sb : s.map.sectors) arr.push_back(coverage_value(sc.coverage_values, sb.coverage));
    return arr;
}

TraceRecord::Robot robot_from(const json& j) {
    TraceRecord::Robot r;
    r.position = j.at("position").is_null() ? "" : j.at("position").get<std::string>();
    r.mobility_ok = j.at("mobility_ok").get<bool>();
    r.perception_ok = j.at("perception_ok").get<bool>();
    r.unreported = j.at("unreported").get<int>();
    return r;
}

TraceRecord record_from(const json& j) {
    TraceRecord rec;
    rec.step = j.at("step").get<int>();
    if (j.contains("actions")) rec.actions = j.at("actions").get<std::vector<std::string>>();
    rec.reward = j.value("reward", 0.0);
    if (j.contains("events")) {
        for (const auto& e : j.at("events"))
            rec.events.push_back({e.at("kind").get<std::string>(), e.value("robot", -1), e.value("sector", ""),
                                  e.value("count", 0)});
    }
    for (const auto& r : j.at("robots")) rec.robots.push_back(robot_from(r));
    rec.coverage = j.at("coverage").get<std::vector<double>>();
    rec.reported_total = j.at("reported_total").get<int>();
    return rec;
}

}  // namespace

void write_trace(std::ostream& out, const Scenario& sc, const Policy& policy, std::uint64_t seed,
                 const EpisodeResult& episode) {
    expects(episode.initial.has_value(), "write_trace: episode was run without a trace");
    const auto& init = *episode.initial;
    json header{{"scenario", sc.name},
                {"policy", to_string(policy.kind)},
                {"seed", seed},
                {"artifact_total", sc.map.artifact_total()},
                {"team_size", sc.team.size()},
                {"initial",
                 {{"step", init.mission.step},
                  {"robots", robots_json(sc, init)},
                  {"coverage", coverage_json(sc, init)},
                  {"reported_total", init.mission.reported_total}}}};
    out << header.dump() << '\n';
    for (const auto& st : episode.trace) {
        json actions = json::array();
        for (const auto& a : st.action) actions.push_back(to_string(a, &sc.map));
        json events = json::array();
        for (const auto& e : st.outcome.events) {
            json ev{{"kind", to_string(e.kind)}, {"robot", e.robot}, {"count", e.count}};
            if (e.sector != kNoSector) ev["sector"] = sc.map.at(e.sector).id;
            events.push_back(std::move(ev));
        }
        const auto& next = st.outcome.next;
        json line{{"step", st.state.mission.step},
                  {"actions", actions},
                  {"reward", st.outcome.reward},
                  {"events", events},
                  {"robots", robots_json(sc, next)},
                  {"coverage", coverage_json(sc, next)},
                  {"reported_total", next.mission.reported_total}};
        out << line.dump() << '\n';
    }
}

ParsedTrace read_trace(std::istream& in) {
    ParsedTrace t;
    std::string line;
    bool have_header = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            if (!have_header) {
                t.header.scenario = j.at("scenario").get<std::string>();
                t.header.policy = j.at("policy").get<std::string>();
                t.header.seed = j.at("seed").get<std::uint64_t>();
                t.header.artifact_total = j.at("artifact_total").get<int>();
                t.header.team_size = j.at("team_size").get<int>();
                t.header.initial = record_from(j.at("initial"));
                have_header = true;
            } else {
                t.steps.push_back(record_from(j));
            }
        } catch (const json::exception& e) {
            throw std::runtime_error("trace line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header) throw std::runtime_error("trace is empty");
    return t;
}

std::optional<std::string> validate_trace_records(const ParsedTrace& trace) {
    const TraceRecord* prev = &trace.header.initial;
    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
        const auto& rec = trace.steps[k];
        auto at = [&](const std::string& what) { return "trace step " + std::to_string(k) + ": " + what; };
        if (rec.step != prev->step + (k == 0 ? 0 : 1)) return at("non-consecutive step");
        int guided = 0;
        for (const auto& a : rec.actions)
            if (a.rfind("GuidedExploration", 0) == 0) ++guided;
        if (guided > 1) return at("supervisor capacity exceeded");
        if (static_cast<int>(rec.actions.size()) != trace.header.team_size) return at("wrong number of actions");
        if (rec.robots.size() != prev->robots.size()) return at("team size changed");
        for (std::size_t i = 0; i < rec.robots.size(); ++i) {
            const auto& a = prev->robots[i];
            const auto& b = rec.robots[i];
            if (!a.mobility_ok && b.mobility_ok) return at("mobility health recovered");
            if (!a.perception_ok && b.perception_ok) return at("perception health recovered");
            if (!b.mobility_ok && (b.unreported != 0 || !b.position.empty()))
                return at("failed robot kept position or findings");
        }
        if (rec.coverage.size() != prev->coverage.size()) return at("sector count changed");
        for (std::size_t i = 0; i < rec.coverage.size(); ++i)
            if (rec.coverage[i] < prev->coverage[i]) return at("coverage decreased");
        if (rec.reported_total < prev->reported_total) return at("reported_total decreased");
        if (rec.reported_total > trace.header.artifact_total) return at("reported_total exceeds artifact total");
        prev = &rec;
    }
    return std::nullopt;
}

}  // namespace mrx
