// mrx_cli: run episodes and experiment suites, emit CSV.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

#include <CLI11.hpp>

#include "mrx/experiments.hpp"
#include "mrx/scenario.hpp"
#include "mrx/trace_io.hpp"

using namespace mrx;

namespace {

struct Common {
    std::string scenario_path;
    std::string policy = "mcts";
    std::size_t episodes = 1000;
    std::uint64_t seed = 1;
    std::optional<int> horizon;
    std::optional<int> iterations;
    std::string out;
    bool trace = false;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
};

Scenario scenario_or(const Common& c, Scenario (*fallback)()) {
    return c.scenario_path.empty() ? fallback() : load_scenario_file(c.scenario_path);
}

MctsParams mcts_for(const Scenario& s, const Common& c) {
    MctsParams p = s.mcts_params();
    if (c.horizon) p.horizon = *c.horizon;
    if (c.iterations) p.iterations = *c.iterations;
    p.validate();
    return p;
}

// Writes to --out when given, stdout otherwise.
template <class F>
void with_output(const std::string& path, F&& f) {
    if (path.empty()) {
        f(std::cout);
        return;
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    f(os);
    if (!os) throw std::runtime_error("failed writing " + path);
}

void print_stats(std::ostream& os, const BatchStats& b) {
    auto line = [&](const char* name, const MetricStats& m) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "  %-15s %.4f +/- %.4f  [%.4f, %.4f]\n", name, m.mean, m.ci95, m.min, m.max);
        os << buf;
    };
    os << "episodes " << b.n << " base_seed " << b.base_seed << '\n';
    line("reward", b.reward);
    line("failures", b.failures);
    line("mission_time", b.mission_time);
    line("coverage", b.coverage);
    line("revealed", b.revealed);
}

int cmd_run(const Common& c) {
    if (c.scenario_path.empty()) throw CLI::RequiredError("--scenario");
    Scenario s = load_scenario_file(c.scenario_path);
    Policy policy{parse_policy(c.policy), mcts_for(s, c)};
    EpisodeResult r = run_episode(s, policy, c.seed, EpisodeOptions{c.trace});
    std::cout << "scenario " << s.name << " policy " << to_string(policy.kind) << " seed " << c.seed << '\n'
              << "reward " << r.reported_rewards << '\n'
              << "failures " << r.robot_failures << '\n'
              << "mission_time " << r.mission_time << '\n'
              << "termination " << to_string(r.termination) << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "coverage %.4f\nrevealed %.4f\n", r.coverage_fraction,
                  r.sectors_revealed_fraction);
    std::cout << buf;
    if (c.trace) {
        if (auto bad = validate_trace(s, r)) throw std::runtime_error("trace invariant violated: " + *bad);
        with_output(c.out.empty() ? std::string("trace.jsonl") : c.out,
                    [&](std::ostream& os) { write_trace(os, s, policy, c.seed, r); });
    }
    return 0;
}

int cmd_batch(const Common& c) {
    if (c.scenario_path.empty()) throw CLI::RequiredError("--scenario");
    Scenario s = load_scenario_file(c.scenario_path);
    Policy policy{parse_policy(c.policy), mcts_for(s, c)};
    BatchStats b = run_batch(s, policy, c.episodes, c.seed, BatchOptions{c.workers});
    std::cout << "scenario " << s.name << " policy " << to_string(policy.kind) << '\n';
    print_stats(std::cout, b);
    return 0;
}

int cmd_compare(const Common& c) {
    Scenario s = scenario_or(c, build_urban7);
    auto rows = compare_policies(s, c.episodes, c.seed, mcts_for(s, c), BatchOptions{c.workers});
    with_output(c.out, [&](std::ostream& os) { write_compare_csv(os, rows); });
    return 0;
}

int cmd_formation(const Common& c) {
    Scenario s = scenario_or(c, build_urban7);
    auto rows = formation_sweep(s, c.episodes, c.seed, mcts_for(s, c), BatchOptions{c.workers});
    with_output(c.out, [&](std::ostream& os) { write_formation_csv(os, rows); });
    return 0;
}

int cmd_comm_sweep(const Common& c, std::uint64_t layout_seed) {
    CommSweepOptions sweep;
    sweep.base.seed = layout_seed;
    Scenario probe = build_subt121(sweep.base);
    sweep.policy = Policy{parse_policy(c.policy), mcts_for(probe, c)};
    auto rows = comm_sweep(sweep, c.episodes, c.seed, BatchOptions{c.workers});
    with_output(c.out, [&](std::ostream& os) { write_comm_csv(os, rows); });
    return 0;
}

int cmd_export(const std::string& name, std::uint64_t layout_seed, double comm, const std::string& out) {
    Scenario s;
    if (name == "urban7") {
        s = build_urban7();
    } else if (name == "subt121") {
        s = build_subt121(Subt121Params{layout_seed, comm, std::nullopt});
    } else {
        throw CLI::ValidationError("builder", "unknown builder '" + name + "' (urban7|subt121)");
    }
    with_output(out, [&](std::ostream& os) { os << serialize(s); });
    return 0;
}

int cmd_check_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    ParsedTrace t = read_trace(in);
    if (auto bad = validate_trace_records(t)) {
        std::cout << "INVALID " << *bad << '\n';
        return 1;
    }
    std::cout << "OK " << t.steps.size() << " steps\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-robot supervised exploration: episodes and experiment suites"};
    app.require_subcommand(1);
    Common c;
    const std::vector<std::string> policies{"mcts", "supervised", "naive", "random"};

    auto add_common = [&](CLI::App* sub, bool scenario_required, bool policy) {
        auto* opt = sub->add_option("--scenario", c.scenario_path, "scenario file")->check(CLI::ExistingFile);
        if (scenario_required) opt->required();
        if (policy) sub->add_option("--policy", c.policy, "mcts|supervised|naive|random")->check(CLI::IsMember(policies));
        sub->add_option("--episodes", c.episodes, "episodes per batch")->check(CLI::PositiveNumber);
        sub->add_option("--seed", c.seed, "base seed");
        sub->add_option("--horizon", c.horizon, "planning horizon")->check(CLI::PositiveNumber);
        sub->add_option("--iterations", c.iterations, "MCTS iterations per decision")->check(CLI::PositiveNumber);
        sub->add_option("--out", c.out, "output path (default stdout)");
        sub->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    };

    auto* run = app.add_subcommand("run", "run one episode and print its metrics");
    add_common(run, true, true);
    run->add_flag("--trace", c.trace, "write a JSON Lines trace to --out (default trace.jsonl)");

    auto* batch = app.add_subcommand("batch", "run a batch with one policy and print statistics");
    add_common(batch, true, true);

    auto* compare = app.add_subcommand("compare", "compare all four policies (CSV)");
    add_common(compare, false, false);

    auto* formation = app.add_subcommand("formation", "team formation sweep under MCTS (CSV)");
    add_common(formation, false, false);

    std::uint64_t layout_seed = 2021;
    auto* comm = app.add_subcommand("comm-sweep", "comm coverage x autonomy grid on the SubT course (CSV)");
    add_common(comm, false, true);
    comm->add_option("--layout-seed", layout_seed, "SubT course generator seed");

    std::string builder;
    double export_comm = 0.3;
    auto* exp = app.add_subcommand("export", "write a built-in scenario in the file format");
    exp->add_option("builder", builder, "urban7|subt121")->required();
    exp->add_option("--layout-seed", layout_seed, "SubT course generator seed");
    exp->add_option("--comm-fraction", export_comm, "SubT comm coverage fraction")->check(CLI::Range(0.0, 1.0));
    exp->add_option("--out", c.out, "output path (default stdout)");

    std::string trace_path;
    auto* check = app.add_subcommand("check-trace", "replay a trace file through the invariant checks");
    check->add_option("trace", trace_path, "trace file")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(c);
        if (*batch) return cmd_batch(c);
        if (*compare) return cmd_compare(c);
        if (*formation) return cmd_formation(c);
        if (*comm) return cmd_comm_sweep(c, layout_seed);
        if (*exp) return cmd_export(builder, layout_seed, export_comm, c.out);
        if (*check) return cmd_check_trace(trace_path);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
