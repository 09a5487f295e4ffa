// Command-line front end: single episodes, planner comparisons, the MI benchmark and
// config validation. Exit codes: 0 success, 1 config error, 2 runtime failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aspire/harness/bench.hpp"
#include "aspire/harness/compare.hpp"
#include "aspire/harness/config.hpp"
#include "aspire/harness/episode.hpp"
#include "aspire/harness/io.hpp"

namespace {

using namespace aspire;
using namespace aspire::harness;

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

/// Output file, or stdout for "" / "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_) throw Error("cannot open output file: " + path);
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

struct RunOptions {
    std::string config;
    std::string planner{"aspire"};
    std::uint64_t seed{0};
    bool seed_given{false};
    std::string out;
    std::string metrics_out;
    std::string tree_out;
    bool timing{false};
};

int cmd_run(const RunOptions& o) {
    const ScenarioConfig cfg = load_config(o.config);
    const PlannerKind planner = parse_planner(o.planner);
    const std::uint64_t seed = o.seed_given ? o.seed : cfg.seed;
    EpisodeOptions eo;
    eo.keep_first_tree = !o.tree_out.empty();
    const EpisodeResult r = run_episode(cfg, planner, seed, eo);

    Output trace(o.out);
    write_trace(trace.stream(), r.record, o.timing);
    if (!o.metrics_out.empty()) {
        Output m(o.metrics_out);
        CsvWriter w(m.stream());
        w.row(episode_header(o.timing));
        w.row(episode_fields({seed, planner, cfg.t_max, metrics(r.record)}, cfg.robot.dt, o.timing));
    }
    if (!o.tree_out.empty() && r.first_tree) {
        Output t(o.tree_out);
        t.stream() << tree_to_json(*r.first_tree).dump() << '\n';
    }
    return 0;
}

struct CompareOptions {
    std::string config;
    std::vector<std::string> planners{"aspire", "nbv", "rollout30"};
    int seeds{10};
    std::uint64_t seed_start{1};
    std::string out;
    std::string per_episode;
    bool timing{false};
    bool stop_when_detected{false};
    bool quiet{false};
};

int cmd_compare(const CompareOptions& o) {
    const ScenarioConfig cfg = load_config(o.config);
    std::vector<PlannerKind> planners;
    for (const auto& p : o.planners) planners.push_back(parse_planner(p));
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < o.seeds; ++i) seeds.push_back(o.seed_start + static_cast<std::uint64_t>(i));

    EpisodeOptions eo;
    eo.stop_when_detected = o.stop_when_detected;
    const auto progress = [&](const EpisodeSummary& e) {
        if (o.quiet) return;
        std::cerr << "seed " << e.seed << ' ' << to_string(e.planner) << ": t_s="
                  << (e.metrics.search_steps ? std::to_string(*e.metrics.search_steps) : std::string("-")) << '\n';
    };
    const auto episodes = run_comparison(cfg, planners, seeds, eo, progress);

    if (!o.per_episode.empty()) {
        Output pe(o.per_episode);
        CsvWriter w(pe.stream());
        w.row(episode_header(o.timing));
        for (const auto& e : episodes) w.row(episode_fields(e, cfg.robot.dt, o.timing));
    }
    Output out(o.out);
    CsvWriter w(out.stream());
    w.row(aggregate_header(o.timing));
    for (PlannerKind p : planners) w.row(aggregate_fields(aggregate(p, episodes), o.timing));
    return 0;
}

struct BenchOptions {
    std::string config;
    int scenarios{20};
    std::size_t samples{100000};
    std::uint64_t seed_start{1};
    std::string out;
    std::string samples_out;
};

int cmd_bench(const BenchOptions& o) {
    const ScenarioConfig cfg = load_config(o.config);
    const BenchResult r = mi_benchmark(cfg, o.scenarios, o.samples, o.seed_start);
    Output out(o.out);
    write_bench_csv(out.stream(), r);
    if (!o.samples_out.empty()) {
        Output s(o.samples_out);
        CsvWriter w(s.stream());
        std::vector<std::string> head{"scenario", "step", "oracle", "oracle_se"};
        for (auto m : kBenchMethods) head.emplace_back(to_string(m));
        w.row(head);
        for (const auto& x : r.samples) {
            std::vector<std::string> f{std::to_string(x.scenario), std::to_string(x.step), format_number(x.oracle),
                                       format_number(x.oracle_se)};
            for (double v : x.estimates) f.push_back(format_number(v));
            w.row(f);
        }
    }
    return 0;
}

int cmd_validate(const std::string& path) {
    (void)load_config(path);
    std::cout << path << ": ok\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Target search and tracking planner experiments"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Run one closed-loop episode and write a JSON-lines trace");
    run_cmd->add_option("--config", run.config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--planner", run.planner, "aspire | nbv | rollout10 | rollout20 | rollout30");
    run_cmd->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { run.seed = s, run.seed_given = true; }, "Episode seed (default: config seed)");
    run_cmd->add_option("--out", run.out, "Trace output (default stdout)");
    run_cmd->add_option("--metrics", run.metrics_out, "Episode metrics CSV");
    run_cmd->add_option("--dump-tree", run.tree_out, "Policy tree of the first planning step (JSON)");
    run_cmd->add_flag("--timing", run.timing, "Include wall-clock planning times");

    CompareOptions cmp;
    auto* cmp_cmd = app.add_subcommand("compare", "Run seeds x planners and write aggregate metrics CSV");
    cmp_cmd->add_option("--config", cmp.config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    cmp_cmd->add_option("--planners", cmp.planners, "Planners to compare")->delimiter(',');
    cmp_cmd->add_option("--seeds", cmp.seeds, "Number of seeds")->check(CLI::PositiveNumber);
    cmp_cmd->add_option("--seed-start", cmp.seed_start, "First seed");
    cmp_cmd->add_option("--out", cmp.out, "Aggregate CSV (default stdout)");
    cmp_cmd->add_option("--per-episode", cmp.per_episode, "Per-episode metrics CSV");
    cmp_cmd->add_flag("--timing", cmp.timing, "Include wall-clock planning times");
    cmp_cmd->add_flag("--stop-when-detected", cmp.stop_when_detected, "End each episode at first detection");
    cmp_cmd->add_flag("--quiet", cmp.quiet, "No progress on stderr");

    BenchOptions bench;
    auto* bench_cmd = app.add_subcommand("bench-mi", "Compare MI estimators against a Monte Carlo oracle");
    bench_cmd->add_option("--config", bench.config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--scenarios", bench.scenarios, "Number of scenarios")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--samples", bench.samples, "Oracle samples per evaluation")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--seed-start", bench.seed_start, "First scenario seed");
    bench_cmd->add_option("--out", bench.out, "Per-method CSV (default stdout)");
    bench_cmd->add_option("--samples-out", bench.samples_out, "Per-evaluation CSV");

    std::string validate_path;
    auto* val_cmd = app.add_subcommand("validate-config", "Check a scenario config against the schema");
    val_cmd->add_option("config", validate_path, "Scenario config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kConfigError;
    }

    try {
        if (*run_cmd) return cmd_run(run);
        if (*cmp_cmd) return cmd_compare(cmp);
        if (*bench_cmd) return cmd_bench(bench);
        if (*val_cmd) return cmd_validate(validate_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return 0;
}
