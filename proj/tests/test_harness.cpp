#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "aspire/harness/compare.hpp"
#include "aspire/harness/config.hpp"
#include "aspire/harness/episode.hpp"
#include "aspire/harness/io.hpp"
#include "aspire/harness/scenario.hpp"

using namespace aspire;
using namespace aspire::harness;

namespace {

// Small fixed scenario: target 4 m ahead of the robot, prior centred on it.
const char* kSmall = R"({
  "t_max": 12,
  "particles": 100,
  "map": { "bounds": [0, 0, 20, 20], "obstacles": [[[14, 2], [16, 2], [16, 6], [14, 6]]] },
  "sensor": { "r_min": 1, "r_max": 6, "half_angle": 0.7853981633974483, "sigma": [0.1, 0.01] },
  "robot": { "initial": [5, 10, 0] },
  "target": { "model": "controlled", "wander": { "v": [0, 0.5], "w_max": 0.3, "segment_steps": 5 },
              "Q": [0.05, 0.05, 0.01], "initial": [9, 10, 0] },
  "prior": [ { "weight": 1, "mean": [9, 10, 0], "covariance": [0.5, 0.5, 0.1] } ],
  "planner": { "iterations": 30, "horizon": 5 }
})";

ScenarioConfig small() { return parse_config_text(kSmall); }

StepRecord step(int k, bool seen, double err = 0.0) {
    StepRecord s;
    s.k = k;
    s.target = Pose2D(1, 1, 0);
    s.estimate = Vec2(1 + err, 1);
    if (seen) s.z = Detection{2.0, 0.0};
    return s;
}

}  // namespace

TEST(Config, ParsesSmallScenario) {
    const auto cfg = small();
    EXPECT_EQ(cfg.t_max, 12);
    EXPECT_EQ(cfg.particles, 100u);
    EXPECT_EQ(cfg.planner.iterations, 30);
    EXPECT_EQ(cfg.prior.size(), 1u);
    EXPECT_EQ(cfg.planner.final_selection, FinalSelection::ucb);
}

TEST(Config, RejectsUnknownKey) {
    EXPECT_THROW((void)parse_config_text(R"({"map": {"bounds": [0, 0, 5, 5]}, "particle": 3})"), ConfigError);
}

TEST(Config, RejectsMalformedJson) { EXPECT_THROW((void)parse_config_text("{ \"map\": "), ConfigError); }

TEST(Config, RejectsMissingMap) { EXPECT_THROW((void)parse_config_text("{}"), ConfigError); }

TEST(Config, RejectsBadValues) {
    std::string text = kSmall;
    EXPECT_THROW((void)parse_config_text(text.replace(text.find("\"iterations\": 30"), 16, "\"iterations\": 0")),
                 ConfigError);
    text = kSmall;
    EXPECT_THROW((void)parse_config_text(text.replace(text.find("[0.1, 0.01]"), 11, "[0.1, -1.0]")), ConfigError);
}

TEST(Config, MissingFileIsConfigError) { EXPECT_THROW((void)load_config("/nonexistent/cfg.json"), ConfigError); }

TEST(SamplePrior, ParticlesStayInFreeSpace) {
    const auto cfg = small();
    auto rng = make_stream(1, Stream::prior);
    const std::vector<PriorComponent> prior{{1.0, Pose2D(15, 4, 0), Vec3(4, 4, 0.1).asDiagonal()}};
    const auto b = sample_prior(prior, 300, cfg.map, Pose2D(5, 10, 0), rng);
    ASSERT_EQ(b.size(), 300u);
    for (const auto& p : b.particles) EXPECT_TRUE(cfg.map.point_free(p.position()));
    for (double w : b.weights) EXPECT_DOUBLE_EQ(w, 1.0 / 300.0);
}

TEST(SamplePrior, ImpossiblePriorFails) {
    const auto cfg = small();
    auto rng = make_stream(1, Stream::prior);
    const std::vector<PriorComponent> prior{{1.0, Pose2D(15, 4, 0), Vec3(1e-8, 1e-8, 1e-8).asDiagonal()}};
    EXPECT_THROW((void)sample_prior(prior, 5, cfg.map, Pose2D(5, 10, 0), rng), ConfigError);
}

TEST(Scenario, TruthDoesNotDependOnPlanner) {
    const auto cfg = small();
    const auto a = run_episode(cfg, PlannerKind::aspire, 3).record;
    const auto b = run_episode(cfg, PlannerKind::nbv, 3).record;
    ASSERT_EQ(a.steps.size(), b.steps.size());
    for (std::size_t i = 0; i < a.steps.size(); ++i) EXPECT_EQ(a.steps[i].target, b.steps[i].target);
}

TEST(Episode, SeededRunsAreIdentical) {
    const auto cfg = small();
    std::ostringstream a, b;
    write_trace(a, run_episode(cfg, PlannerKind::aspire, 5).record, false);
    write_trace(b, run_episode(cfg, PlannerKind::aspire, 5).record, false);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_FALSE(a.str().empty());
}

TEST(Episode, TargetInViewIsDetectedAtOnce) {
    const auto rec = run_episode(small(), PlannerKind::nbv, 1).record;
    const auto m = metrics(rec);
    ASSERT_TRUE(m.detected());
    EXPECT_LE(*m.search_steps, 2);
    EXPECT_EQ(m.steps, 12);
}

TEST(Episode, StopWhenDetectedEndsEarly) {
    const auto rec = run_episode(small(), PlannerKind::nbv, 1, {.stop_when_detected = true}).record;
    ASSERT_FALSE(rec.steps.empty());
    EXPECT_TRUE(rec.steps.back().z.has_value());
    EXPECT_EQ(static_cast<int>(rec.steps.size()), *metrics(rec).search_steps);
}

TEST(Metrics, NeverDetected) {
    EpisodeRecord rec;
    for (int k = 1; k <= 4; ++k) rec.steps.push_back(step(k, false));
    const auto m = metrics(rec);
    EXPECT_FALSE(m.detected());
    EXPECT_FALSE(m.loss_rate);
    EXPECT_FALSE(m.visibility_rate);
}

TEST(Metrics, TrackingRatesCountFromFirstDetection) {
    EpisodeRecord rec;
    const bool seen[] = {false, false, true, true, false, true};
    for (int k = 1; k <= 6; ++k) rec.steps.push_back(step(k, seen[k - 1], 0.5));
    const auto m = metrics(rec);
    ASSERT_TRUE(m.detected());
    EXPECT_EQ(*m.search_steps, 3);
    EXPECT_DOUBLE_EQ(*m.visibility_rate, 0.75);
    EXPECT_DOUBLE_EQ(*m.loss_rate + *m.visibility_rate, 1.0);
    EXPECT_DOUBLE_EQ(*m.estimation_error, 0.5);
    EXPECT_DOUBLE_EQ(*m.search_seconds(0.5), 1.5);
}

TEST(Aggregate, CensorsUndetectedAndAveragesTracking) {
    std::vector<EpisodeSummary> eps(3);
    for (int i = 0; i < 3; ++i) {
        eps[i].seed = i;
        eps[i].t_max = 100;
    }
    eps[0].metrics.search_steps = 10;
    eps[0].metrics.loss_rate = 0.2;
    eps[1].metrics.search_steps = 30;
    eps[1].metrics.loss_rate = 0.4;
    const auto a = aggregate(PlannerKind::aspire, eps);
    EXPECT_EQ(a.episodes, 3);
    EXPECT_EQ(a.detected, 2);
    EXPECT_DOUBLE_EQ(a.mean_search_steps, 140.0 / 3.0);
    EXPECT_DOUBLE_EQ(a.median_search_steps, 30.0);
    ASSERT_TRUE(a.mean_loss_rate);
    EXPECT_NEAR(*a.mean_loss_rate, 0.3, 1e-15);
}

TEST(Median, OddAndEven) {
    EXPECT_EQ(median({3, 1, 2}), 2.0);
    EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
    EXPECT_EQ(median({}), 0.0);
}

TEST(Csv, QuotesOnlyWhenNeeded) {
    EXPECT_EQ(csv_escape("plain"), "plain");
    EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(csv_escape("two\nlines"), "\"two\nlines\"");
    std::ostringstream os;
    CsvWriter w(os);
    w.row({"x", "y,z"});
    EXPECT_EQ(os.str(), "x,\"y,z\"\r\n");
}

TEST(Csv, NumbersRoundTrip) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
    EXPECT_EQ(optional_field(std::nullopt), "");
}

TEST(Planner, NamesRoundTrip) {
    for (auto k : {PlannerKind::aspire, PlannerKind::nbv, PlannerKind::rollout10, PlannerKind::rollout20,
                   PlannerKind::rollout30}) {
        EXPECT_EQ(parse_planner(to_string(k)), k);
    }
    EXPECT_THROW((void)parse_planner("random"), ConfigError);
    EXPECT_EQ(rollout_depth(PlannerKind::rollout20), 20);
}
