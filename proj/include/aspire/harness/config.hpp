#pragma once
/**
 * @file   config.hpp
 * @brief  Scenario configuration: schema, JSON parsing and validation.
 *
 * The file format is JSON. Unknown keys are rejected so that typos surface as config errors.
 * See docs/config.md for the annotated schema.
 */

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aspire/apft.hpp"
#include "aspire/dynamics.hpp"
#include "aspire/error.hpp"
#include "aspire/info.hpp"
#include "aspire/sensing.hpp"
#include "aspire/world.hpp"

namespace aspire::harness {

using json = nlohmann::json;

struct PriorComponent {
    double weight{1.0};
    Pose2D mean;
    Mat3 covariance{Vec3(3.0, 3.0, 0.01).asDiagonal()};
};

/// Piecewise-constant random controls for a controlled target without an explicit schedule.
struct WanderSpec {
    double v_min{0.0};
    double v_max{1.0};
    double w_max{0.5};
    int segment_steps{10};
};

struct TargetSpec {
    TargetModel::Kind kind{TargetModel::Kind::controlled};
    std::vector<ControlInput> controls;
    WanderSpec wander{};
    /// Autonomous constant-speed drift.
    double speed{0.0};
    Mat3 q{Vec3(0.5, 0.5, 0.1).asDiagonal()};
    Pose2D initial;
};

enum class PriorKind { unimodal, multimodal };

/// Per-seed randomisation of start poses and prior (used by `compare` and the acceptance runs).
struct RandomizeSpec {
    PriorKind prior{PriorKind::unimodal};
    double min_distance{10.0};
    double max_distance{20.0};
    int distractors{2};
    double true_weight{0.2};
    Mat3 covariance{Vec3(3.0, 3.0, 0.01).asDiagonal()};
};

/// MI benchmark protocol: pursuit robot at a fixed standoff, filter running on real measurements.
struct BenchSpec {
    int steps{10};
    double standoff{3.0};
    Mat3 prior_covariance{Vec3(3.0, 3.0, 0.01).asDiagonal()};
    /// Oracle values below this are excluded from the relative error.
    double min_information{1e-3};
};

struct ScenarioConfig {
    ObstacleMap map{Bounds{0.0, 0.0, 50.0, 50.0}};
    SensorFootprint sensor{};
    Mat2 sigma{Vec2(0.1, 0.01).asDiagonal()};
    RobotModel robot{};
    Pose2D robot_initial{1.0, 1.0, 0.0};
    TargetSpec target{};
    std::vector<PriorComponent> prior;
    std::optional<RandomizeSpec> randomize;
    PlannerParams planner{};
    std::size_t particles{500};
    double ess_fraction{0.5};
    std::uint64_t seed{1};
    int t_max{100};
    BenchSpec bench{};

    void validate() const;
};

/// Reward scale used for default UCB constant and termination threshold: max(H0, ln 2).
[[nodiscard]] inline double default_reward_scale(const Mat2& sigma) {
    return std::max(gaussian_entropy_h0<2>(sigma), std::log(2.0));
}

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

template <class T>
T get(const json& j, const char* key, const T& fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

inline std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : j) {
        if (!x.is_number()) throw ConfigError(where + ": expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

inline Pose2D pose(const json& j, const std::string& where) {
    const auto v = numbers(j, where);
    if (v.size() != 3) throw ConfigError(where + ": pose must be [x, y, theta]");
    return {v[0], v[1], v[2]};
}

/// Square matrix from either a diagonal [a, b, ...] or a nested row array.
template <int N>
Eigen::Matrix<double, N, N> matrix(const json& j, const std::string& where) {
    Eigen::Matrix<double, N, N> m = Eigen::Matrix<double, N, N>::Zero();
    if (!j.is_array() || j.size() != static_cast<std::size_t>(N)) {
        throw ConfigError(where + ": expected a " + std::to_string(N) + "-element diagonal or " + std::to_string(N) +
                          "x" + std::to_string(N) + " rows");
    }
    if (j[0].is_number()) {
        const auto d = numbers(j, where);
        for (int i = 0; i < N; ++i) m(i, i) = d[static_cast<std::size_t>(i)];
        return m;
    }
    for (int r = 0; r < N; ++r) {
        const auto row = numbers(j[static_cast<std::size_t>(r)], where);
        if (row.size() != static_cast<std::size_t>(N)) throw ConfigError(where + ": matrix row has wrong length");
        for (int c = 0; c < N; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

inline ObstacleMap parse_map(const json& j) {
    check_keys(j, {"bounds", "obstacles"}, "map");
    if (!j.contains("bounds")) throw ConfigError("map.bounds is required");
    const auto b = numbers(j.at("bounds"), "map.bounds");
    if (b.size() != 4) throw ConfigError("map.bounds must be [x_min, y_min, x_max, y_max]");
    std::vector<ConvexPolygon> obstacles;
    if (j.contains("obstacles")) {
        std::size_t idx = 0;
        for (const auto& poly : j.at("obstacles")) {
            const std::string where = "map.obstacles[" + std::to_string(idx++) + "]";
            std::vector<Vec2> verts;
            if (!poly.is_array()) throw ConfigError(where + ": expected a vertex list");
            for (const auto& v : poly) {
                const auto xy = numbers(v, where);
                if (xy.size() != 2) throw ConfigError(where + ": vertices are [x, y]");
                verts.emplace_back(xy[0], xy[1]);
            }
            try {
                obstacles.emplace_back(std::move(verts));
            } catch (const InvalidInput& e) {
                throw ConfigError(where + ": " + e.what());
            }
        }
    }
    try {
        return ObstacleMap(Bounds{b[0], b[1], b[2], b[3]}, std::move(obstacles));
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("map: ") + e.what());
    }
}

inline MiEstimator estimator(const std::string& s) {
    try {
        return parse_estimator(s);
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("planner.estimator: ") + e.what());
    }
}

}  // namespace detail

inline void ScenarioConfig::validate() const {
    try {
        sensor.validate();
        robot.validate();
        planner.validate();
        (void)MeasurementNoise(sigma);
        (void)MotionNoise(target.q);
        for (const auto& c : prior) (void)MotionNoise(c.covariance);
        if (randomize) (void)MotionNoise(randomize->covariance);
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    if (particles < 1) throw ConfigError("particles must be >= 1");
    if (t_max < 1) throw ConfigError("t_max must be >= 1");
    if (!(ess_fraction >= 0.0 && ess_fraction <= 1.0)) throw ConfigError("ess_fraction must lie in [0, 1]");
    if (bench.steps < 1) throw ConfigError("bench.steps must be >= 1");
    if (target.kind == TargetModel::Kind::controlled && !target.controls.empty()) {
        if (target.controls.size() < static_cast<std::size_t>(t_max)) {
            throw ConfigError("target.controls must cover t_max steps");
        }
    }
    if (target.wander.segment_steps < 1 || target.wander.v_min > target.wander.v_max) {
        throw ConfigError("target.wander is inconsistent");
    }
    if (randomize) {
        if (!(randomize->min_distance >= 0.0) || randomize->max_distance < randomize->min_distance) {
            throw ConfigError("randomize.distance must be [min, max] with 0 <= min <= max");
        }
        if (randomize->prior == PriorKind::multimodal &&
            (randomize->distractors < 1 || !(randomize->true_weight > 0.0 && randomize->true_weight < 1.0))) {
            throw ConfigError("randomize: multimodal prior needs distractors >= 1 and true_weight in (0, 1)");
        }
        return;
    }
    if (prior.empty()) throw ConfigError("prior must list at least one component (or enable randomize)");
    double total = 0.0;
    for (const auto& c : prior) {
        if (!(c.weight > 0.0)) throw ConfigError("prior component weights must be positive");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("prior weights must sum to 1");
    if (!pose_in_free_space(robot_initial, map, robot.radius)) throw ConfigError("robot.initial is not collision free");
    if (!map.point_free(target.initial.position())) throw ConfigError("target.initial is not in free space");
}

/// Parses a scenario from JSON text. Throws ConfigError.
[[nodiscard]] inline ScenarioConfig parse_config(const json& root) {
    using namespace detail;
    check_keys(root, {"seed", "t_max", "particles", "ess_fraction", "map", "sensor", "robot", "target", "prior",
                      "randomize", "planner", "bench", "description"},
               "config");
    ScenarioConfig cfg;
    cfg.seed = get<std::uint64_t>(root, "seed", cfg.seed, "config");
    cfg.t_max = get<int>(root, "t_max", cfg.t_max, "config");
    cfg.particles = get<std::size_t>(root, "particles", cfg.particles, "config");
    cfg.ess_fraction = get<double>(root, "ess_fraction", cfg.ess_fraction, "config");

    if (!root.contains("map")) throw ConfigError("config.map is required");
    cfg.map = parse_map(root.at("map"));

    if (root.contains("sensor")) {
        const auto& s = root.at("sensor");
        check_keys(s, {"r_min", "r_max", "half_angle", "sigma"}, "sensor");
        cfg.sensor.r_min = get<double>(s, "r_min", cfg.sensor.r_min, "sensor");
        cfg.sensor.r_max = get<double>(s, "r_max", cfg.sensor.r_max, "sensor");
        cfg.sensor.half_angle = get<double>(s, "half_angle", cfg.sensor.half_angle, "sensor");
        if (s.contains("sigma")) cfg.sigma = matrix<2>(s.at("sigma"), "sensor.sigma");
    }

    if (root.contains("robot")) {
        const auto& r = root.at("robot");
        check_keys(r, {"dt", "v_max", "w_max", "v_fractions", "w_fractions", "radius", "arc_samples", "initial"},
                   "robot");
        cfg.robot.dt = get<double>(r, "dt", cfg.robot.dt, "robot");
        cfg.robot.limits.v_max = get<double>(r, "v_max", cfg.robot.limits.v_max, "robot");
        cfg.robot.limits.w_max = get<double>(r, "w_max", cfg.robot.limits.w_max, "robot");
        if (r.contains("v_fractions")) cfg.robot.v_fractions = numbers(r.at("v_fractions"), "robot.v_fractions");
        if (r.contains("w_fractions")) cfg.robot.w_fractions = numbers(r.at("w_fractions"), "robot.w_fractions");
        cfg.robot.radius = get<double>(r, "radius", cfg.robot.radius, "robot");
        cfg.robot.arc_samples = get<int>(r, "arc_samples", cfg.robot.arc_samples, "robot");
        if (r.contains("initial")) cfg.robot_initial = pose(r.at("initial"), "robot.initial");
    }

    if (root.contains("target")) {
        const auto& t = root.at("target");
        check_keys(t, {"model", "controls", "wander", "speed", "Q", "initial"}, "target");
        const auto kind = get<std::string>(t, "model", "controlled", "target");
        if (kind == "controlled") {
            cfg.target.kind = TargetModel::Kind::controlled;
        } else if (kind == "autonomous") {
            cfg.target.kind = TargetModel::Kind::autonomous;
        } else {
            throw ConfigError("target.model must be 'controlled' or 'autonomous'");
        }
        if (t.contains("controls")) {
            for (const auto& u : t.at("controls")) {
                const auto vw = numbers(u, "target.controls");
                if (vw.size() != 2) throw ConfigError("target.controls entries are [v, w]");
                cfg.target.controls.push_back({vw[0], vw[1]});
            }
        }
        if (t.contains("wander")) {
            const auto& w = t.at("wander");
            check_keys(w, {"v", "w_max", "segment_steps"}, "target.wander");
            if (w.contains("v")) {
                const auto v = numbers(w.at("v"), "target.wander.v");
                if (v.size() != 2) throw ConfigError("target.wander.v must be [v_min, v_max]");
                cfg.target.wander.v_min = v[0];
                cfg.target.wander.v_max = v[1];
            }
            cfg.target.wander.w_max = get<double>(w, "w_max", cfg.target.wander.w_max, "target.wander");
            cfg.target.wander.segment_steps =
                get<int>(w, "segment_steps", cfg.target.wander.segment_steps, "target.wander");
        }
        cfg.target.speed = get<double>(t, "speed", cfg.target.speed, "target");
        if (t.contains("Q")) cfg.target.q = matrix<3>(t.at("Q"), "target.Q");
        if (t.contains("initial")) cfg.target.initial = pose(t.at("initial"), "target.initial");
    }

    if (root.contains("prior")) {
        const auto& p = root.at("prior");
        if (!p.is_array()) throw ConfigError("prior must be an array of components");
        std::size_t idx = 0;
        for (const auto& c : p) {
            const std::string where = "prior[" + std::to_string(idx++) + "]";
            check_keys(c, {"weight", "mean", "covariance"}, where);
            PriorComponent comp;
            comp.weight = get<double>(c, "weight", 1.0, where);
            if (!c.contains("mean")) throw ConfigError(where + ".mean is required");
            comp.mean = pose(c.at("mean"), where + ".mean");
            if (c.contains("covariance")) comp.covariance = matrix<3>(c.at("covariance"), where + ".covariance");
            cfg.prior.push_back(comp);
        }
    }

    if (root.contains("randomize")) {
        const auto& r = root.at("randomize");
        check_keys(r, {"prior", "distance", "distractors", "true_weight", "covariance"}, "randomize");
        RandomizeSpec spec;
        const auto kind = get<std::string>(r, "prior", "unimodal", "randomize");
        if (kind == "unimodal") {
            spec.prior = PriorKind::unimodal;
        } else if (kind == "multimodal") {
            spec.prior = PriorKind::multimodal;
        } else {
            throw ConfigError("randomize.prior must be 'unimodal' or 'multimodal'");
        }
        if (r.contains("distance")) {
            const auto d = numbers(r.at("distance"), "randomize.distance");
            if (d.size() != 2) throw ConfigError("randomize.distance must be [min, max]");
            spec.min_distance = d[0];
            spec.max_distance = d[1];
        }
        spec.distractors = get<int>(r, "distractors", spec.distractors, "randomize");
        spec.true_weight = get<double>(r, "true_weight", spec.true_weight, "randomize");
        if (r.contains("covariance")) spec.covariance = matrix<3>(r.at("covariance"), "randomize.covariance");
        cfg.randomize = spec;
    }

    const double scale = [&] {
        try {
            return default_reward_scale(cfg.sigma);
        } catch (const InvalidInput& e) {
            throw ConfigError(std::string("sensor.sigma: ") + e.what());
        }
    }();
    cfg.planner.ucb_c = 2.0 * scale;
    cfg.planner.delta_r = 0.6 * scale;
    if (root.contains("planner")) {
        const auto& p = root.at("planner");
        check_keys(p, {"iterations", "horizon", "discount", "ucb_c", "k_o", "alpha_o", "delta_r", "estimator",
                       "lambda", "cell_size", "mc_samples", "reward_noise", "final_selection", "observation_selection",
                       "resample_in_tree"},
                   "planner");
        auto& pp = cfg.planner;
        pp.iterations = get<int>(p, "iterations", pp.iterations, "planner");
        pp.horizon = get<int>(p, "horizon", pp.horizon, "planner");
        pp.discount = get<double>(p, "discount", pp.discount, "planner");
        pp.ucb_c = get<double>(p, "ucb_c", pp.ucb_c, "planner");
        pp.k_o = get<double>(p, "k_o", pp.k_o, "planner");
        pp.alpha_o = get<double>(p, "alpha_o", pp.alpha_o, "planner");
        if (p.contains("delta_r")) {
            const auto& d = p.at("delta_r");
            if (d.is_string() && d.get<std::string>() == "inf") {
                pp.delta_r = std::numeric_limits<double>::infinity();
            } else {
                pp.delta_r = get<double>(p, "delta_r", pp.delta_r, "planner");
            }
        }
        if (p.contains("estimator")) pp.reward.estimator = estimator(get<std::string>(p, "estimator", "", "planner"));
        pp.reward.lambda = get<double>(p, "lambda", pp.reward.lambda, "planner");
        pp.reward.cell_size = get<double>(p, "cell_size", pp.reward.cell_size, "planner");
        pp.reward.mc_samples = get<std::size_t>(p, "mc_samples", pp.reward.mc_samples, "planner");
        pp.reward.sample_noise = get<bool>(p, "reward_noise", pp.reward.sample_noise, "planner");
        const auto fs = get<std::string>(p, "final_selection", "ucb", "planner");
        if (fs == "ucb") {
            pp.final_selection = FinalSelection::ucb;
        } else if (fs == "max_q") {
            pp.final_selection = FinalSelection::max_q;
        } else {
            throw ConfigError("planner.final_selection must be 'ucb' or 'max_q'");
        }
        const auto os = get<std::string>(p, "observation_selection", "uniform", "planner");
        if (os == "uniform") {
            pp.observation_selection = ObservationSelection::uniform;
        } else if (os == "visits") {
            pp.observation_selection = ObservationSelection::visit_proportional;
        } else {
            throw ConfigError("planner.observation_selection must be 'uniform' or 'visits'");
        }
        pp.resample_in_tree = get<bool>(p, "resample_in_tree", pp.resample_in_tree, "planner");
    }
    cfg.planner.ess_fraction = cfg.ess_fraction;

    if (root.contains("bench")) {
        const auto& b = root.at("bench");
        check_keys(b, {"steps", "standoff", "prior_covariance", "min_information"}, "bench");
        cfg.bench.steps = get<int>(b, "steps", cfg.bench.steps, "bench");
        cfg.bench.standoff = get<double>(b, "standoff", cfg.bench.standoff, "bench");
        if (b.contains("prior_covariance")) {
            cfg.bench.prior_covariance = matrix<3>(b.at("prior_covariance"), "bench.prior_covariance");
        }
        cfg.bench.min_information = get<double>(b, "min_information", cfg.bench.min_information, "bench");
    }

    cfg.validate();
    return cfg;
}

[[nodiscard]] inline ScenarioConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(root);
}

[[nodiscard]] inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace aspire::harness
