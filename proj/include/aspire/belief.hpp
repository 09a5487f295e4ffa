#pragma once
/**
 * @file   belief.hpp
 * @brief  Particle-filter belief over the target pose: prediction, Bayes update,
 *         low-variance resampling, point estimate and grid-based particle simplification.
 *
 * Operations take beliefs by value and return new beliefs; callers that no longer
 * need the input can move it in to avoid a copy.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "aspire/dynamics.hpp"
#include "aspire/error.hpp"
#include "aspire/pose.hpp"
#include "aspire/sensing.hpp"
#include "aspire/world.hpp"

namespace aspire {

/// Known robot pose plus N weighted target-pose particles. `step` counts the transitions
/// applied since the episode start and indexes the target control schedule.
struct ParticleBelief {
    Pose2D robot;
    std::vector<Pose2D> particles;
    std::vector<double> weights;
    std::size_t step{0};

    [[nodiscard]] std::size_t size() const noexcept { return particles.size(); }

    static ParticleBelief uniform(const Pose2D& robot, std::vector<Pose2D> particles, std::size_t step = 0) {
        ParticleBelief b;
        b.robot = robot;
        b.weights.assign(particles.size(), particles.empty() ? 0.0 : 1.0 / static_cast<double>(particles.size()));
        b.particles = std::move(particles);
        b.step = step;
        return b;
    }

    void validate() const {
        if (particles.empty()) throw InvalidInput("belief needs at least one particle");
        if (particles.size() != weights.size()) throw InvalidInput("particle and weight counts differ");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw InvalidInput("particle weights must be non-negative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw InvalidInput("particle weights must sum to one");
    }
};

/// Particles merged per grid cell. Weights sum to one; size() <= source size.
struct SimplifiedBelief {
    std::vector<Pose2D> particles;
    std::vector<double> weights;
    double cell_size{0.5};

    [[nodiscard]] std::size_t size() const noexcept { return particles.size(); }
};

/// Weighted particle set viewed without ownership.
struct ParticleView {
    std::span<const Pose2D> particles;
    std::span<const double> weights;

    ParticleView(std::span<const Pose2D> p, std::span<const double> w) : particles(p), weights(w) {}
    ParticleView(const ParticleBelief& b) : particles(b.particles), weights(b.weights) {}  // NOLINT
    ParticleView(const SimplifiedBelief& b) : particles(b.particles), weights(b.weights) {}  // NOLINT
};

/// Advances the robot by its control and every particle by one noisy target transition.
template <class Rng>
[[nodiscard]] ParticleBelief predict(ParticleBelief b, const ControlInput& robot_u, double robot_dt,
                                     const TargetModel& target_model, Rng& rng) {
    b.robot = unicycle_step(b.robot, robot_u, robot_dt);
    for (Pose2D& p : b.particles) p = target_step(p, target_model, b.step, rng);
    ++b.step;
    return b;
}

struct UpdateResult {
    ParticleBelief belief;
    /// Total likelihood was zero; prior weights were kept.
    bool degenerate{false};
};

/// Bayes weight update via log-likelihoods with a max shift. On a degenerate update the
/// prior weights are returned unchanged and the flag is set.
[[nodiscard]] inline UpdateResult update_or_keep(ParticleBelief b, const Measurement& z, const SensorFootprint& fp,
                                                 const ObstacleMap& map, const MeasurementNoise& noise) {
    const std::size_t n = b.size();
    std::vector<double> logl(n);
    double max_l = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        logl[j] = b.weights[j] > 0.0 ? log_likelihood(z, b.robot, b.particles[j], fp, map, noise)
                                     : -std::numeric_limits<double>::infinity();
        max_l = std::max(max_l, logl[j]);
    }
    if (!std::isfinite(max_l)) return {std::move(b), true};

    std::vector<double> w(n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        w[j] = b.weights[j] * std::exp(logl[j] - max_l);
        total += w[j];
    }
    if (!(total > 0.0)) return {std::move(b), true};
    for (double& x : w) x /= total;
    b.weights = std::move(w);
    return {std::move(b), false};
}

/// Throwing form of update_or_keep.
[[nodiscard]] inline ParticleBelief update(ParticleBelief b, const Measurement& z, const SensorFootprint& fp,
                                           const ObstacleMap& map, const MeasurementNoise& noise) {
    auto r = update_or_keep(std::move(b), z, fp, map, noise);
    if (r.degenerate) throw DegenerateUpdate("measurement has zero likelihood under every particle");
    return std::move(r.belief);
}

/// Copy counts of the systematic comb for a given offset in [0, 1) (measured in units of 1/N).
/// Particle j receives the comb points m + offset that fall in [N*C_{j-1}, N*C_j).
[[nodiscard]] inline std::vector<std::size_t> low_variance_counts(std::span<const double> weights, double offset) {
    const std::size_t n = weights.size();
    std::vector<std::size_t> counts(n, 0);
    const double scale = static_cast<double>(n);
    double upper = weights.empty() ? 0.0 : weights[0] * scale;
    std::size_t j = 0;
    for (std::size_t m = 0; m < n; ++m) {
        const double pointer = static_cast<double>(m) + offset;
        while (pointer >= upper && j + 1 < n) {
            ++j;
            upper += weights[j] * scale;
        }
        ++counts[j];
    }
    return counts;
}

/// Low-variance (systematic) resampling with a single offset drawn from the rng. Output weights 1/N.
template <class Rng>
[[nodiscard]] ParticleBelief resample_low_variance(ParticleBelief b, Rng& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double offset = u01(rng);
    const auto counts = low_variance_counts(b.weights, offset);
    std::vector<Pose2D> out;
    out.reserve(b.size());
    for (std::size_t j = 0; j < counts.size(); ++j) out.insert(out.end(), counts[j], b.particles[j]);
    b.particles = std::move(out);
    b.weights.assign(b.particles.size(), 1.0 / static_cast<double>(b.particles.size()));
    return b;
}

/// 1 / sum(w^2).
[[nodiscard]] inline double effective_sample_size(std::span<const double> weights) noexcept {
    double s = 0.0;
    for (double w : weights) s += w * w;
    return s > 0.0 ? 1.0 / s : 0.0;
}

[[nodiscard]] inline double effective_sample_size(const ParticleBelief& b) noexcept {
    return effective_sample_size(std::span<const double>(b.weights));
}

/// Resamples when ESS drops below `ess_fraction * N`.
template <class Rng>
[[nodiscard]] ParticleBelief resample_if_degenerate(ParticleBelief b, double ess_fraction, Rng& rng) {
    if (effective_sample_size(b) < ess_fraction * static_cast<double>(b.size())) {
        return resample_low_variance(std::move(b), rng);
    }
    return b;
}

/// Weighted mean of particle positions.
[[nodiscard]] inline Vec2 point_estimate(ParticleView b) noexcept {
    Vec2 m = Vec2::Zero();
    double total = 0.0;
    for (std::size_t j = 0; j < b.particles.size(); ++j) {
        m += b.weights[j] * b.particles[j].position();
        total += b.weights[j];
    }
    return total > 0.0 ? Vec2(m / total) : m;
}

/// Merges particles sharing a cell of a uniform x-y grid into their weighted average
/// (circular mean for the heading). Cells appear in order of first occupancy.
[[nodiscard]] inline SimplifiedBelief simplify(ParticleView b, double cell_size) {
    if (!(cell_size > 0.0)) throw InvalidInput("cell size must be positive");
    struct Cell {
        double w{0.0};
        double wx{0.0};
        double wy{0.0};
        double ws{0.0};
        double wc{0.0};
    };
    std::vector<Cell> cells;
    std::unordered_map<std::uint64_t, std::size_t> index;
    index.reserve(b.particles.size() * 2);
    const double inv = 1.0 / cell_size;
    for (std::size_t j = 0; j < b.particles.size(); ++j) {
        const Pose2D& p = b.particles[j];
        const auto ix = static_cast<std::int64_t>(std::floor(p.x() * inv));
        const auto iy = static_cast<std::int64_t>(std::floor(p.y() * inv));
        const std::uint64_t key = (static_cast<std::uint64_t>(ix) << 32) ^ (static_cast<std::uint64_t>(iy) & 0xffffffffULL);
        auto [it, inserted] = index.try_emplace(key, cells.size());
        if (inserted) cells.emplace_back();
        Cell& c = cells[it->second];
        const double w = b.weights[j];
        c.w += w;
        c.wx += w * p.x();
        c.wy += w * p.y();
        c.ws += w * std::sin(p.theta());
        c.wc += w * std::cos(p.theta());
    }
    SimplifiedBelief out;
    out.cell_size = cell_size;
    out.particles.reserve(cells.size());
    out.weights.reserve(cells.size());
    for (const Cell& c : cells) {
        if (!(c.w > 0.0)) continue;  // cells holding only zero-weight particles carry no mass
        out.particles.emplace_back(c.wx / c.w, c.wy / c.w, std::atan2(c.ws, c.wc));
        out.weights.push_back(c.w);
    }
    return out;
}

}  // namespace aspire
