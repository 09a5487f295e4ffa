#pragma once
/**
 * @file   info.hpp
 * @brief  Mutual information between the predicted target state and the predicted,
 *         FOV-censored measurement.
 *
 * The predicted measurement distribution is a censored Gaussian mixture: one component
 * N(h(x_r, x_j), Sigma) per visible particle j (weight w_j), plus an atom at the empty
 * observation carrying the mass of all invisible particles. Its entropy is
 *
 *     H(z) = -e log e - sum_{j in A} w_j E_{N_j}[ log g(z) ],   g(z) = sum_{i in A} w_i N_i(z),
 *
 * with e the empty mass. The conditional entropy is H0 * (1 - e) with H0 the entropy of
 * N(0, Sigma). Four estimators of the expectation are provided:
 *
 *  - sigma points  : 2m+1 unscented points per component (the default reward),
 *  - Monte Carlo   : stratified sampling, used as the accuracy oracle,
 *  - Taylor 0 / 2  : expansion of log g around each component mean.
 *
 * All logarithms are natural; 0 log 0 is taken as 0. Measurement residuals are not
 * wrapped inside the mixture: visible bearings all lie within the sensor half angle.
 */

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

#include "aspire/belief.hpp"
#include "aspire/dynamics.hpp"
#include "aspire/error.hpp"
#include "aspire/sensing.hpp"
#include "aspire/world.hpp"

namespace aspire {

template <int M>
using VecM = Eigen::Matrix<double, M, 1>;
template <int M>
using MatM = Eigen::Matrix<double, M, M>;

namespace detail {

template <int M>
[[nodiscard]] Eigen::LLT<MatM<M>> checked_cholesky(const MatM<M>& sigma) {
    if (!sigma.allFinite() || !sigma.isApprox(sigma.transpose(), 1e-12)) {
        throw InvalidInput("covariance must be finite and symmetric");
    }
    Eigen::LLT<MatM<M>> llt(sigma);
    if (llt.info() != Eigen::Success) throw InvalidInput("covariance must be positive definite");
    const auto diag = llt.matrixLLT().diagonal();
    for (int k = 0; k < M; ++k) {
        if (!(diag(k) > 0.0)) throw InvalidInput("covariance must be positive definite");
    }
    return llt;
}

[[nodiscard]] inline double xlogx(double x) noexcept { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace detail

/// Differential entropy of N(0, Sigma) in nats: (m/2)(log 2 pi + 1) + (1/2) log |Sigma|.
template <int M>
[[nodiscard]] double gaussian_entropy_h0(const MatM<M>& sigma) {
    const auto llt = detail::checked_cholesky<M>(sigma);
    const double half_logdet = llt.matrixLLT().diagonal().array().log().sum();
    return 0.5 * M * (std::log(kTwoPi) + 1.0) + half_logdet;
}

/// Gaussian with shared covariance: precision, Cholesky factor and log normaliser.
template <int M>
class GaussianKernel {
public:
    explicit GaussianKernel(const MatM<M>& sigma) {
        const auto llt = detail::checked_cholesky<M>(sigma);
        sigma_ = sigma;
        chol_ = llt.matrixL();
        precision_ = llt.solve(MatM<M>::Identity());
        log_norm_ = -0.5 * M * std::log(kTwoPi) - llt.matrixLLT().diagonal().array().log().sum();
    }

    [[nodiscard]] const MatM<M>& covariance() const noexcept { return sigma_; }
    [[nodiscard]] const MatM<M>& cholesky() const noexcept { return chol_; }
    [[nodiscard]] const MatM<M>& precision() const noexcept { return precision_; }
    [[nodiscard]] double log_normalizer() const noexcept { return log_norm_; }

    [[nodiscard]] double mahalanobis2(const VecM<M>& r) const noexcept { return r.dot(precision_ * r); }

private:
    MatM<M> sigma_;
    MatM<M> chol_;
    MatM<M> precision_;
    double log_norm_{0.0};
};

/// 2m+1 unscented points with their weights.
template <int M>
struct SigmaSet {
    std::array<VecM<M>, 2 * M + 1> points;
    std::array<double, 2 * M + 1> weights;
    double lambda{0.0};
};

/// Center mu with weight lambda/(lambda+m); mu +/- columns of the lower Cholesky factor of
/// (lambda+m) Sigma, each with weight 1/(2(lambda+m)).
template <int M>
[[nodiscard]] SigmaSet<M> sigma_points(const VecM<M>& mu, const MatM<M>& sigma, double lambda) {
    if (!(lambda + M > 0.0)) throw InvalidInput("sigma point spread requires lambda + m > 0");
    const auto llt = detail::checked_cholesky<M>(sigma);
    const MatM<M> root = std::sqrt(lambda + M) * MatM<M>(llt.matrixL());
    SigmaSet<M> s;
    s.lambda = lambda;
    s.points[0] = mu;
    s.weights[0] = lambda / (lambda + M);
    for (int l = 0; l < M; ++l) {
        s.points[1 + l] = mu + root.col(l);
        s.points[1 + M + l] = mu - root.col(l);
        s.weights[1 + l] = s.weights[1 + M + l] = 1.0 / (2.0 * (lambda + M));
    }
    return s;
}

/// Predicted measurement distribution: Gaussian components for visible particles plus the
/// empty-observation atom.
template <int M>
struct CensoredMixture {
    std::vector<VecM<M>> means;
    std::vector<double> weights;
    MatM<M> covariance{MatM<M>::Identity()};
    double empty_mass{1.0};

    [[nodiscard]] std::size_t size() const noexcept { return means.size(); }
    [[nodiscard]] double visible_mass() const noexcept {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }

    void validate() const {
        if (means.size() != weights.size()) throw InvalidInput("mixture means and weights differ in length");
        for (double w : weights) {
            if (!(w >= 0.0)) throw InvalidInput("mixture weights must be non-negative");
        }
        if (!(empty_mass >= 0.0)) throw InvalidInput("empty mass must be non-negative");
        if (std::abs(empty_mass + visible_mass() - 1.0) > 1e-9) throw InvalidInput("mixture mass must sum to one");
    }
};

using MeasurementMixture = CensoredMixture<2>;

/// log g(z) where g is the unnormalised in-FOV part of the mixture.
template <int M>
[[nodiscard]] double log_censored_density(const CensoredMixture<M>& mix, const GaussianKernel<M>& kernel,
                                          const VecM<M>& z) {
    double max_e = -std::numeric_limits<double>::infinity();
    std::vector<double> e(mix.size());
    for (std::size_t i = 0; i < mix.size(); ++i) {
        e[i] = mix.weights[i] > 0.0 ? std::log(mix.weights[i]) - 0.5 * kernel.mahalanobis2(z - mix.means[i])
                                    : -std::numeric_limits<double>::infinity();
        max_e = std::max(max_e, e[i]);
    }
    if (!std::isfinite(max_e)) return -std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (double x : e) s += std::exp(x - max_e);
    return kernel.log_normalizer() + max_e + std::log(s);
}

/// Sigma-point approximation of H(z).
///
/// The points of component j are mu_j and mu_j +/- s_l, with s_l the scaled Cholesky columns
/// shared by all components. For the pair (j, i) with D = mu_j - mu_i, the squared Mahalanobis
/// distance of mu_j +/- s_l from mu_i is D'PD +/- 2 s_l'PD + (lambda + m), so each pair costs one
/// quadratic form and m dot products.
template <int M>
[[nodiscard]] double entropy_sp(const CensoredMixture<M>& mix, double lambda) {
    if (!(lambda + M > 0.0)) throw InvalidInput("sigma point spread requires lambda + m > 0");
    double h = -detail::xlogx(mix.empty_mass);
    const std::size_t n = mix.size();
    if (n == 0) return h;

    const GaussianKernel<M> kernel(mix.covariance);
    const double spread = lambda + M;
    const MatM<M> root = std::sqrt(spread) * kernel.cholesky();
    // rows: (P s_l)'
    const MatM<M> ps = (kernel.precision() * root).transpose();
    const double w_center = lambda / spread;
    const double w_side = 1.0 / (2.0 * spread);

    std::array<double, 2 * M + 1> sums{};
    for (std::size_t j = 0; j < n; ++j) {
        if (!(mix.weights[j] > 0.0)) continue;
        sums.fill(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double wi = mix.weights[i];
            if (!(wi > 0.0)) continue;
            const VecM<M> d = mix.means[j] - mix.means[i];
            const double q = kernel.mahalanobis2(d);
            const VecM<M> t = ps * d;
            sums[0] += wi * std::exp(-0.5 * q);
            for (int l = 0; l < M; ++l) {
                sums[1 + l] += wi * std::exp(-0.5 * (q + 2.0 * t(l) + spread));
                sums[1 + M + l] += wi * std::exp(-0.5 * (q - 2.0 * t(l) + spread));
            }
        }
        double p = 0.0;
        for (int l = 0; l < 2 * M + 1; ++l) {
            const double wl = l == 0 ? w_center : w_side;
            if (wl == 0.0) continue;
            double log_g;
            if (sums[l] > 0.0 && std::isfinite(sums[l])) {
                log_g = kernel.log_normalizer() + std::log(sums[l]);
            } else {
                VecM<M> z = mix.means[j];
                if (l >= 1 && l <= M) z += root.col(l - 1);
                if (l > M) z -= root.col(l - 1 - M);
                log_g = log_censored_density(mix, kernel, z);
            }
            p += wl * log_g;
        }
        h -= mix.weights[j] * p;
    }
    return h;
}

struct EntropyEstimate {
    double value{0.0};
    double standard_error{0.0};
};

/// Stratified Monte Carlo estimate of H(z): the empty atom is exact, the continuous part
/// averages -log g over samples from the normalised Gaussian mixture.
template <int M, class Rng>
[[nodiscard]] EntropyEstimate entropy_mc(const CensoredMixture<M>& mix, std::size_t n_samples, Rng& rng) {
    if (n_samples < 1) throw InvalidInput("Monte Carlo entropy needs at least one sample");
    EntropyEstimate out{-detail::xlogx(mix.empty_mass), 0.0};
    const double mass = mix.visible_mass();
    if (mix.size() == 0 || !(mass > 0.0)) return out;

    const GaussianKernel<M> kernel(mix.covariance);
    std::discrete_distribution<std::size_t> pick(mix.weights.begin(), mix.weights.end());
    std::normal_distribution<double> n01;
    const std::size_t n = mix.size();

    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        const std::size_t k = pick(rng);
        VecM<M> e;
        for (int d = 0; d < M; ++d) e(d) = n01(rng);
        const VecM<M> z = mix.means[k] + kernel.cholesky() * e;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += mix.weights[i] * std::exp(-0.5 * kernel.mahalanobis2(z - mix.means[i]));
        }
        const double log_g = sum > 0.0 ? kernel.log_normalizer() + std::log(sum) : log_censored_density(mix, kernel, z);
        const double delta = log_g - mean;
        mean += delta / static_cast<double>(s + 1);
        m2 += delta * (log_g - mean);
    }
    const double var = n_samples > 1 ? m2 / static_cast<double>(n_samples - 1) : 0.0;
    out.value -= mass * mean;
    out.standard_error = mass * std::sqrt(var / static_cast<double>(n_samples));
    return out;
}

/// Zeroth-order Taylor estimate: -e log e - sum_j w_j log g(mu_j).
template <int M>
[[nodiscard]] double entropy_taylor0(const CensoredMixture<M>& mix) {
    double h = -detail::xlogx(mix.empty_mass);
    if (mix.size() == 0) return h;
    const GaussianKernel<M> kernel(mix.covariance);
    for (std::size_t j = 0; j < mix.size(); ++j) {
        if (!(mix.weights[j] > 0.0)) continue;
        h -= mix.weights[j] * log_censored_density(mix, kernel, mix.means[j]);
    }
    return h;
}

/// Second-order Taylor estimate (expansion of log g around each component mean):
///   -e log e - sum_j w_j [ log g(mu_j) + 1/2 tr(Sigma * Hess log g(mu_j)) ].
/// With a_i = w_i N_i(z), u_i = P (z - mu_i) and d_i^2 = u_i' Sigma u_i,
///   tr(Sigma Hess log g) = sum_i a_i (d_i^2 - m) / g - (grad g)' Sigma (grad g) / g^2,
/// where grad g = -sum_i a_i u_i. The normaliser of N_i cancels in both ratios.
template <int M>
[[nodiscard]] double entropy_taylor2(const CensoredMixture<M>& mix) {
    double h = -detail::xlogx(mix.empty_mass);
    const std::size_t n = mix.size();
    if (n == 0) return h;
    const GaussianKernel<M> kernel(mix.covariance);
    std::vector<double> expo(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (!(mix.weights[j] > 0.0)) continue;
        const VecM<M>& z = mix.means[j];
        double max_e = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            expo[i] = mix.weights[i] > 0.0 ? std::log(mix.weights[i]) - 0.5 * kernel.mahalanobis2(z - mix.means[i])
                                           : -std::numeric_limits<double>::infinity();
            max_e = std::max(max_e, expo[i]);
        }
        double g = 0.0;
        double curvature = 0.0;
        VecM<M> grad = VecM<M>::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const double a = std::exp(expo[i] - max_e);
            if (a == 0.0) continue;
            const VecM<M> r = z - mix.means[i];
            const VecM<M> u = kernel.precision() * r;
            g += a;
            curvature += a * (r.dot(u) - M);
            grad -= a * u;
        }
        const double log_g = kernel.log_normalizer() + max_e + std::log(g);
        const double trace = curvature / g - grad.dot(kernel.covariance() * grad) / (g * g);
        h -= mix.weights[j] * (log_g + 0.5 * trace);
    }
    return h;
}

/// Conditional entropy H(z | x) = H0 times the visible mass.
template <int M>
[[nodiscard]] double conditional_entropy(const CensoredMixture<M>& mix) {
    return gaussian_entropy_h0<M>(mix.covariance) * mix.visible_mass();
}

/// Partitions particles by visibility from `robot` and builds the measurement mixture.
[[nodiscard]] inline MeasurementMixture build_censored_mixture(ParticleView particles, const Pose2D& robot,
                                                               const SensorFootprint& fp, const ObstacleMap& map,
                                                               const MeasurementNoise& noise) {
    MeasurementMixture mix;
    mix.covariance = noise.covariance();
    mix.empty_mass = 0.0;
    mix.means.reserve(particles.particles.size());
    mix.weights.reserve(particles.particles.size());
    for (std::size_t j = 0; j < particles.particles.size(); ++j) {
        const double w = particles.weights[j];
        const Vec2 pos = particles.particles[j].position();
        if (in_fov(robot, pos, fp, map)) {
            mix.means.push_back(observe(robot, pos));
            mix.weights.push_back(w);
        } else {
            mix.empty_mass += w;
        }
    }
    return mix;
}

/// Conditional entropy from a predicted belief at the predicted robot pose.
[[nodiscard]] inline double conditional_entropy(ParticleView predicted, const Pose2D& robot_next,
                                                const SensorFootprint& fp, const ObstacleMap& map,
                                                const MeasurementNoise& noise) {
    double visible = 0.0;
    for (std::size_t j = 0; j < predicted.particles.size(); ++j) {
        if (in_fov(robot_next, predicted.particles[j].position(), fp, map)) visible += predicted.weights[j];
    }
    return gaussian_entropy_h0<2>(noise.covariance()) * visible;
}

enum class MiEstimator { sigma_point, sigma_point_simplified, monte_carlo, taylor0, taylor2 };

[[nodiscard]] inline std::string_view to_string(MiEstimator e) noexcept {
    switch (e) {
        case MiEstimator::sigma_point: return "sp";
        case MiEstimator::sigma_point_simplified: return "sp+simplify";
        case MiEstimator::monte_carlo: return "mc";
        case MiEstimator::taylor0: return "taylor0";
        case MiEstimator::taylor2: return "taylor2";
    }
    return "?";
}

[[nodiscard]] inline MiEstimator parse_estimator(std::string_view s) {
    for (auto e : {MiEstimator::sigma_point, MiEstimator::sigma_point_simplified, MiEstimator::monte_carlo,
                   MiEstimator::taylor0, MiEstimator::taylor2}) {
        if (s == to_string(e)) return e;
    }
    throw InvalidInput("unknown MI estimator: " + std::string(s));
}

struct RewardParams {
    MiEstimator estimator{MiEstimator::sigma_point_simplified};
    /// Unscented spread; 3 - m for m = 2.
    double lambda{1.0};
    double cell_size{0.5};
    std::size_t mc_samples{100000};
    /// Add one draw of the target noise to each predicted particle (needs a generator).
    bool sample_noise{false};
};

/// MI of a censored mixture under the chosen estimator (mixture-level entry point).
template <class Rng>
[[nodiscard]] EntropyEstimate mixture_information(const MeasurementMixture& mix, const RewardParams& params,
                                                  Rng* rng) {
    if (mix.size() == 0) return {0.0, 0.0};
    const double cond = conditional_entropy<2>(mix);
    switch (params.estimator) {
        case MiEstimator::sigma_point:
        case MiEstimator::sigma_point_simplified: return {entropy_sp<2>(mix, params.lambda) - cond, 0.0};
        case MiEstimator::taylor0: return {entropy_taylor0<2>(mix) - cond, 0.0};
        case MiEstimator::taylor2: return {entropy_taylor2<2>(mix) - cond, 0.0};
        case MiEstimator::monte_carlo: {
            if (rng == nullptr) throw InvalidInput("Monte Carlo MI needs a random generator");
            const auto h = entropy_mc<2>(mix, params.mc_samples, *rng);
            return {h.value - cond, h.standard_error};
        }
    }
    return {0.0, 0.0};
}

/// One-step reward R(B, a) = H(z) - H(z | x) for the robot control `robot_u`.
///
/// The robot pose is advanced deterministically and particles follow the noiseless target
/// drift with unchanged weights, or drift plus one noise draw when `params.sample_noise` is set.
/// When every particle is provably beyond sensing range the result is exactly zero and no
/// mixture is built.
template <class Rng = std::mt19937_64>
[[nodiscard]] EntropyEstimate mutual_information(const ParticleBelief& b, const ControlInput& robot_u, double robot_dt,
                                                 const TargetModel& target_model, const SensorFootprint& fp,
                                                 const ObstacleMap& map, const MeasurementNoise& noise,
                                                 const RewardParams& params, Rng* rng = nullptr) {
    const Pose2D robot_next = unicycle_step(b.robot, robot_u, robot_dt);
    const bool noisy = params.sample_noise && !target_model.noise.is_zero();
    if (noisy && rng == nullptr) throw InvalidInput("noisy reward prediction needs a random generator");
    const bool simplified = params.estimator == MiEstimator::sigma_point_simplified;
    const double reach = fp.r_max + (simplified ? params.cell_size * std::sqrt(2.0) : 0.0);

    std::vector<Pose2D> predicted;
    predicted.reserve(b.size());
    double min_d2 = std::numeric_limits<double>::infinity();
    for (const Pose2D& p : b.particles) {
        predicted.push_back(noisy ? target_step(p, target_model, b.step, *rng) : target_drift(p, target_model, b.step));
        const double dx = predicted.back().x() - robot_next.x();
        const double dy = predicted.back().y() - robot_next.y();
        min_d2 = std::min(min_d2, dx * dx + dy * dy);
    }
    if (min_d2 > reach * reach) return {0.0, 0.0};

    const ParticleView full(predicted, b.weights);
    if (simplified) {
        const SimplifiedBelief s = simplify(full, params.cell_size);
        return mixture_information(build_censored_mixture(s, robot_next, fp, map, noise), params, rng);
    }
    return mixture_information(build_censored_mixture(full, robot_next, fp, map, noise), params, rng);
}

}  // namespace aspire
