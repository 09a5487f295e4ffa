#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "aspire/info.hpp"

using namespace aspire;

namespace {

constexpr double kLn2 = 0.69314718055994530942;

Mat2 diag2(double a, double b) { return Vec2(a, b).asDiagonal(); }

MeasurementMixture single(const Vec2& mu, const Mat2& sigma, double w = 1.0) {
    MeasurementMixture m;
    m.covariance = sigma;
    m.means = {mu};
    m.weights = {w};
    m.empty_mass = 1.0 - w;
    return m;
}

// Random visible mixture with normalised weights, components spread over a few sigma.
MeasurementMixture random_mixture(std::mt19937_64& rng, int n, double spread) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g;
    MeasurementMixture m;
    m.covariance = diag2(0.5, 0.05);
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        m.means.emplace_back(3.0 + spread * std::sqrt(0.5) * g(rng), spread * std::sqrt(0.05) * g(rng));
        m.weights.push_back(0.05 + u(rng));
        total += m.weights.back();
    }
    for (double& w : m.weights) w /= total;
    m.empty_mass = 0.0;
    return m;
}

double weight_entropy(const std::vector<double>& w) {
    double h = 0.0;
    for (double x : w) h -= x > 0.0 ? x * std::log(x) : 0.0;
    return h;
}

}  // namespace

TEST(GaussianEntropy, KnownValues) {
    // (m/2)(1 + log 2 pi) + (1/2) log det, computed by hand.
    EXPECT_NEAR(gaussian_entropy_h0<2>(diag2(0.5, 0.05)), 0.993437, 1e-6);
    EXPECT_NEAR(gaussian_entropy_h0<2>(diag2(1.0, 0.01)), 0.535292, 1e-6);
    EXPECT_NEAR(0.7 * gaussian_entropy_h0<2>(diag2(0.5, 0.05)), 0.695406, 1e-6);
    Eigen::Matrix<double, 1, 1> one;
    one << 1.0;
    EXPECT_NEAR(gaussian_entropy_h0<1>(one), 0.5 * std::log(2.0 * 3.14159265358979323846 * std::exp(1.0)), 1e-12);
}

TEST(GaussianEntropy, RejectsSingularCovariance) {
    EXPECT_THROW((void)gaussian_entropy_h0<2>(diag2(1.0, 0.0)), InvalidInput);
}

TEST(SigmaPoints, OneDimensionalStandardNormal) {
    Eigen::Matrix<double, 1, 1> mu, s;
    mu << 0.0;
    s << 1.0;
    const auto set = sigma_points<1>(mu, s, 2.0);
    EXPECT_DOUBLE_EQ(set.points[0](0), 0.0);
    EXPECT_NEAR(set.points[1](0), std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(set.points[2](0), -std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(set.weights[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(set.weights[1], 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(set.weights[2], 1.0 / 6.0, 1e-15);
}

TEST(SigmaPoints, MatchFirstTwoMoments) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        Mat2 a;
        a << u(rng), u(rng), u(rng), u(rng);
        const Mat2 sigma = a * a.transpose() + 0.1 * Mat2::Identity();
        const Vec2 mu(5 * u(rng), 5 * u(rng));
        const double lambda = -0.9 + 5.0 * (u(rng) + 1.0);
        const auto set = sigma_points<2>(mu, sigma, lambda);
        Vec2 m = Vec2::Zero();
        double wsum = 0.0;
        for (int l = 0; l < 5; ++l) {
            m += set.weights[l] * set.points[l];
            wsum += set.weights[l];
        }
        Mat2 c = Mat2::Zero();
        for (int l = 0; l < 5; ++l) c += set.weights[l] * (set.points[l] - m) * (set.points[l] - m).transpose();
        EXPECT_NEAR(wsum, 1.0, 1e-12);
        EXPECT_LT((m - mu).norm(), 1e-12);
        EXPECT_LT((c - sigma).norm(), 1e-10);
    }
}

TEST(EntropySp, SingleGaussianIsExact) {
    const Mat2 s = diag2(0.5, 0.05);
    EXPECT_NEAR(entropy_sp<2>(single(Vec2(3, 0.1), s), 1.0), gaussian_entropy_h0<2>(s), 1e-12);
}

TEST(EntropySp, EmptyAtomAddsBinaryEntropy) {
    // w = 0.7 visible, e = 0.3: H = -e log e - w log w + w H0, so MI = -e log e - w log w.
    const Mat2 s = diag2(0.5, 0.05);
    const auto m = single(Vec2(3, 0), s, 0.7);
    const double h0 = gaussian_entropy_h0<2>(s);
    const double expected = -0.3 * std::log(0.3) - 0.7 * std::log(0.7) + 0.7 * h0;
    EXPECT_NEAR(entropy_sp<2>(m, 1.0), expected, 1e-12);
    EXPECT_NEAR(entropy_sp<2>(m, 1.0) - conditional_entropy<2>(m), 0.610864, 1e-6);
}

TEST(EntropySp, AllEmptyIsZero) {
    MeasurementMixture m;
    m.covariance = diag2(0.5, 0.05);
    EXPECT_EQ(entropy_sp<2>(m, 1.0), 0.0);
}

TEST(EntropySp, RejectsDegenerateSpread) {
    EXPECT_THROW((void)entropy_sp<2>(single(Vec2(1, 0), diag2(1, 1)), -2.0), InvalidInput);
}

TEST(EntropyMc, SingleGaussianWithinThreeStandardErrors) {
    std::mt19937_64 rng(10);
    const Mat2 s = diag2(0.5, 0.05);
    const auto est = entropy_mc<2>(single(Vec2(2, 0.3), s), 100000, rng);
    EXPECT_GT(est.standard_error, 0.0);
    EXPECT_NEAR(est.value, gaussian_entropy_h0<2>(s), 3.0 * est.standard_error);
}

TEST(EntropyMc, WellSeparatedPairAddsLogTwo) {
    std::mt19937_64 rng(11);
    MeasurementMixture m;
    m.covariance = diag2(0.5, 0.05);
    m.means = {Vec2(1, 0), Vec2(50, 0)};
    m.weights = {0.5, 0.5};
    m.empty_mass = 0.0;
    const auto est = entropy_mc<2>(m, 100000, rng);
    EXPECT_NEAR(est.value, gaussian_entropy_h0<2>(m.covariance) + kLn2, 3.0 * est.standard_error + 1e-9);
    EXPECT_NEAR(entropy_sp<2>(m, 1.0), gaussian_entropy_h0<2>(m.covariance) + kLn2, 1e-9);
}

TEST(EntropyTaylor, ZerothOrderMissesExactlyHalfTheDimension) {
    const Mat2 s = diag2(0.3, 0.02);
    const auto m = single(Vec2(2, -0.2), s);
    EXPECT_NEAR(gaussian_entropy_h0<2>(s) - entropy_taylor0<2>(m), 1.0, 1e-12);
    EXPECT_NEAR(entropy_taylor2<2>(m), gaussian_entropy_h0<2>(s), 1e-12);
}

TEST(EntropyTaylor, SecondOrderUsuallyBeatsZerothOrder) {
    std::mt19937_64 rng(21);
    std::mt19937_64 mc_rng(22);
    int wins = 0;
    for (int t = 0; t < 100; ++t) {
        const auto m = random_mixture(rng, 6, 1.5);
        const double oracle = entropy_mc<2>(m, 20000, mc_rng).value;
        if (std::abs(entropy_taylor2<2>(m) - oracle) < std::abs(entropy_taylor0<2>(m) - oracle)) ++wins;
    }
    EXPECT_GE(wins, 80);
}

TEST(EntropyBounds, EstimatorsRespectMixtureBounds) {
    std::mt19937_64 rng(31);
    std::mt19937_64 mc_rng(32);
    std::uniform_int_distribution<int> n(1, 20);
    for (int t = 0; t < 40; ++t) {
        const auto m = random_mixture(rng, n(rng), 2.0);
        const double h0 = gaussian_entropy_h0<2>(m.covariance);
        const double hw = weight_entropy(m.weights);
        const auto mc = entropy_mc<2>(m, 20000, mc_rng);
        EXPECT_GE(mc.value, h0 - 3.0 * mc.standard_error);
        EXPECT_LE(mc.value, h0 + hw + 3.0 * mc.standard_error);
        const double sp = entropy_sp<2>(m, 1.0);
        EXPECT_GE(sp, h0 - 0.1);
        EXPECT_LE(sp, h0 + hw + 0.1);
    }
}

TEST(BuildCensoredMixture, SplitsByVisibility) {
    const SensorFootprint fp{1.0, 6.0, kPi / 4};
    const ObstacleMap map(Bounds{-10, -10, 10, 10});
    const auto noise = MeasurementNoise::diagonal(0.5, 0.05);
    const std::vector<Pose2D> particles{Pose2D(3, 0, 0), Pose2D(-3, 0, 0), Pose2D(0, 4, 0)};
    const std::vector<double> weights{0.5, 0.3, 0.2};
    const auto mix = build_censored_mixture(ParticleView(particles, weights), Pose2D(0, 0, 0), fp, map, noise);
    ASSERT_EQ(mix.size(), 1u);
    EXPECT_DOUBLE_EQ(mix.weights[0], 0.5);
    EXPECT_NEAR(mix.empty_mass, 0.5, 1e-15);
    EXPECT_NEAR(mix.means[0].x(), 3.0, 1e-15);
    EXPECT_NEAR(mix.means[0].y(), 0.0, 1e-15);
    EXPECT_NO_THROW(mix.validate());
}

class MutualInformationTest : public ::testing::Test {
protected:
    SensorFootprint fp{1.0, 6.0, kPi / 4};
    ObstacleMap map{Bounds{-50, -50, 50, 50}};
    MeasurementNoise noise = MeasurementNoise::diagonal(0.5, 0.05);
    TargetModel still = TargetModel::constant_velocity(0.0, 0.5, MotionNoise());
    RewardParams params{MiEstimator::sigma_point, 1.0, 0.5, 1000};

    ParticleBelief belief(std::vector<Pose2D> ps) const {
        ParticleBelief b;
        b.robot = Pose2D(0, 0, 0);
        b.weights.assign(ps.size(), 1.0 / static_cast<double>(ps.size()));
        b.particles = std::move(ps);
        return b;
    }

    double mi(const ParticleBelief& b) const {
        return mutual_information(b, ControlInput{0, 0}, 0.5, still, fp, map, noise, params).value;
    }
};

TEST_F(MutualInformationTest, BeyondRangeIsExactlyZero) {
    EXPECT_EQ(mi(belief({Pose2D(30, 0, 0), Pose2D(0, -40, 0)})), 0.0);
}

TEST_F(MutualInformationTest, SingleVisibleParticleCarriesNoInformation) {
    EXPECT_NEAR(mi(belief({Pose2D(3, 0, 0)})), 0.0, 1e-12);
}

TEST_F(MutualInformationTest, HalfVisibleIsOneBit) {
    // One particle in view, one behind: the observation only reveals which.
    EXPECT_NEAR(mi(belief({Pose2D(3, 0, 0), Pose2D(-3, 0, 0)})), kLn2, 1e-12);
}

TEST_F(MutualInformationTest, WellSeparatedVisiblePairIsAboutOneBit) {
    // 4 m apart in range is ~5.7 sigma, so the overlap costs only a fraction of a millinat.
    const double v = mi(belief({Pose2D(1.5, 0, 0), Pose2D(5.5, 0, 0)}));
    EXPECT_LT(v, kLn2);
    EXPECT_NEAR(v, kLn2, 1e-3);
}

TEST_F(MutualInformationTest, NonNegativeOnRandomBeliefs) {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> g;
    for (int t = 0; t < 200; ++t) {
        std::vector<Pose2D> ps;
        const Vec2 c(3.0 + 2.0 * g(rng), 2.0 * g(rng));
        for (int j = 0; j < 40; ++j) ps.emplace_back(c.x() + g(rng), c.y() + g(rng), 0.0);
        EXPECT_GE(mi(belief(ps)), -1e-9);
    }
}

TEST_F(MutualInformationTest, SimplifiedStaysCloseToFull) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g;
    RewardParams simple = params;
    simple.estimator = MiEstimator::sigma_point_simplified;
    simple.cell_size = 0.1;
    int compared = 0;
    for (int t = 0; t < 50; ++t) {
        std::vector<Pose2D> ps;
        for (int j = 0; j < 300; ++j) ps.emplace_back(3.5 + g(rng), g(rng), 0.0);
        const auto b = belief(ps);
        const double full = mi(b);
        const double approx = mutual_information(b, ControlInput{0, 0}, 0.5, still, fp, map, noise, simple).value;
        if (full < 0.05) continue;
        EXPECT_LT(std::abs(approx - full) / full, 0.10);
        ++compared;
    }
    EXPECT_GT(compared, 40);
}

TEST_F(MutualInformationTest, MonteCarloNeedsGenerator) {
    params.estimator = MiEstimator::monte_carlo;
    EXPECT_THROW((void)mi(belief({Pose2D(3, 0, 0), Pose2D(4, 0, 0)})), InvalidInput);
}

TEST(MiEstimator, NamesRoundTrip) {
    for (auto e : {MiEstimator::sigma_point, MiEstimator::sigma_point_simplified, MiEstimator::monte_carlo,
                   MiEstimator::taylor0, MiEstimator::taylor2}) {
        EXPECT_EQ(parse_estimator(to_string(e)), e);
    }
    EXPECT_THROW((void)parse_estimator("exact"), InvalidInput);
}
