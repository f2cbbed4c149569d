#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "netscale/scaling_fit.hpp"

using namespace netscale;

namespace {

std::vector<FitPoint> power_points(double a, double b, std::vector<double> ns) {
    std::vector<FitPoint> pts;
    for (double n : ns) pts.push_back({n, a * std::pow(n, b)});
    return pts;
}

std::vector<FitPoint> log_points(double a, double b, std::vector<double> ns) {
    std::vector<FitPoint> pts;
    for (double n : ns) pts.push_back({n, a + b * std::log10(n)});
    return pts;
}

}  // namespace

TEST(PowerLaw, NoiselessRecovery) {
    auto fit = fit_power_law(power_points(2, 0.5, {10, 100, 1000}));
    EXPECT_NEAR(fit.a, 2.0, 1e-9);
    EXPECT_NEAR(fit.b, 0.5, 1e-9);
    EXPECT_EQ(fit.points_used, 3u);
    EXPECT_EQ(fit.form, FitForm::power_law);
    EXPECT_NEAR(fit(10000), 200.0, 1e-6);
}

TEST(PowerLaw, NegativeExponent) {
    auto fit = fit_power_law(power_points(0.3, -1.0, {50, 500, 5000, 50000}));
    EXPECT_NEAR(fit.a, 0.3, 1e-9);
    EXPECT_NEAR(fit.b, -1.0, 1e-9);
}

TEST(Logarithmic, NoiselessRecovery) {
    auto fit = fit_logarithmic(log_points(1, 2, {10, 100, 1000}));
    EXPECT_NEAR(fit.a, 1.0, 1e-9);
    EXPECT_NEAR(fit.b, 2.0, 1e-9);
}

TEST(Logarithmic, ConstantData) {
    std::vector<FitPoint> pts{{10, 0.5}, {100, 0.5}, {1000, 0.5}};
    auto fit = fit_logarithmic(pts);
    EXPECT_NEAR(fit.a, 0.5, 1e-12);
    EXPECT_NEAR(fit.b, 0.0, 1e-12);
}

TEST(Logarithmic, NegativeValuesAllowed) {
    auto fit = fit_logarithmic(log_points(-0.2, -0.05, {30, 300, 3000}));
    EXPECT_NEAR(fit.a, -0.2, 1e-9);
    EXPECT_NEAR(fit.b, -0.05, 1e-9);
    EXPECT_EQ(fit.points_excluded, 0u);
}

TEST(Covariance, PowerLawScale) {
    std::mt19937_64 rng(3);
    std::lognormal_distribution<double> noise(0, 0.3);
    std::vector<FitPoint> pts;
    for (double n = 10; n < 1e6; n *= 2.7) pts.push_back({n, 1.7 * std::pow(n, 0.2) * noise(rng)});
    auto base = fit_power_law(pts);
    for (double c : {0.01, 3.0, 250.0}) {
        auto scaled = pts;
        for (auto& p : scaled) *p.y *= c;
        auto fit = fit_power_law(scaled);
        EXPECT_NEAR(fit.a / base.a, c, 1e-12 * c);
        EXPECT_NEAR(fit.b, base.b, 1e-12);
    }
}

TEST(Covariance, LogarithmicShift) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> noise(0, 0.2);
    std::vector<FitPoint> pts;
    for (double n = 10; n < 1e6; n *= 3.1) pts.push_back({n, 2 + 0.6 * std::log10(n) + noise(rng)});
    auto base = fit_logarithmic(pts);
    for (double c : {-5.0, 0.25, 40.0}) {
        auto shifted = pts;
        for (auto& p : shifted) *p.y += c;
        auto fit = fit_logarithmic(shifted);
        EXPECT_NEAR(fit.a, base.a + c, 1e-12 * (1 + std::abs(c)));
        EXPECT_NEAR(fit.b, base.b, 1e-12);
    }
}

TEST(Exclusions, CountedByReason) {
    std::vector<FitPoint> pts{{10, 1.0}, {100, 2.0}, {1000, std::nullopt}, {0, 3.0}, {5000, 0.0}, {8000, -1.0}};
    auto fit = fit_power_law(pts);
    EXPECT_EQ(fit.points_used, 2u);
    EXPECT_EQ(fit.points_excluded, 4u);
    EXPECT_EQ(fit.exclusion_reasons.at("undefined"), 1u);
    EXPECT_EQ(fit.exclusion_reasons.at("non-positive-n"), 1u);
    EXPECT_EQ(fit.exclusion_reasons.at("non-positive-y"), 2u);

    auto lin = fit_logarithmic(pts);
    EXPECT_EQ(lin.points_used, 4u);
    EXPECT_EQ(lin.points_excluded, 2u);
    EXPECT_FALSE(lin.exclusion_reasons.count("non-positive-y"));
}

TEST(Errors, InsufficientAndDegenerate) {
    std::vector<FitPoint> one{{10, 1.0}};
    EXPECT_THROW(fit_power_law(one), InsufficientDataError);
    std::vector<FitPoint> none;
    EXPECT_THROW(fit_logarithmic(none), InsufficientDataError);
    std::vector<FitPoint> undefined{{10, std::nullopt}, {100, std::nullopt}, {1000, 2.0}};
    EXPECT_THROW(fit_logarithmic(undefined), InsufficientDataError);
    std::vector<FitPoint> same_n{{100, 1.0}, {100, 2.0}, {100, 3.0}};
    EXPECT_THROW(fit_power_law(same_n), DegenerateDesignError);
    EXPECT_THROW(bootstrap_sd(same_n, FitForm::power_law, 10, 0), DegenerateDesignError);
}

TEST(Bootstrap, NoiselessHasZeroSpread) {
    auto fit = fit_with_bootstrap(power_points(2, 0.5, {10, 100, 1000, 10000}), FitForm::power_law, 2000, 7);
    EXPECT_LT(fit.sd_a, 1e-9);
    EXPECT_LT(fit.sd_b, 1e-9);
    EXPECT_EQ(fit.resamples, 2000u);
    auto lin = fit_with_bootstrap(log_points(1, 2, {10, 100, 1000}), FitForm::logarithmic, 2000, 7);
    EXPECT_LT(lin.sd_a, 1e-9);
    EXPECT_LT(lin.sd_b, 1e-9);
}

TEST(Bootstrap, TwoPoints) {
    std::vector<FitPoint> pts{{10, 1.0}, {1000, 2.5}};
    auto [sa, sb] = bootstrap_sd(pts, FitForm::logarithmic, 500, 11);
    EXPECT_TRUE(std::isfinite(sa));
    EXPECT_TRUE(std::isfinite(sb));
    // Every non-degenerate resample contains both points, so the line is fixed.
    EXPECT_LT(sb, 1e-9);
    auto again = bootstrap_sd(pts, FitForm::logarithmic, 500, 11);
    EXPECT_EQ(again.first, sa);
    EXPECT_EQ(again.second, sb);
}

TEST(Bootstrap, ReproducibleAndSeedSensitive) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> noise(0, 0.1);
    std::vector<FitPoint> pts;
    for (int i = 0; i < 30; ++i) {
        double n = std::pow(10.0, 2 + 4 * i / 29.0);
        pts.push_back({n, 4 + 0.5 * std::log10(n) + noise(rng)});
    }
    auto a = bootstrap_sd(pts, FitForm::logarithmic, 1000, 5);
    auto b = bootstrap_sd(pts, FitForm::logarithmic, 1000, 5);
    auto c = bootstrap_sd(pts, FitForm::logarithmic, 1000, 6);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_GT(a.second, 0.0);
}

TEST(Bootstrap, NoisyRecoveryCoverage) {
    const double a = 4.2, b = 0.13;
    std::mt19937_64 rng(2025);
    std::uniform_real_distribution<double> log_n(2, 6);
    std::normal_distribution<double> noise(0, 0.1);
    int covered = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        std::vector<FitPoint> pts;
        for (int i = 0; i < 200; ++i) {
            double n = std::pow(10.0, log_n(rng));
            pts.push_back({n, a * std::pow(n, b) * std::exp(noise(rng))});
        }
        auto fit = fit_with_bootstrap(pts, FitForm::power_law, 1000, 100 + t);
        if (std::abs(fit.b - b) <= 3 * fit.sd_b) ++covered;
    }
    EXPECT_GE(covered, 95);
}
