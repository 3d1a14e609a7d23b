// Copyright 2026 The clickwit Authors
// SPDX-License-Identifier: Apache-2.0
#include "clickwit/detectors.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

namespace clickwit {
namespace {

double binom_pmf(int N, int k, double p) {
    return static_cast<double>(binom(N, k)) * std::pow(p, k) * std::pow(1 - p, N - k);
}

std::vector<StateSpec> test_states() {
    std::vector<StateSpec> s;
    s.push_back(coherent({0.8, 0.3}));
    s.push_back(make_cat(complex{1.1, 0}, Parity::Even));
    s.push_back(make_cat(complex{0.4, 0.9}, Parity::Odd));
    s.push_back(mixture({{0.4, coherent({1.5, 0})}, {0.6, make_cat(complex{0.7, 0}, Parity::Odd)}}));
    return s;
}

TEST(Photoelectric, CoherentIsPoisson) {
    auto cfg = DetectorConfig::photoelectric(0.6);
    StateSpec s = coherent({1.2, 0.5});
    double mean = 0.6 * std::norm(complex{1.2, 0.5});
    auto d = photo_distribution(s, cfg, 30);
    for (int n = 0; n <= 30; ++n)
        EXPECT_NEAR(d.prob(n), std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0)), 1e-14);
    EXPECT_NEAR(d.total(), 1.0, 1e-12);
    EXPECT_FALSE(d.truncated);
}

TEST(Photoelectric, SinglePhotonHalfEfficiency) {
    auto cfg = DetectorConfig::photoelectric(0.5);
    // Closed-form Fock oracle applied directly to the photon-count expressions.
    EXPECT_NEAR(fock_diagonal(1, photo_count_expr(cfg, 0)), 0.5, 1e-15);
    EXPECT_NEAR(fock_diagonal(1, photo_count_expr(cfg, 1)), 0.5, 1e-15);
    auto d = photo_distribution(vacuum(), cfg, 4);
    EXPECT_NEAR(d.prob(0), 1.0, 1e-15);
}

TEST(Photoelectric, FactorialMoments) {
    auto cfg = DetectorConfig::photoelectric(0.7);
    for (double a2 : {0.1, 1.0, 5.0}) {
        StateSpec c = coherent({std::sqrt(a2), 0});
        for (int m = 0; m < 4; ++m) EXPECT_NEAR(factorial_moment(c, cfg, m), std::pow(0.7 * a2, m), 1e-12 * std::pow(0.7 * a2, m));
        StateSpec cat = make_cat(complex{std::sqrt(a2), 0}, Parity::Even);
        EXPECT_NEAR(factorial_moment(cat, cfg, 1), 0.7 * a2 * std::tanh(a2), 1e-13);
        EXPECT_NEAR(factorial_moment(cat, cfg, 0), 1.0, 1e-14);
        auto d = photo_distribution(cat, cfg, 80);
        for (int m = 0; m < 5; ++m)
            EXPECT_NEAR(factorial_moment_from_counts(d, m), factorial_moment(cat, cfg, m),
                        1e-10 * std::max(1.0, factorial_moment(cat, cfg, m)));
    }
}

TEST(OnOff, CoherentIsBinomial) {
    for (int N : {1, 2, 5, 8}) {
        auto cfg = DetectorConfig::on_off(N, 0.8, 0.01);
        StateSpec s = coherent({0.9, -0.4});
        double p = 1 - std::exp(-(0.8 * std::norm(complex{0.9, -0.4}) / N + 0.01));
        auto d = click_distribution(s, cfg);
        for (int k = 0; k <= N; ++k) EXPECT_NEAR(d.prob(k), binom_pmf(N, k, p), 1e-14);
        for (int m = 0; m <= N; ++m) EXPECT_NEAR(click_moment(s, cfg, m), std::pow(p, m), 1e-14);
    }
}

TEST(OnOff, SinglePhotonTwoBins) {
    auto cfg = DetectorConfig::on_off(2, 1.0);
    DetectorExpressions det(cfg);
    // |1> on two bins: exactly one click.
    EXPECT_NEAR(fock_diagonal(1, det.outcome({2, 0})), 0.0, 1e-15);
    EXPECT_NEAR(fock_diagonal(1, det.outcome({1, 1})), 1.0, 1e-15);
    EXPECT_NEAR(fock_diagonal(1, det.outcome({0, 2})), 0.0, 1e-15);
    EXPECT_NEAR(fock_diagonal(1, pow(click_expr(cfg), 1)), 0.5, 1e-15);
    EXPECT_NEAR(fock_diagonal(1, pow(click_expr(cfg), 2)), 0.0, 1e-15);
    CountDistribution c;
    c.kind = CountDistribution::Kind::Single;
    c.N = 2;
    c.outcomes = {{0}, {1}, {2}};
    c.probs = {0, 1, 0};
    EXPECT_NEAR(click_moment_from_counts(c, 1), 0.5, 1e-15);
    EXPECT_NEAR(click_moment_from_counts(c, 2), 0.0, 1e-15);
    EXPECT_THROW(click_moment_from_counts(c, 3), std::domain_error);
}

TEST(OnOff, CountsRouteMatchesOperatorRoute) {
    for (int N : {2, 3, 5, 8}) {
        auto cfg = DetectorConfig::on_off(N, 0.5);
        for (const auto& s : test_states()) {
            auto c = click_distribution(s, cfg);
            EXPECT_NEAR(c.total(), 1.0, 1e-10);
            for (int m = 0; m <= N; ++m) EXPECT_NEAR(click_moment_from_counts(c, m), click_moment(s, cfg, m), 1e-12);
        }
    }
}

TEST(OnOff, DependsOnlyOnDetectedIntensity) {
    auto a = click_distribution(coherent({2.0, 0}), DetectorConfig::on_off(4, 0.25));
    auto b = click_distribution(coherent({1.0, 0}), DetectorConfig::on_off(4, 1.0));
    for (int k = 0; k <= 4; ++k) EXPECT_NEAR(a.prob(k), b.prob(k), 1e-14);
}

TEST(PNR, PovmIsComplete) {
    for (int K = 1; K <= 4; ++K) {
        auto cfg = DetectorConfig::pnr(3, K, 0.9, 0.02);
        auto povm = pnr_povm(cfg);
        ASSERT_EQ(povm.size(), static_cast<std::size_t>(K + 1));
        NOExpr sum = NOExpr::constant(0.0, cfg.rate(), cfg.offset());
        for (const auto& e : povm) sum = sum + e;
        EXPECT_TRUE(sum.is_constant());
        EXPECT_NEAR(sum.evaluate(complex{0.7, 0}).real(), 1.0, 1e-15);
        for (const auto& s : test_states()) {
            double t = 0;
            for (const auto& e : povm) t += expect(s, e);
            EXPECT_NEAR(t, 1.0, 1e-12);
        }
    }
}

TEST(PNR, KEqualsOneIsOnOff) {
    for (int N : {2, 4, 5}) {
        for (const auto& s : test_states()) {
            auto c = click_distribution(s, DetectorConfig::on_off(N, 0.5));
            auto p = pnr_distribution(s, DetectorConfig::pnr(N, 1, 0.5));
            ASSERT_EQ(p.size(), static_cast<std::size_t>(N + 1));
            for (int k = 0; k <= N; ++k) EXPECT_NEAR(p.prob({N - k, k}), c.prob(k), 1e-12);
        }
    }
}

TEST(PNR, SinglePhotonTwoBinsTwoLevels) {
    DetectorExpressions det(DetectorConfig::pnr(2, 2, 1.0));
    for (const auto& o : multinomial_outcomes(2, 2)) {
        double expected = o == Outcome{1, 1, 0} ? 1.0 : 0.0;
        EXPECT_NEAR(fock_diagonal(1, det.outcome(o)), expected, 1e-15);
    }
    auto vac = pnr_distribution(vacuum(), DetectorConfig::pnr(3, 2, 0.5));
    EXPECT_NEAR(vac.prob({3, 0, 0}), 1.0, 1e-15);
}

TEST(PNR, MomentsMatchCoherentAndOracle) {
    auto cfg = DetectorConfig::pnr(4, 2, 0.8);
    double g = 0.8 * 1.44 / 4;
    EXPECT_NEAR(pnr_moment(coherent({1.2, 0}), cfg, {0, 1, 0}), g * std::exp(-g), 1e-15);
    EXPECT_NEAR(pnr_moment(coherent({1.2, 0}), cfg, {0, 0, 0}), 1.0, 1e-15);
    StateSpec cat = make_cat(complex{1.3, 0}, Parity::Even);
    StateSpec fock = to_fock_auto(cat);
    DetectorExpressions det(cfg);
    for (const Outcome& e : std::vector<Outcome>{{1, 0, 0}, {0, 1, 1}, {2, 1, 0}, {0, 0, 2}})
        EXPECT_NEAR(pnr_moment(cat, det, e), expect_fock(fock, det.product(e)), 1e-10);
}

TEST(PNR, CountsRouteMatchesOperatorRoute) {
    auto cfg = DetectorConfig::pnr(4, 2, 0.5);
    DetectorExpressions det(cfg);
    for (const auto& s : test_states()) {
        auto c = pnr_distribution(s, det);
        EXPECT_NEAR(c.total(), 1.0, 1e-10);
        for (const Outcome& e : std::vector<Outcome>{{0, 0, 0}, {1, 0, 0}, {0, 1, 1}, {1, 1, 2}, {0, 0, 4}})
            EXPECT_NEAR(multiplexed_moment_from_counts(c, e), pnr_moment(s, det, e), 1e-12);
    }
}

TEST(PNR, OutcomeEnumeration) {
    auto o = multinomial_outcomes(4, 2);
    EXPECT_EQ(o.size(), static_cast<std::size_t>(binom(6, 2)));
    EXPECT_TRUE(std::is_sorted(o.begin(), o.end()));
    for (const auto& x : o) EXPECT_EQ(std::accumulate(x.begin(), x.end(), 0), 4);
}

TEST(Config, Validation) {
    EXPECT_THROW(DetectorConfig::on_off(4, 0.0).validate(), std::domain_error);
    EXPECT_THROW(DetectorConfig::on_off(4, 1.5).validate(), std::domain_error);
    EXPECT_THROW(DetectorConfig::on_off(0, 0.5).validate(), std::domain_error);
    EXPECT_THROW(DetectorConfig::pnr(4, 7, 0.5).validate(), std::domain_error);
    EXPECT_THROW(DetectorConfig::on_off(4, 0.5, -0.1).validate(), std::domain_error);
    EXPECT_NO_THROW(DetectorConfig::pnr(64, 1, 1.0).validate());
}

} // namespace
} // namespace clickwit
