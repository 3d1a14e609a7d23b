// Copyright 2026 The clickwit Authors
// SPDX-License-Identifier: Apache-2.0
#include "clickwit/witnesses.hpp"

#include <gtest/gtest.h>

#include <random>

namespace clickwit {
namespace {

HalfInt h(int twice) { return HalfInt::from_twice(twice); }

CountDistribution single_counts(std::vector<double> probs) {
    CountDistribution c;
    c.kind = CountDistribution::Kind::Single;
    c.N = static_cast<int>(probs.size()) - 1;
    for (int k = 0; k <= c.N; ++k) c.outcomes.push_back({k});
    c.probs = std::move(probs);
    return c;
}

CountDistribution binomial_counts(int N, double p) {
    std::vector<double> probs;
    for (int k = 0; k <= N; ++k)
        probs.push_back(static_cast<double>(binom(N, k)) * std::pow(p, k) * std::pow(1 - p, N - k));
    return single_counts(probs);
}

std::vector<std::string> labels(const IndexSet& s) {
    std::vector<std::string> out;
    for (const auto& e : s.elements) out.push_back(to_string(e));
    return out;
}

TEST(IndexSets, OnOff) {
    auto four = enumerate_index_sets(DetectorConfig::on_off(4, 0.5));
    ASSERT_EQ(four.size(), 2u);
    EXPECT_EQ(labels(four[0]), (std::vector<std::string>{"0", "1", "2"}));
    EXPECT_EQ(labels(four[1]), (std::vector<std::string>{"1/2", "3/2"}));
    auto five = enumerate_index_sets(DetectorConfig::on_off(5, 0.5));
    EXPECT_EQ(labels(five[0]), (std::vector<std::string>{"0", "1", "2"}));
    EXPECT_EQ(labels(five[1]), (std::vector<std::string>{"1/2", "3/2", "5/2"}));
}

TEST(IndexSets, MultinomialFourSets) {
    auto sets = enumerate_index_sets(DetectorConfig::pnr(4, 2, 0.5));
    ASSERT_EQ(sets.size(), 4u);
    EXPECT_EQ(sets[0].str(), "{(0,0,2),(0,1,1),(0,2,0),(1,0,1),(1,1,0),(2,0,0)}");
    EXPECT_EQ(sets[1].str(), "{(1/2,0,3/2),(1/2,1,1/2),(3/2,0,1/2)}");
    EXPECT_EQ(sets[2].str(), "{(0,1/2,3/2),(0,3/2,1/2),(1,1/2,1/2)}");
    EXPECT_EQ(sets[3].str(), "{(1/2,1/2,1),(1/2,3/2,0),(3/2,1/2,0)}");
    for (const auto& s : sets) EXPECT_NO_THROW(validate_index_set(s, DetectorConfig::pnr(4, 2, 0.5)));
}

TEST(IndexSets, MultinomialMomentPatterns) {
    auto cfg = DetectorConfig::pnr(4, 2, 0.5);
    auto sets = enumerate_index_sets(cfg, MatrixKind::Moments);
    EXPECT_EQ(sets.size(), 8u);
    for (const auto& s : sets) {
        ASSERT_FALSE(s.elements.empty()) << s.id;
        EXPECT_NO_THROW(validate_index_set(s, cfg)) << s.id;
        for (const auto& e : s.elements) {
            HalfInt total{0};
            for (HalfInt v : e) total += v;
            EXPECT_LE(total.value(), 2.0);
        }
    }
}

TEST(IndexSets, KEqualsOneMatchesOnOff) {
    auto pnr = enumerate_index_sets(DetectorConfig::pnr(5, 1, 0.5));
    auto onoff = enumerate_index_sets(DetectorConfig::on_off(5, 0.5));
    ASSERT_EQ(pnr.size(), 2u);
    // The second component of each PNR element is the click index; for odd N
    // the classes of N_0 and N_1 differ, so the two sets appear swapped.
    std::vector<std::vector<HalfInt>> pnr_clicks, onoff_clicks;
    for (std::size_t i = 0; i < 2; ++i) {
        std::vector<HalfInt> clicks, expected;
        for (const auto& e : pnr[i].elements) clicks.push_back(e[1]);
        for (const auto& e : onoff[i].elements) expected.push_back(e[0]);
        std::sort(clicks.begin(), clicks.end());
        pnr_clicks.push_back(clicks);
        onoff_clicks.push_back(expected);
    }
    std::sort(pnr_clicks.begin(), pnr_clicks.end());
    std::sort(onoff_clicks.begin(), onoff_clicks.end());
    EXPECT_EQ(pnr_clicks, onoff_clicks);
}

TEST(IndexSets, RejectsInadmissible) {
    auto cfg = DetectorConfig::on_off(4, 0.5);
    EXPECT_THROW(validate_index_set(make_index_set({HalfInt(0), h(1)}), cfg), std::domain_error);
    EXPECT_THROW(validate_index_set(make_index_set({HalfInt(0), HalfInt(3)}), cfg), std::domain_error);
    EXPECT_THROW(count_matrix(coherent({1, 0}), cfg, make_index_set({HalfInt(1), h(3)})), std::domain_error);
    try {
        validate_index_set(make_index_set({HalfInt(0), h(1)}), cfg);
    } catch (const std::domain_error& e) {
        EXPECT_NE(std::string(e.what()).find("1/2"), std::string::npos);
    }
}

TEST(CountMatrix, CoherentOnOffIsRankOne) {
    auto cfg = DetectorConfig::on_off(4, 0.7);
    auto r = count_matrix(coherent({1.1, 0}), cfg, make_index_set({HalfInt(0), HalfInt(1)}));
    EXPECT_EQ(r.matrix.dim(), 2u);
    EXPECT_NEAR(r.min_eig, 0.0, 1e-12);
    EXPECT_FALSE(r.negative);
    double p = 1 - std::exp(-0.7 * 1.21 / 4);
    EXPECT_NEAR(r.matrix(0, 1), p * std::pow(1 - p, 3), 1e-15);
}

TEST(CountMatrix, PhotoelectricDeterminant) {
    auto cfg = DetectorConfig::photoelectric(0.5);
    StateSpec s = make_cat(complex{1.0, 0}, Parity::Odd);
    auto p = photo_distribution(s, cfg, 10);
    auto r = count_matrix(s, cfg, make_index_set({HalfInt(0), HalfInt(1)}));
    EXPECT_NEAR(r.minors[1], p.prob(0) * 2 * p.prob(2) - p.prob(1) * p.prob(1), 1e-14);
}

TEST(CountMatrix, CatParityOnOffFive) {
    auto cfg = DetectorConfig::on_off(5, 0.5);
    auto sets = enumerate_index_sets(cfg);
    auto odd = count_matrix(make_cat(complex{1.0, 0}, Parity::Odd), cfg, sets[0]);
    auto even = count_matrix(make_cat(complex{1.0, 0}, Parity::Even), cfg, sets[0]);
    EXPECT_TRUE(odd.negative);
    EXPECT_FALSE(even.negative);
    // Oracle cross-check of the entries through the Fock route.
    DetectorExpressions det(cfg);
    StateSpec fock = to_fock_auto(make_cat(complex{1.0, 0}, Parity::Odd));
    for (std::size_t i = 0; i < sets[0].size(); ++i)
        for (std::size_t j = 0; j < sets[0].size(); ++j) {
            Outcome e = entry_exponents(cfg, MatrixKind::Counts, sets[0].elements[i], sets[0].elements[j]);
            EXPECT_NEAR(odd.matrix(i, j), expect_fock(fock, det.count_entry(e).expanded()), 1e-12);
        }
    bool even_half_negative = false;
    for (double a2 = 0.01; a2 < 10; a2 *= 1.2)
        even_half_negative |= count_matrix(make_cat(complex{std::sqrt(a2), 0}, Parity::Even), cfg, sets[1]).negative;
    EXPECT_TRUE(even_half_negative);
}

TEST(MomentMatrix, OnOffLayout) {
    auto cfg = DetectorConfig::on_off(4, 0.5);
    StateSpec s = make_cat(complex{0.8, 0.2}, Parity::Even);
    auto r = moment_matrix(s, cfg, enumerate_index_sets(cfg, MatrixKind::Moments)[0]);
    EXPECT_EQ(r.matrix.dim(), 3u);
    EXPECT_NEAR(r.matrix(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(r.matrix(1, 2), click_moment(s, cfg, 3), 1e-15);
    EXPECT_EQ(r.source, MatrixSource::MomentsClick);
}

TEST(MomentMatrix, PhotoelectricHalfDeterminant) {
    auto cfg = DetectorConfig::photoelectric(0.5);
    StateSpec s = make_cat(complex{1.3, 0}, Parity::Even);
    auto r = moment_matrix(s, cfg, make_index_set({h(1), h(3)}, MatrixKind::Moments));
    double m1 = factorial_moment(s, cfg, 1), m2 = factorial_moment(s, cfg, 2), m3 = factorial_moment(s, cfg, 3);
    EXPECT_NEAR(r.minors[1], m1 * m3 - m2 * m2, 1e-12);
}

TEST(MomentMatrix, CountsRouteMatchesOperatorRoute) {
    for (const auto& cfg : {DetectorConfig::on_off(5, 0.5), DetectorConfig::pnr(4, 2, 0.5)}) {
        StateSpec s = make_cat(complex{1.2, 0}, Parity::Odd);
        auto c = count_distribution(s, cfg);
        for (MatrixKind kind : {MatrixKind::Counts, MatrixKind::Moments}) {
            for (const auto& set : enumerate_index_sets(cfg, kind)) {
                if (set.empty()) continue;
                auto a = witness_matrix(s, DetectorExpressions(cfg), set);
                auto b = witness_matrix_from_counts(c, cfg, set);
                for (std::size_t i = 0; i < a.matrix.dim(); ++i)
                    for (std::size_t j = 0; j < a.matrix.dim(); ++j) EXPECT_NEAR(a.matrix(i, j), b.matrix(i, j), 1e-12);
            }
        }
    }
}

TEST(Classical, RandomCoherentMixturesArePositive) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<DetectorConfig> cfgs{DetectorConfig::on_off(4, 0.6), DetectorConfig::pnr(4, 2, 0.6),
                                     DetectorConfig::photoelectric(0.6)};
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<MixturePart> parts;
        double w1 = u(rng);
        parts.push_back({w1, coherent({g(rng), g(rng)})});
        parts.push_back({1 - w1, coherent({g(rng), g(rng)})});
        StateSpec s = mixture(parts);
        for (const auto& cfg : cfgs) {
            DetectorExpressions det(cfg);
            for (MatrixKind kind : {MatrixKind::Counts, MatrixKind::Moments})
                for (const auto& set : enumerate_index_sets(cfg, kind)) {
                    if (set.empty()) continue;
                    auto r = witness_matrix(s, det, set);
                    EXPECT_FALSE(r.negative) << set.id << " min_eig " << r.min_eig;
                }
        }
    }
}

TEST(Klyshko, CoherentSaturates) {
    for (int N = 3; N <= 10; ++N) {
        auto c = click_distribution(coherent({0.9, 0}), DetectorConfig::on_off(N, 0.8));
        auto a = klyshko_ratio(c, KlyshkoVariant::Integer);
        auto b = klyshko_ratio(c, KlyshkoVariant::Half);
        EXPECT_NEAR(a.ratio, 0.5 * (1 - 1.0 / N), 1e-12);
        EXPECT_NEAR(b.ratio, 2.0 / 3 * (1 - 1.0 / (N - 1)), 1e-12);
        EXPECT_NEAR(a.bound, 0.5 * (1 - 1.0 / N), 0.0);
    }
}

TEST(Klyshko, SinglePhotonAndIndeterminate) {
    auto r = klyshko_ratio(single_counts({0, 1, 0}), KlyshkoVariant::Integer);
    EXPECT_DOUBLE_EQ(r.ratio, 0.0);
    EXPECT_DOUBLE_EQ(r.bound, 0.25);
    EXPECT_EQ(r.verdict, Verdict::Nonclassical);
    auto v = klyshko_ratio(single_counts({1, 0, 0, 0}), KlyshkoVariant::Integer);
    EXPECT_EQ(v.verdict, Verdict::Indeterminate);
}

TEST(GFunctions, CoherentAndDeterminants) {
    auto cfg = DetectorConfig::on_off(5, 0.5);
    for (double g : g_functions(coherent({1.3, 0}), cfg, 4)) EXPECT_NEAR(g, 1.0, 1e-12);
    StateSpec s = make_cat(complex{1.1, 0}, Parity::Even);
    auto gs = g_functions(s, cfg, 3);
    EXPECT_DOUBLE_EQ(gs[1], 1.0);
    auto r01 = g_matrix(moment_matrix(s, cfg, make_index_set({HalfInt(0), HalfInt(1)}, MatrixKind::Moments)));
    EXPECT_NEAR(r01.minors[1], gs[2] - 1.0, 1e-12);
    auto rh = g_matrix(moment_matrix(s, cfg, make_index_set({h(1), h(3)}, MatrixKind::Moments)));
    EXPECT_NEAR(rh.minors[1], gs[3] - gs[2] * gs[2], 1e-12);
    EXPECT_THROW(g_functions(vacuum(), cfg, 2), std::domain_error);
}

TEST(GFunctions, CongruencePreservesSigns) {
    auto cfg = DetectorConfig::on_off(5, 0.5);
    for (double a2 : {0.05, 0.5, 1.5, 4.0}) {
        for (Parity par : {Parity::Even, Parity::Odd}) {
            for (const auto& set : enumerate_index_sets(cfg, MatrixKind::Moments)) {
                auto m = moment_matrix(make_cat(complex{std::sqrt(a2), 0}, par), cfg, set);
                auto g = g_matrix(m);
                EXPECT_EQ(m.negative, g.negative);
                for (std::size_t i = 0; i < m.minors.size(); ++i) {
                    // Minors at roundoff level carry no sign.
                    double zm = 1e-10 * std::pow(m.matrix.max_abs(), i + 1.0);
                    double zg = 1e-10 * std::pow(g.matrix.max_abs(), i + 1.0);
                    if (std::abs(m.minors[i]) > zm && std::abs(g.minors[i]) > zg) {
                        EXPECT_EQ(std::signbit(m.minors[i]), std::signbit(g.minors[i]));
                    }
                }
            }
        }
    }
}

TEST(ClickStatsTest, MappedMomentsMatchCounts) {
    std::vector<CountDistribution> cases{binomial_counts(6, 0.3),
                                         click_distribution(make_cat(complex{1.4, 0}, Parity::Odd), DetectorConfig::on_off(5, 0.5)),
                                         single_counts({0.1, 0.5, 0.1, 0.2, 0.1})};
    for (const auto& c : cases) {
        auto s = click_stats(c);
        EXPECT_NEAR(s.m1, click_moment_from_counts(c, 1), 1e-12);
        EXPECT_NEAR(s.m2, click_moment_from_counts(c, 2), 1e-12);
        EXPECT_NEAR(s.m3, click_moment_from_counts(c, 3), 1e-12);
    }
    auto b = click_stats(binomial_counts(6, 0.3));
    EXPECT_NEAR(b.m2, 0.09, 1e-14);
    EXPECT_NEAR(b.m3, 0.027, 1e-14);
    auto one = click_stats(single_counts({0, 1, 0}));
    EXPECT_DOUBLE_EQ(one.mean, 1.0);
    EXPECT_DOUBLE_EQ(one.variance, 0.0);
    EXPECT_TRUE(std::isnan(one.skewness));
}

TEST(QB, ValuesAndIdentity) {
    EXPECT_NEAR(qb_parameter(click_distribution(coherent({1.0, 0.5}), DetectorConfig::on_off(4, 0.9))).qb, 0.0, 1e-12);
    EXPECT_NEAR(qb_parameter(single_counts({0, 1, 0})).qb, -1.0, 1e-15);
    auto r = qb_parameter(click_distribution(make_cat(complex{0.9, 0}, Parity::Odd), DetectorConfig::on_off(5, 0.5)));
    EXPECT_LT(r.qb, 0.0);
    EXPECT_NEAR(r.det_moments, r.det_identity, 1e-12);
    EXPECT_THROW(qb_parameter(single_counts({1, 0, 0})), std::domain_error);
}

TEST(Skewness, RoutesAgreeAndBinomialVanishes) {
    auto b = skewness_witness(binomial_counts(7, 0.4));
    EXPECT_NEAR(b.det_moments, 0.0, 1e-12);
    EXPECT_NEAR(b.det_central, 0.0, 1e-12);
    EXPECT_NEAR(b.central2, 0.0, 1e-12);
    EXPECT_NEAR(b.central3, 0.0, 1e-12);
    auto v = skewness_witness(single_counts({1, 0, 0, 0}));
    EXPECT_NEAR(v.det_moments, 0.0, 1e-15);
    auto cfg = DetectorConfig::on_off(5, 0.5);
    bool negative = false;
    for (double a2 = 0.01; a2 < 10; a2 *= 1.3) {
        StateSpec s = make_cat(complex{std::sqrt(a2), 0}, Parity::Even);
        auto w = skewness_witness(click_distribution(s, cfg));
        EXPECT_NEAR(w.det_moments, w.det_central, 1e-12);
        auto m = moment_matrix(s, cfg, make_index_set({h(1), h(3)}, MatrixKind::Moments));
        EXPECT_NEAR(w.det_moments, m.minors[1], 1e-12);
        negative |= w.det_moments < 0;
    }
    EXPECT_TRUE(negative);
}

} // namespace
} // namespace clickwit
