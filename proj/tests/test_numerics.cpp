// Copyright 2026 The clickwit Authors
// SPDX-License-Identifier: Apache-2.0
#include "clickwit/numerics.hpp"

#include <gtest/gtest.h>

#include <random>

namespace clickwit {
namespace {

// Pascal's triangle in 128-bit, independent of the multiplicative formula.
u128 pascal(int n, int k) {
    std::vector<std::vector<u128>> t(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        t[i].assign(static_cast<std::size_t>(i) + 1, 1);
        for (int j = 1; j < i; ++j) t[i][j] = t[i - 1][j - 1] + t[i - 1][j];
    }
    return t[n][k];
}

// Number of eigenvalues below x: sign changes in the leading minors of A - xI.
int count_below(const SymMatrix& a, double x) {
    SymMatrix s = a;
    for (std::size_t i = 0; i < a.dim(); ++i) s.set(i, i, a(i, i) - x);
    // LDL^T pivots without pivoting; negative pivots count eigenvalues below x.
    const std::size_t n = a.dim();
    std::vector<double> m(s.entries().begin(), s.entries().end());
    int neg = 0;
    for (std::size_t c = 0; c < n; ++c) {
        double d = m[c * n + c];
        if (d == 0.0) d = -1e-300;
        if (d < 0) ++neg;
        for (std::size_t r = c + 1; r < n; ++r) {
            double f = m[r * n + c] / d;
            for (std::size_t j = c; j < n; ++j) m[r * n + j] -= f * m[c * n + j];
        }
    }
    return neg;
}

double bisection_min_eig(const SymMatrix& a) {
    double lo = -1e3, hi = 1e3;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (count_below(a, mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

SymMatrix random_symmetric(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) m.set(i, j, u(rng));
    return m;
}

TEST(Combinatorics, BinomialValues) {
    EXPECT_EQ(binom(4, 2), 6u);
    EXPECT_EQ(binom(5, 0), 1u);
    // math.comb(64, 32)
    EXPECT_EQ(binom(64, 32), 1832624140942590534ull);
    for (int n = 0; n <= 64; n += 7)
        for (int k = 0; k <= n; ++k) EXPECT_TRUE(static_cast<u128>(binom(n, k)) == pascal(n, k)) << n << "," << k;
}

TEST(Combinatorics, BinomialRejectsOutOfRange) {
    EXPECT_THROW(binom(3, 4), std::domain_error);
    EXPECT_THROW(binom(65, 1), std::domain_error);
    EXPECT_THROW(binom(-1, 0), std::domain_error);
}

TEST(Combinatorics, Multinomial) {
    EXPECT_TRUE(multinom(4, {4, 0, 0}) == 1);
    EXPECT_TRUE(multinom(4, {2, 1, 1}) == 12);
    EXPECT_TRUE(multinom(4, {1, 1, 2}) == 12);
    EXPECT_THROW(multinom(4, {1, 1, 1}), std::domain_error);
    // 64!/(32! 32!) agrees with binom; 64 singletons overflow 128 bits.
    EXPECT_TRUE(multinom(64, {32, 32}) == binom(64, 32));
    std::vector<int> ones(64, 1);
    EXPECT_THROW(multinom(64, ones), std::overflow_error);
}

TEST(HalfIntTest, Arithmetic) {
    HalfInt a = HalfInt::from_twice(1), b = HalfInt::from_twice(3);
    EXPECT_FALSE(a.is_integer());
    EXPECT_TRUE((a + b).is_integer());
    EXPECT_EQ((a + b).to_integer(), 2);
    EXPECT_EQ(a.str(), "1/2");
    EXPECT_EQ(HalfInt(3).str(), "3");
    EXPECT_EQ(parse_half_int("5/2"), HalfInt::from_twice(5));
    EXPECT_EQ(parse_half_int("1.5"), HalfInt::from_twice(3));
    EXPECT_THROW(parse_half_int("0.3"), std::invalid_argument);
    EXPECT_THROW(a.to_integer(), std::domain_error);
}

TEST(HalfIntTest, AdditionIsAssociativeAndCommutative) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> d(0, 40);
    for (int i = 0; i < 500; ++i) {
        HalfInt a = HalfInt::from_twice(d(rng)), b = HalfInt::from_twice(d(rng)), c = HalfInt::from_twice(d(rng));
        EXPECT_EQ((a + b) + c, a + (b + c));
        EXPECT_EQ(a + b, b + a);
        EXPECT_EQ(HalfInt::from_twice(a.twice()), a);
        EXPECT_EQ((a + b).is_integer(), a.is_integer() == b.is_integer());
    }
}

TEST(Eigen, SmallExamples) {
    EXPECT_NEAR(min_eigenvalue(SymMatrix::identity(3)), 1.0, 1e-15);
    EXPECT_NEAR(min_eigenvalue(SymMatrix::from_rows({{1, 1}, {1, 1}})), 0.0, 1e-15);
    EXPECT_NEAR(min_eigenvalue(SymMatrix::from_rows({{2, 1}, {1, 2}})), 1.0, 1e-15);
}

TEST(Eigen, MatchesBisectionOracle) {
    std::mt19937_64 rng(2026);
    for (int trial = 0; trial < 20; ++trial) {
        SymMatrix a = random_symmetric(rng, 5);
        EXPECT_NEAR(min_eigenvalue(a), bisection_min_eig(a), 1e-10);
    }
    SymMatrix big = random_symmetric(rng, 16);
    EXPECT_NEAR(min_eigenvalue(big), bisection_min_eig(big), 1e-10);
}

TEST(Eigen, GramMatricesArePositive) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 2 + trial % 10, r = 1 + trial % 4;
        std::vector<double> G(n * r);
        for (double& v : G) v = g(rng);
        SymMatrix a(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                double s = 0;
                for (std::size_t q = 0; q < r; ++q) s += G[i * r + q] * G[j * r + q];
                a.set(i, j, s);
            }
        EXPECT_GE(min_eigenvalue(a), -1e-10);
    }
}

TEST(Eigen, BoundedByDiagonalAndConsistentWithMinors) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        SymMatrix a = random_symmetric(rng, 1 + trial % 8);
        double lam = min_eigenvalue(a);
        for (std::size_t i = 0; i < a.dim(); ++i) EXPECT_LE(lam, a(i, i) + 1e-14);
        auto minors = leading_minors(a);
        if (std::all_of(minors.begin(), minors.end(), [](double d) { return d > 0; })) {
            EXPECT_GT(lam, -1e-10);
        }
    }
}

TEST(Eigen, RejectsNonFinite) {
    SymMatrix a(2);
    a.set(0, 1, std::nan(""));
    EXPECT_THROW(min_eigenvalue(a), std::domain_error);
    EXPECT_THROW(leading_minors(a), std::domain_error);
}

TEST(Minors, Examples) {
    auto id = leading_minors(SymMatrix::identity(3));
    EXPECT_EQ(id, (std::vector<double>{1, 1, 1}));
    auto m = leading_minors(SymMatrix::from_rows({{2, 1}, {1, 2}}));
    EXPECT_DOUBLE_EQ(m[0], 2);
    EXPECT_DOUBLE_EQ(m[1], 3);
    auto d = leading_minors(SymMatrix::from_rows({{1, 0}, {0, -1}}));
    EXPECT_DOUBLE_EQ(d[0], 1);
    EXPECT_DOUBLE_EQ(d[1], -1);
}

} // namespace
} // namespace clickwit
