// Copyright 2026 The clickwit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exact combinatorics, half-integer arithmetic and small dense symmetric
// linear algebra shared by all witness builders.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace clickwit {

using u128 = unsigned __int128;

//---------------------------------------------------------------------------//
// HalfInt
//---------------------------------------------------------------------------//

/// Exact element of (1/2)Z, stored as twice its value.
class HalfInt {
  public:
    constexpr HalfInt() = default;
    constexpr explicit HalfInt(std::int64_t whole) : twice_(2 * whole) {}

    static constexpr HalfInt from_twice(std::int64_t twice) {
        HalfInt h;
        h.twice_ = twice;
        return h;
    }

    constexpr std::int64_t twice() const { return twice_; }
    constexpr bool is_integer() const { return twice_ % 2 == 0; }
    constexpr bool is_half_odd() const { return !is_integer(); }
    constexpr double value() const { return 0.5 * static_cast<double>(twice_); }

    /// Integer value; throws if the value is a half-odd number.
    std::int64_t to_integer() const {
        if (!is_integer())
            throw std::domain_error("HalfInt " + str() + " is not a whole integer");
        return twice_ / 2;
    }

    constexpr HalfInt operator+(HalfInt o) const { return from_twice(twice_ + o.twice_); }
    constexpr HalfInt operator-(HalfInt o) const { return from_twice(twice_ - o.twice_); }
    constexpr HalfInt operator-() const { return from_twice(-twice_); }
    constexpr HalfInt& operator+=(HalfInt o) {
        twice_ += o.twice_;
        return *this;
    }
    constexpr auto operator<=>(const HalfInt&) const = default;

    std::string str() const {
        if (is_integer()) return std::to_string(twice_ / 2);
        return std::to_string(twice_) + "/2";
    }

  private:
    std::int64_t twice_ = 0;
};

/// Parses "3", "3/2" or "1.5".
inline HalfInt parse_half_int(const std::string& text) {
    auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            if (text.substr(slash + 1) != "2")
                throw std::invalid_argument("denominator must be 2");
            long long num = std::stoll(text.substr(0, slash));
            return HalfInt::from_twice(num);
        }
        double v = std::stod(text);
        double tw = 2.0 * v;
        if (tw != std::round(tw)) throw std::invalid_argument("not a multiple of 1/2");
        return HalfInt::from_twice(static_cast<std::int64_t>(std::llround(tw)));
    } catch (const std::logic_error&) {
        throw std::invalid_argument("cannot parse half-integer '" + text + "'");
    }
}

//---------------------------------------------------------------------------//
// Combinatorics
//---------------------------------------------------------------------------//

inline constexpr int kMaxCombinatoricN = 64;

/// Exact binomial coefficient C(n, k) for k <= n <= 64.
inline std::uint64_t binom(int n, int k) {
    if (n < 0 || k < 0 || k > n || n > kMaxCombinatoricN)
        throw std::domain_error("binom(" + std::to_string(n) + "," + std::to_string(k) +
                                ") outside 0 <= k <= n <= 64");
    k = std::min(k, n - k);
    // r * (n-k+i) / i stays exact: the running product is C(n-k+i, i) * i.
    u128 r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<u128>(n - k + i) / static_cast<u128>(i);
    return static_cast<std::uint64_t>(r);
}

/// Exact multinomial coefficient N!/(parts_0! ... parts_K!). Throws
/// std::overflow_error if the value exceeds 128 bits.
inline u128 multinom(int n, std::span<const int> parts) {
    if (n < 0 || n > kMaxCombinatoricN)
        throw std::domain_error("multinom: N must lie in [0, 64]");
    long sum = 0;
    for (int p : parts) {
        if (p < 0) throw std::domain_error("multinom: negative part");
        sum += p;
    }
    if (sum != n) throw std::domain_error("multinom: parts do not sum to N");
    u128 result = 1;
    int running = 0;
    for (int p : parts) {
        running += p;
        u128 next;
        if (__builtin_mul_overflow(result, static_cast<u128>(binom(running, p)), &next))
            throw std::overflow_error("multinom: value exceeds 128 bits");
        result = next;
    }
    return result;
}

inline u128 multinom(int n, std::initializer_list<int> parts) {
    return multinom(n, std::span<const int>(parts.begin(), parts.size()));
}

inline double to_double(u128 v) { return static_cast<double>(v); }

inline std::string to_string(u128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    return {s.rbegin(), s.rend()};
}

/// n! as a double; exact up to 22!.
inline double factorial(int n) {
    if (n < 0) throw std::domain_error("factorial of negative number");
    return std::tgamma(static_cast<double>(n) + 1.0);
}

//---------------------------------------------------------------------------//
// SymMatrix
//---------------------------------------------------------------------------//

inline constexpr std::size_t kMaxWitnessDim = 64;

/// Dense real symmetric matrix, row-major. Symmetry is enforced by set().
class SymMatrix {
  public:
    explicit SymMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {
        if (dim == 0) throw std::domain_error("SymMatrix dimension must be positive");
    }

    static SymMatrix identity(std::size_t dim) {
        SymMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m.set(i, i, 1.0);
        return m;
    }

    /// Builds from a row-major square array; the upper triangle is mirrored.
    static SymMatrix from_rows(const std::vector<std::vector<double>>& rows) {
        SymMatrix m(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size()) throw std::domain_error("matrix is not square");
            for (std::size_t j = i; j < rows.size(); ++j) m.set(i, j, rows[i][j]);
        }
        return m;
    }

    std::size_t dim() const { return dim_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        data_[i * dim_ + j] = v;
        data_[j * dim_ + i] = v;
    }
    std::span<const double> entries() const { return data_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

  private:
    std::size_t dim_;
    std::vector<double> data_;
};

namespace detail {

inline void check_witness_matrix(const SymMatrix& m, const char* who) {
    if (m.dim() > kMaxWitnessDim)
        throw std::domain_error(std::string(who) + ": dimension exceeds " +
                                std::to_string(kMaxWitnessDim));
    if (!m.all_finite()) throw std::domain_error(std::string(who) + ": non-finite entry");
}

/// Determinant of the leading k x k block by LU with partial pivoting.
inline double leading_det(const SymMatrix& m, std::size_t k) {
    std::vector<double> a(k * k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) a[i * k + j] = m(i, j);
    double det = 1.0;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < k; ++r)
            if (std::abs(a[r * k + c]) > std::abs(a[piv * k + c])) piv = r;
        if (a[piv * k + c] == 0.0) return 0.0;
        if (piv != c) {
            for (std::size_t j = 0; j < k; ++j) std::swap(a[c * k + j], a[piv * k + j]);
            det = -det;
        }
        double d = a[c * k + c];
        det *= d;
        for (std::size_t r = c + 1; r < k; ++r) {
            double f = a[r * k + c] / d;
            if (f == 0.0) continue;
            for (std::size_t j = c; j < k; ++j) a[r * k + j] -= f * a[c * k + j];
        }
    }
    return det;
}

} // namespace detail

/// All eigenvalues, ascending, by cyclic Jacobi rotations.
inline std::vector<double> eigenvalues(const SymMatrix& m) {
    detail::check_witness_matrix(m, "eigenvalues");
    const std::size_t n = m.dim();
    std::vector<double> a(m.entries().begin(), m.entries().end());
    auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

    // Scale to unit max-abs so the convergence threshold is relative.
    const double scale = m.max_abs();
    if (scale == 0.0) return std::vector<double>(n, 0.0);
    for (double& v : a) v /= scale;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
        if (off < 1e-36) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = at(k, p);
                    const double akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = at(p, k);
                    const double aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
                at(p, q) = 0.0;
                at(q, p) = 0.0;
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = at(i, i) * scale;
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline double min_eigenvalue(const SymMatrix& m) { return eigenvalues(m).front(); }

/// Determinants of the top-left 1x1, 2x2, ..., dim x dim blocks.
inline std::vector<double> leading_minors(const SymMatrix& m) {
    detail::check_witness_matrix(m, "leading_minors");
    std::vector<double> out;
    out.reserve(m.dim());
    for (std::size_t k = 1; k <= m.dim(); ++k) out.push_back(detail::leading_det(m, k));
    return out;
}

} // namespace clickwit
