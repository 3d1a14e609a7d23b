// Copyright 2026 The clickwit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Multimode photon-number criteria: joint moments <:n^m:> = <:prod_j n_j^{m_j}:>,
// coincidence counts m! p_m, their matrices over multi-index sets and the
// two-element ratio criteria. Losses act per mode as n_j -> eta n_j.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "clickwit/detectors.hpp"
#include "clickwit/states.hpp"
#include "clickwit/witnesses.hpp"

namespace clickwit {

inline constexpr int kMaxModes = 8;

using MultiIndex = std::vector<HalfInt>;

inline HalfInt total(const MultiIndex& m) {
    HalfInt s;
    for (HalfInt h : m) s += h;
    return s;
}

inline MultiIndex multi_index(std::initializer_list<double> values) {
    MultiIndex m;
    for (double v : values) m.push_back(parse_half_int(std::to_string(v)));
    return m;
}

namespace detail {

inline void check_modes(const StateSpec& state, std::size_t width) {
    if (state.modes > kMaxModes) throw std::domain_error("at most 8 modes are supported");
    if (static_cast<int>(width) != state.modes)
        throw std::domain_error("multi-index has " + std::to_string(width) + " components but the state has " +
                                std::to_string(state.modes) + " modes");
}

inline std::vector<int> whole(const MultiIndex& m) {
    std::vector<int> out;
    for (std::size_t j = 0; j < m.size(); ++j) {
        if (!m[j].is_integer())
            throw std::domain_error("component " + std::to_string(j) + " of a moment exponent is not whole");
        if (m[j].twice() < 0) throw std::domain_error("negative exponent");
        out.push_back(static_cast<int>(m[j].to_integer()));
    }
    return out;
}

} // namespace detail

/// <:prod_j (eta n_j)^{m_j}:>
inline Expectation joint_moment(const StateSpec& state, const MultiIndex& m, double eta = 1.0) {
    detail::check_modes(state, m.size());
    std::vector<NOExpr> per_mode;
    for (int mj : detail::whole(m)) per_mode.push_back(NOExpr::monomial(eta, 0.0, 1.0, mj, 0.0));
    return expect_modes(state, per_mode);
}

/// m! p_m = <:prod_j (eta n_j)^{m_j} exp(-eta n_j):>
inline Expectation joint_count_entry(const StateSpec& state, const MultiIndex& m, double eta = 1.0) {
    detail::check_modes(state, m.size());
    std::vector<NOExpr> per_mode;
    for (int mj : detail::whole(m)) per_mode.push_back(NOExpr::monomial(eta, 0.0, 1.0, mj, 1.0));
    return expect_modes(state, per_mode);
}

/// Coincidence probability p_m.
inline double joint_counts(const StateSpec& state, const MultiIndex& m, double eta = 1.0) {
    double f = 1.0;
    for (int mj : detail::whole(m)) f *= factorial(mj);
    return joint_count_entry(state, m, eta).value / f;
}

/// Joint photocount distribution over {0..n_max}^modes, lexicographic.
inline CountDistribution joint_count_distribution(const StateSpec& state, double eta, int n_max) {
    if (std::pow(n_max + 1.0, state.modes) > 1e5) throw std::domain_error("joint outcome space exceeds 1e5 entries");
    CountDistribution d;
    d.kind = CountDistribution::Kind::Multimode;
    d.N = n_max;
    Outcome cur(static_cast<std::size_t>(state.modes), 0);
    while (true) {
        MultiIndex m;
        for (int v : cur) m.push_back(HalfInt(v));
        d.outcomes.push_back(cur);
        d.probs.push_back(detail::clip_probability(joint_counts(state, m, eta)));
        int pos = state.modes - 1;
        while (pos >= 0 && cur[static_cast<std::size_t>(pos)] == n_max) cur[static_cast<std::size_t>(pos--)] = 0;
        if (pos < 0) break;
        ++cur[static_cast<std::size_t>(pos)];
    }
    d.tail = 1.0 - d.total();
    d.truncated = d.tail > 1e-10;
    return d;
}

//---------------------------------------------------------------------------//
// Closed forms for multimode cat states (|alpha> +- |-alpha>)
//---------------------------------------------------------------------------//

/// <:n^m:> = |alpha^m|^2 [1 +- (-1)^|m| e^{-2||alpha||^2}] / [1 +- e^{-2||alpha||^2}]
inline double cat_joint_moment(const std::vector<complex>& alpha, Parity parity, const std::vector<int>& m) {
    double a2 = 0.0, mono = 1.0;
    int order = 0;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        a2 += std::norm(alpha[j]);
        mono *= std::pow(std::norm(alpha[j]), m[j]);
        order += m[j];
    }
    const double e = std::exp(-2.0 * a2);
    const double sgn = (order % 2 == 0) ? 1.0 : -1.0;
    if (parity == Parity::Even) return mono * (1.0 + sgn * e) / (1.0 + e);
    // 1 - e and 1 + e written to avoid cancellation for small ||alpha||.
    const double one_minus = -std::expm1(-2.0 * a2);
    return mono * (sgn > 0 ? one_minus : 1.0 + e) / one_minus;
}

/// m! p_m = |alpha^m|^2 [1 +- (-1)^|m|] / [e^{||alpha||^2} +- e^{-||alpha||^2}]  (lossless)
inline double cat_joint_count_entry(const std::vector<complex>& alpha, Parity parity, const std::vector<int>& m) {
    double a2 = 0.0, mono = 1.0;
    int order = 0;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        a2 += std::norm(alpha[j]);
        mono *= std::pow(std::norm(alpha[j]), m[j]);
        order += m[j];
    }
    const double sgn = (order % 2 == 0) ? 1.0 : -1.0;
    if (parity == Parity::Even) return mono * (1.0 + sgn) / (2.0 * std::cosh(a2));
    return mono * (1.0 - sgn) / (2.0 * std::sinh(a2));
}

/// <N> = ||alpha||^2 tanh(||alpha||^2)^{+-1}
inline double cat_total_photon_number(double norm2, Parity parity) {
    return parity == Parity::Even ? norm2 * std::tanh(norm2) : norm2 / std::tanh(norm2);
}

//---------------------------------------------------------------------------//
// Matrices
//---------------------------------------------------------------------------//

/// One set per integer/half-odd choice of each mode (2^modes sets); each
/// holds every multi-index of that pattern with |k| <= order/2.
inline std::vector<IndexSet> enumerate_multimode_sets(int modes, int order, MatrixKind kind = MatrixKind::Moments) {
    if (modes < 1 || modes > kMaxModes) throw std::domain_error("mode count must lie in [1, 8]");
    std::vector<IndexSet> out;
    for (int mask = 0; mask < (1 << modes); ++mask) {
        std::vector<int> parity;
        IndexSet s;
        s.kind = kind;
        for (int j = 0; j < modes; ++j) {
            parity.push_back((mask >> j) & 1);
            s.pattern.push_back(parity.back() ? IndexClass::HalfOdd : IndexClass::Integer);
            s.id.push_back(parity.back() ? 'H' : 'N');
        }
        std::vector<std::int64_t> cur;
        detail::multi_indices(parity, order, false, 0, cur, s.elements);
        std::sort(s.elements.begin(), s.elements.end());
        out.push_back(std::move(s));
    }
    return out;
}

/// C = [(k+l)! p_{k+l}] or M = [<:n^{k+l}:>] over a multi-index set.
inline WitnessReport multimode_matrix(const StateSpec& state, const IndexSet& set, double eta, MatrixKind kind) {
    if (set.empty()) throw std::domain_error("index set " + set.id + " is empty");
    if (set.size() > kMaxWitnessDim) throw std::domain_error("index set exceeds 64 elements");
    for (const auto& e : set.elements) detail::check_modes(state, e.size());
    SymMatrix m(set.size());
    std::map<std::vector<int>, double> memo;
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (std::size_t j = i; j < set.size(); ++j) {
            const auto& k = set.elements[i];
            const auto& l = set.elements[j];
            MultiIndex s;
            for (std::size_t q = 0; q < k.size(); ++q) {
                HalfInt sum = k[q] + l[q];
                if (!sum.is_integer())
                    throw std::domain_error("index pair " + to_string(k) + ", " + to_string(l) +
                                            " is inadmissible in mode " + std::to_string(q));
                s.push_back(sum);
            }
            auto key = detail::whole(s);
            auto it = memo.find(key);
            if (it == memo.end()) {
                double v = kind == MatrixKind::Counts ? joint_count_entry(state, s, eta).value
                                                      : joint_moment(state, s, eta).value;
                it = memo.emplace(key, v).first;
            }
            m.set(i, j, it->second);
        }
    }
    WitnessReport r = finalize_report(std::move(m), set,
                                      kind == MatrixKind::Counts ? MatrixSource::CountsPhoto : MatrixSource::MomentsPhoto);
    r.metadata = "multimode modes=" + std::to_string(state.modes) + " eta=" + std::to_string(eta);
    return r;
}

//---------------------------------------------------------------------------//
// Ratio criteria for two-element sets {n, m}
//---------------------------------------------------------------------------//

enum class RatioCase { I, II, III, IV };

inline std::string to_string(RatioCase c) {
    switch (c) {
    case RatioCase::I: return "i";
    case RatioCase::II: return "ii";
    case RatioCase::III: return "iii";
    case RatioCase::IV: return "iv";
    }
    return "?";
}

/// (i) |n|,|m| whole, |n|+|m| even; (ii) whole, odd; (iii) half-odd, even; (iv) half-odd, odd.
inline RatioCase classify_ratio_case(const MultiIndex& n, const MultiIndex& m) {
    HalfInt tn = total(n), tm = total(m);
    if (tn.is_integer() != tm.is_integer())
        throw std::domain_error("|n| and |m| must both be whole or both half-odd");
    HalfInt sum = tn + tm;
    bool even = sum.to_integer() % 2 == 0;
    if (tn.is_integer()) return even ? RatioCase::I : RatioCase::II;
    return even ? RatioCase::III : RatioCase::IV;
}

struct RatioResult {
    double ratio = std::numeric_limits<double>::quiet_NaN();
    RatioCase label = RatioCase::I;
    Verdict verdict = Verdict::Indeterminate;
    bool divergent = false; ///< nonzero numerator over a vanishing denominator
};

namespace detail {

inline MultiIndex pair_sum(const MultiIndex& a, const MultiIndex& b) {
    if (a.size() != b.size()) throw std::domain_error("multi-indices differ in length");
    MultiIndex s;
    for (std::size_t j = 0; j < a.size(); ++j) {
        HalfInt v = a[j] + b[j];
        if (!v.is_integer()) throw std::domain_error("inadmissible pair in mode " + std::to_string(j));
        s.push_back(v);
    }
    return s;
}

template <class Entry>
RatioResult ratio_from(const MultiIndex& n, const MultiIndex& m, Entry&& entry) {
    RatioResult r;
    r.label = classify_ratio_case(n, m);
    Expectation mixed = entry(pair_sum(m, n));
    Expectation mm = entry(pair_sum(m, m));
    Expectation nn = entry(pair_sum(n, n));
    auto vanishes = [](const Expectation& e) { return std::abs(e.value) <= 1e-12 * e.magnitude; };
    if (vanishes(mm) || vanishes(nn)) {
        if (!vanishes(mixed)) {
            r.divergent = true;
            r.ratio = std::numeric_limits<double>::infinity();
            r.verdict = Verdict::Nonclassical;
        }
        return r;
    }
    r.ratio = mixed.value * mixed.value / (mm.value * nn.value);
    r.verdict = r.ratio > 1.0 ? Verdict::Nonclassical : Verdict::NoViolation;
    return r;
}

} // namespace detail

/// <:n^{m+n}:>^2 / (<:n^{2m}:> <:n^{2n}:>), classically at most one.
inline RatioResult ratio_criterion(const StateSpec& state, const MultiIndex& n, const MultiIndex& m, double eta = 1.0) {
    return detail::ratio_from(n, m, [&](const MultiIndex& s) { return joint_moment(state, s, eta); });
}

/// [(m+n)! p_{m+n}]^2 / [(2m)! p_{2m} (2n)! p_{2n}], classically at most one.
/// For lossless detection the odd (even) cat gives a formally infinite value,
/// reported as divergent.
inline RatioResult count_ratio_criterion(const StateSpec& state, const MultiIndex& n, const MultiIndex& m,
                                         double eta = 1.0) {
    return detail::ratio_from(n, m, [&](const MultiIndex& s) { return joint_count_entry(state, s, eta); });
}

} // namespace clickwit
