// Copyright 2026 The clickwit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Index sets, matrices of counts (C) and moments (M), and the scalar
// nonclassicality criteria derived from click-counting statistics.
//
// For classical light every C and M is positive semidefinite. Rows and
// columns are labelled by an index set I whose pairwise sums k + l must be
// whole numbers: either all of I is integer or all of I is half-odd (per
// component, for multi-indices).
#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clickwit/detectors.hpp"
#include "clickwit/numerics.hpp"
#include "clickwit/states.hpp"

namespace clickwit {

enum class IndexClass { Integer, HalfOdd };
enum class MatrixKind { Counts, Moments };

inline std::string to_string(MatrixKind k) { return k == MatrixKind::Counts ? "C" : "M"; }

inline char class_letter(IndexClass c) { return c == IndexClass::Integer ? 'N' : 'H'; }

using IndexElement = std::vector<HalfInt>;

inline std::string to_string(const IndexElement& e) {
    if (e.size() == 1) return e[0].str();
    std::string s = "(";
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (i) s += ",";
        s += e[i].str();
    }
    return s + ")";
}

struct IndexSet {
    std::string id;                   ///< class pattern, e.g. "N", "H", "HNH"
    std::vector<IndexElement> elements;
    std::vector<IndexClass> pattern;  ///< per component
    MatrixKind kind = MatrixKind::Counts;

    bool empty() const { return elements.empty(); }
    std::size_t size() const { return elements.size(); }

    std::string str() const {
        std::string s = "{";
        for (std::size_t i = 0; i < elements.size(); ++i) {
            if (i) s += ",";
            s += to_string(elements[i]);
        }
        return s + "}";
    }
};

/// Single-index set from plain numbers; class inferred from the elements.
inline IndexSet make_index_set(const std::vector<HalfInt>& values, MatrixKind kind = MatrixKind::Counts) {
    IndexSet s;
    s.kind = kind;
    for (HalfInt v : values) s.elements.push_back({v});
    std::sort(s.elements.begin(), s.elements.end());
    IndexClass c = (!values.empty() && values.front().is_half_odd()) ? IndexClass::HalfOdd : IndexClass::Integer;
    s.pattern = {c};
    s.id = std::string(1, class_letter(c));
    return s;
}

inline IndexSet make_index_set(const std::vector<IndexElement>& elements, MatrixKind kind) {
    IndexSet s;
    s.kind = kind;
    s.elements = elements;
    std::sort(s.elements.begin(), s.elements.end());
    if (!elements.empty()) {
        for (HalfInt h : s.elements.front())
            s.pattern.push_back(h.is_integer() ? IndexClass::Integer : IndexClass::HalfOdd);
        for (IndexClass c : s.pattern) s.id.push_back(class_letter(c));
    }
    return s;
}

//---------------------------------------------------------------------------//
// Enumeration
//---------------------------------------------------------------------------//

namespace detail {

inline IndexSet single_index_set(IndexClass c, int cap, MatrixKind kind) {
    IndexSet s;
    s.kind = kind;
    s.pattern = {c};
    s.id = std::string(1, class_letter(c));
    // integer: {0, 1, ..., floor(cap/2)}; half-odd: {1/2, 3/2, ..., ceil(cap/2) - 1/2}
    for (int tw = (c == IndexClass::Integer ? 0 : 1); tw <= cap; tw += 2)
        s.elements.push_back({HalfInt::from_twice(tw)});
    return s;
}

// Multi-indices (twice-values) with the given parity per position and
// twice-sum equal to (exact) or at most (!exact) `twice_total`.
inline void multi_indices(const std::vector<int>& parity, int twice_total, bool exact, std::size_t pos,
                          std::vector<std::int64_t>& cur, std::vector<IndexElement>& out) {
    std::int64_t used = 0;
    for (auto v : cur) used += v;
    if (pos == parity.size()) {
        if (!exact || used == twice_total) {
            IndexElement e;
            for (auto v : cur) e.push_back(HalfInt::from_twice(v));
            out.push_back(std::move(e));
        }
        return;
    }
    for (std::int64_t tw = parity[pos]; used + tw <= twice_total; tw += 2) {
        cur.push_back(tw);
        multi_indices(parity, twice_total, exact, pos + 1, cur, out);
        cur.pop_back();
    }
}

} // namespace detail

/// Maximal index sets for a detector configuration.
///
/// Photoelectric and on-off: the integer set {0..floor(cap/2)} and the
/// half-odd set {1/2..ceil(cap/2)-1/2}, with cap = N for on-off detection and
/// cap = photo_order (the highest entry order k + l) for photoelectric.
///
/// PNR counts: 2^K sets, one per integer/half-odd choice for N_0..N_{K-1};
/// N_K is fixed by N_0 + ... + N_K = N/2. PNR moments: 2^(K+1) sets, one per
/// choice for all positions, with N_0 + ... + N_K <= N/2. Patterns without
/// admissible members are returned empty.
inline std::vector<IndexSet> enumerate_index_sets(const DetectorConfig& cfg,
                                                  MatrixKind kind = MatrixKind::Counts,
                                                  int photo_order = 4) {
    cfg.validate();
    std::vector<IndexSet> out;
    if (cfg.model != DetectorModel::PNR) {
        int cap = cfg.model == DetectorModel::OnOff ? cfg.N : photo_order;
        if (cap < 0) throw std::domain_error("negative order cap");
        for (IndexClass c : {IndexClass::Integer, IndexClass::HalfOdd})
            out.push_back(detail::single_index_set(c, cap, kind));
        return out;
    }
    const int K = cfg.K;
    const int free_positions = kind == MatrixKind::Counts ? K : K + 1;
    for (int mask = 0; mask < (1 << free_positions); ++mask) {
        std::vector<int> parity;
        for (int j = 0; j < free_positions; ++j) parity.push_back((mask >> j) & 1);
        IndexSet s;
        s.kind = kind;
        std::vector<std::int64_t> cur;
        if (kind == MatrixKind::Counts) {
            // N_K = N/2 - sum_{j<K} N_j, in twice-units N - sum.
            int parity_sum = 0;
            for (int p : parity) parity_sum += p;
            int last_parity = ((cfg.N - parity_sum) % 2 + 2) % 2;
            parity.push_back(last_parity);
            detail::multi_indices(parity, cfg.N, true, 0, cur, s.elements);
        } else {
            detail::multi_indices(parity, cfg.N, false, 0, cur, s.elements);
        }
        for (int p : parity) {
            s.pattern.push_back(p ? IndexClass::HalfOdd : IndexClass::Integer);
            s.id.push_back(p ? 'H' : 'N');
        }
        std::sort(s.elements.begin(), s.elements.end());
        out.push_back(std::move(s));
    }
    return out;
}

/// Exponent vector of the (k, l) matrix entry in the detector's native
/// parametrization: {s} for photoelectric, {N - s, s} or {0, s} for on-off
/// counts or moments, the componentwise sum for PNR.
inline Outcome entry_exponents(const DetectorConfig& cfg, MatrixKind kind, const IndexElement& k,
                               const IndexElement& l) {
    if (k.size() != l.size()) throw std::domain_error("index elements differ in length");
    Outcome s;
    for (std::size_t j = 0; j < k.size(); ++j) {
        HalfInt sum = k[j] + l[j];
        if (!sum.is_integer())
            throw std::domain_error("index pair " + to_string(k) + " + " + to_string(l) +
                                    " is not a whole number in component " + std::to_string(j));
        if (sum.twice() < 0) throw std::domain_error("negative index");
        s.push_back(static_cast<int>(sum.to_integer()));
    }
    if (cfg.model == DetectorModel::OnOff) {
        if (s.size() != 1) throw std::domain_error("on-off index sets are single-index");
        return kind == MatrixKind::Counts ? Outcome{cfg.N - s[0], s[0]} : Outcome{0, s[0]};
    }
    return s;
}

/// Checks the pairwise rule and the model caps; throws std::domain_error
/// naming the first violating pair.
inline void validate_index_set(const IndexSet& set, const DetectorConfig& cfg) {
    if (set.empty()) throw std::domain_error("index set " + set.id + " is empty");
    if (set.size() > kMaxWitnessDim) throw std::domain_error("index set exceeds 64 elements");
    const std::size_t width = cfg.model == DetectorModel::PNR ? static_cast<std::size_t>(cfg.K) + 1 : 1;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& e = set.elements[i];
        if (e.size() != width) throw std::domain_error("index element " + to_string(e) + " has wrong width");
        for (HalfInt h : e)
            if (h.twice() < 0) throw std::domain_error("negative index in " + to_string(e));
        if (i > 0 && !(set.elements[i - 1] < e))
            throw std::domain_error("index set elements must be distinct and ascending");
    }
    for (const auto& k : set.elements) {
        for (const auto& l : set.elements) {
            Outcome s = entry_exponents(cfg, set.kind, k, l); // throws on half-integer sums
            int total = 0;
            for (int v : s) total += v;
            auto pair = to_string(k) + ", " + to_string(l);
            if (cfg.model == DetectorModel::OnOff) {
                if (s[1] > cfg.N) throw std::domain_error("index pair " + pair + " exceeds N");
            } else if (cfg.model == DetectorModel::PNR) {
                if (set.kind == MatrixKind::Counts && total != cfg.N)
                    throw std::domain_error("index pair " + pair + " does not sum to N");
                if (set.kind == MatrixKind::Moments && total > cfg.N)
                    throw std::domain_error("index pair " + pair + " exceeds N");
            }
        }
    }
}

//---------------------------------------------------------------------------//
// Reports
//---------------------------------------------------------------------------//

enum class MatrixSource { CountsPhoto, MomentsPhoto, CountsClick, MomentsClick, CountsPNR, MomentsPNR };

inline MatrixSource matrix_source(DetectorModel model, MatrixKind kind) {
    const bool c = kind == MatrixKind::Counts;
    switch (model) {
    case DetectorModel::Photoelectric: return c ? MatrixSource::CountsPhoto : MatrixSource::MomentsPhoto;
    case DetectorModel::OnOff: return c ? MatrixSource::CountsClick : MatrixSource::MomentsClick;
    case DetectorModel::PNR: return c ? MatrixSource::CountsPNR : MatrixSource::MomentsPNR;
    }
    throw std::logic_error("unknown model");
}

inline constexpr double kRelativeNegativity = 1e-10;

struct WitnessReport {
    SymMatrix matrix{1};
    std::vector<std::string> labels;
    double min_eig = 0.0;
    std::vector<double> minors;
    MatrixSource source = MatrixSource::CountsClick;
    double tolerance = 0.0; ///< 1e-10 * max |entry|
    bool negative = false;  ///< min_eig < -tolerance
    std::string set_id;
    std::string metadata;
    std::optional<double> first_moment; ///< <:pi:> for on-off moment reports

    double determinant() const { return minors.back(); }
};

/// Fills min_eig, minors and the negativity flag from the matrix.
inline WitnessReport finalize_report(SymMatrix m, const IndexSet& set, MatrixSource source) {
    WitnessReport r;
    r.min_eig = min_eigenvalue(m);
    r.minors = leading_minors(m);
    r.tolerance = kRelativeNegativity * m.max_abs();
    r.negative = r.min_eig < -r.tolerance;
    r.matrix = std::move(m);
    r.source = source;
    r.set_id = set.id;
    for (const auto& e : set.elements) r.labels.push_back(to_string(e));
    return r;
}

namespace detail {

template <class EntryFn>
SymMatrix assemble(const IndexSet& set, const DetectorConfig& cfg, EntryFn&& entry) {
    SymMatrix m(set.size());
    std::map<Outcome, double> memo;
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (std::size_t j = i; j < set.size(); ++j) {
            Outcome s = entry_exponents(cfg, set.kind, set.elements[i], set.elements[j]);
            auto it = memo.find(s);
            if (it == memo.end()) it = memo.emplace(s, entry(s)).first;
            m.set(i, j, it->second);
        }
    }
    return m;
}

inline std::string describe(const DetectorConfig& cfg) {
    return to_string(cfg.model) + " N=" + std::to_string(cfg.N) + " K=" + std::to_string(cfg.K) +
           " eta=" + std::to_string(cfg.eta) + " nu=" + std::to_string(cfg.nu);
}

} // namespace detail

/// Matrix of C or M (by set.kind) evaluated on a state.
inline WitnessReport witness_matrix(const StateSpec& state, const DetectorExpressions& det, const IndexSet& set) {
    const auto& cfg = det.config();
    if (state.modes != 1) throw std::domain_error("single-mode state required");
    validate_index_set(set, cfg);
    SymMatrix m = detail::assemble(set, cfg, [&](const Outcome& s) {
        return expect(state, set.kind == MatrixKind::Counts ? det.count_entry(s) : det.moment_entry(s));
    });
    WitnessReport r = finalize_report(std::move(m), set, matrix_source(cfg.model, set.kind));
    r.metadata = detail::describe(cfg);
    if (cfg.model == DetectorModel::OnOff && set.kind == MatrixKind::Moments)
        r.first_moment = expect(state, click_expr(cfg));
    return r;
}

/// Matrix of counts: (k+l)! p_{k+l}, c_{k+l}/C(N,k+l), or c_{N+N'}/multinom(N; N+N').
inline WitnessReport count_matrix(const StateSpec& state, const DetectorExpressions& det, IndexSet set) {
    set.kind = MatrixKind::Counts;
    return witness_matrix(state, det, set);
}

inline WitnessReport count_matrix(const StateSpec& state, const DetectorConfig& cfg, const IndexSet& set) {
    return count_matrix(state, DetectorExpressions(cfg), set);
}

/// Matrix of normally ordered moments <:G^{k+l}:>, <:pi^{k+l}:>, or
/// <:pi_0^{N_0+N'_0} ... pi_K^{N_K+N'_K}:>.
inline WitnessReport moment_matrix(const StateSpec& state, const DetectorExpressions& det, IndexSet set) {
    set.kind = MatrixKind::Moments;
    return witness_matrix(state, det, set);
}

inline WitnessReport moment_matrix(const StateSpec& state, const DetectorConfig& cfg, const IndexSet& set) {
    return moment_matrix(state, DetectorExpressions(cfg), set);
}

/// C or M assembled from a (measured or computed) counting distribution.
inline WitnessReport witness_matrix_from_counts(const CountDistribution& c, const DetectorConfig& cfg,
                                                const IndexSet& set) {
    validate_index_set(set, cfg);
    SymMatrix m = detail::assemble(set, cfg, [&](const Outcome& s) -> double {
        if (set.kind == MatrixKind::Counts) {
            switch (cfg.model) {
            case DetectorModel::Photoelectric: return factorial(s[0]) * c.prob(s[0]);
            case DetectorModel::OnOff: return c.prob(s[1]) / static_cast<double>(binom(cfg.N, s[1]));
            case DetectorModel::PNR: return c.prob(s) / to_double(multinom(cfg.N, s));
            }
        } else {
            switch (cfg.model) {
            case DetectorModel::Photoelectric: return factorial_moment_from_counts(c, s[0]);
            case DetectorModel::OnOff: return click_moment_from_counts(c, s[1]);
            case DetectorModel::PNR: return multiplexed_moment_from_counts(c, s);
            }
        }
        throw std::logic_error("unknown model");
    });
    WitnessReport r = finalize_report(std::move(m), set, matrix_source(cfg.model, set.kind));
    r.metadata = detail::describe(cfg);
    if (cfg.model == DetectorModel::OnOff && set.kind == MatrixKind::Moments)
        r.first_moment = click_moment_from_counts(c, 1);
    return r;
}

//---------------------------------------------------------------------------//
// Scalar criteria for on-off click counting
//---------------------------------------------------------------------------//

enum class Verdict { Nonclassical, NoViolation, Indeterminate, Inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Nonclassical: return "nonclassical";
    case Verdict::NoViolation: return "no-violation";
    case Verdict::Indeterminate: return "indeterminate";
    case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

enum class KlyshkoVariant { Integer, Half };

struct KlyshkoResult {
    double ratio = std::numeric_limits<double>::quiet_NaN();
    double bound = 0.0;
    Verdict verdict = Verdict::Indeterminate;
};

/// Integer variant: c0 c2 / c1^2 >= (1 - 1/N)/2.
/// Half variant:    c1 c3 / c2^2 >= 2/3 (1 - 1/(N-1)).
/// Violation certifies nonclassicality; a zero denominator gives no verdict.
inline KlyshkoResult klyshko_ratio(const CountDistribution& c, KlyshkoVariant variant) {
    const double N = c.N;
    KlyshkoResult r;
    double num, den;
    if (variant == KlyshkoVariant::Integer) {
        if (c.N < 2) throw std::domain_error("integer Klyshko ratio needs N >= 2");
        r.bound = 0.5 * (1.0 - 1.0 / N);
        num = c.prob(0) * c.prob(2);
        den = c.prob(1) * c.prob(1);
    } else {
        if (c.N < 3) throw std::domain_error("half-integer Klyshko ratio needs N >= 3");
        r.bound = 2.0 / 3.0 * (1.0 - 1.0 / (N - 1.0));
        num = c.prob(1) * c.prob(3);
        den = c.prob(2) * c.prob(2);
    }
    if (den == 0.0) return r;
    r.ratio = num / den;
    r.verdict = r.ratio < r.bound ? Verdict::Nonclassical : Verdict::NoViolation;
    return r;
}

/// g^(m) = <:pi^m:> / <:pi:>^m for m = 0..max_m (g^(0) = g^(1) = 1).
inline std::vector<double> g_functions(const StateSpec& state, const DetectorConfig& cfg, int max_m) {
    const double first = click_moment(state, cfg, 1);
    if (first == 0.0) throw std::domain_error("g functions undefined for <:pi:> = 0");
    std::vector<double> g;
    for (int m = 0; m <= max_m; ++m) g.push_back(click_moment(state, cfg, m) / std::pow(first, m));
    return g;
}

inline std::vector<double> g_functions_from_counts(const CountDistribution& c, int max_m) {
    const double first = click_moment_from_counts(c, 1);
    if (first == 0.0) throw std::domain_error("g functions undefined for <:pi:> = 0");
    std::vector<double> g;
    for (int m = 0; m <= max_m; ++m) g.push_back(click_moment_from_counts(c, m) / std::pow(first, m));
    return g;
}

/// D M D with D = diag(<:pi:>^{-k}); its entries are g^(k+l). Congruence
/// with a positive diagonal keeps the signs of the eigenvalues.
inline WitnessReport g_matrix(const WitnessReport& moments) {
    if (moments.source != MatrixSource::MomentsClick || !moments.first_moment)
        throw std::domain_error("g_matrix needs an on-off moment report");
    const double first = *moments.first_moment;
    if (!(first > 0.0)) throw std::domain_error("g_matrix undefined for <:pi:> = 0");
    const std::size_t n = moments.matrix.dim();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = std::pow(first, -parse_half_int(moments.labels[i]).value());
    SymMatrix g(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) g.set(i, j, d[i] * moments.matrix(i, j) * d[j]);
    WitnessReport r = moments;
    r.min_eig = min_eigenvalue(g);
    r.minors = leading_minors(g);
    r.tolerance = kRelativeNegativity * g.max_abs();
    r.negative = r.min_eig < -r.tolerance;
    r.matrix = std::move(g);
    return r;
}

/// Mean, variance and skewness of the click number, and the first three
/// normally ordered click moments expressed through them.
struct ClickStats {
    int N = 0;
    double mean = 0.0;
    double variance = 0.0;
    double central3 = 0.0; ///< E[(k - mu)^3] = sigma^3 gamma_3
    double skewness = std::numeric_limits<double>::quiet_NaN();
    double m1 = 0.0, m2 = std::numeric_limits<double>::quiet_NaN(), m3 = std::numeric_limits<double>::quiet_NaN();
};

inline ClickStats click_stats(const CountDistribution& c) {
    ClickStats s;
    s.N = c.N;
    const double N = c.N;
    for (int k = 0; k <= c.N; ++k) s.mean += k * c.prob(k);
    for (int k = 0; k <= c.N; ++k) {
        double d = k - s.mean;
        s.variance += d * d * c.prob(k);
        s.central3 += d * d * d * c.prob(k);
    }
    const double sigma = std::sqrt(s.variance);
    if (sigma > 0.0) s.skewness = s.central3 / (sigma * sigma * sigma);
    const double mu = s.mean, var = s.variance;
    s.m1 = mu / N;
    if (c.N >= 2) s.m2 = (var + mu * mu - mu) / (N * (N - 1.0));
    if (c.N >= 3)
        s.m3 = (s.central3 + 3.0 * mu * var + mu * mu * mu - 3.0 * (var + mu * mu) + 2.0 * mu) /
               (N * (N - 1.0) * (N - 2.0));
    return s;
}

struct QBResult {
    double qb = 0.0;
    double det_moments = 0.0;  ///< <:pi^2:> - <:pi:>^2 from the counts
    double det_identity = 0.0; ///< mu (N - mu) / (N^2 (N - 1)) Q_B
};

/// Q_B = N sigma^2 / (mu (N - mu)) - 1; negative values are sub-binomial.
inline QBResult qb_parameter(const CountDistribution& c) {
    if (c.N < 2) throw std::domain_error("Q_B needs N >= 2");
    ClickStats s = click_stats(c);
    const double N = c.N, mu = s.mean;
    if (!(mu > 0.0 && mu < N)) throw std::domain_error("Q_B undefined for a dark or saturated detector");
    QBResult r;
    r.qb = N * s.variance / (mu * (N - mu)) - 1.0;
    const double m1 = click_moment_from_counts(c, 1), m2 = click_moment_from_counts(c, 2);
    r.det_moments = m2 - m1 * m1;
    r.det_identity = mu * (N - mu) / (N * N * (N - 1.0)) * r.qb;
    return r;
}

struct SkewnessWitness {
    double det_moments = 0.0; ///< <:pi:><:pi^3:> - <:pi^2:>^2
    double det_central = 0.0; ///< same value from mean, variance and skewness
    double central2 = 0.0;    ///< <:(Delta pi)^2:>
    double central3 = 0.0;    ///< <:(Delta pi)^3:>
};

/// Third-order click criterion of the half-integer set {1/2, 3/2}, by two
/// routes: the moment products and the central-moment expansion
///   <:pi:><:(Dpi)^3:> + <:pi:>^2 <:(Dpi)^2:> - <:(Dpi)^2:>^2.
inline SkewnessWitness skewness_witness(const CountDistribution& c) {
    if (c.N < 3) throw std::domain_error("skewness witness needs N >= 3");
    ClickStats s = click_stats(c);
    const double N = c.N, mu = s.mean, mubar = N - mu;
    SkewnessWitness w;
    const double m1 = click_moment_from_counts(c, 1), m2 = click_moment_from_counts(c, 2),
                 m3 = click_moment_from_counts(c, 3);
    w.det_moments = m1 * m3 - m2 * m2;
    w.central2 = (N * s.variance - mu * mubar) / (N * N * (N - 1.0));
    w.central3 = (N * N * s.central3 + 2.0 * mu * mubar * (mubar - mu) - 3.0 * N * s.variance * (mubar - mu)) /
                 (N * N * N * (N - 1.0) * (N - 2.0));
    const double p = mu / N;
    w.det_central = p * w.central3 + p * p * w.central2 - w.central2 * w.central2;
    return w;
}

} // namespace clickwit
