// Copyright 2026 The clickwit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Counting statistics and normally ordered moments for photoelectric
// detection, multiplexed on-off detection and multiplexed detection with
// intrinsic resolution K (multinomial statistics).
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "clickwit/expr.hpp"
#include "clickwit/numerics.hpp"
#include "clickwit/states.hpp"

namespace clickwit {

enum class DetectorModel { Photoelectric, OnOff, PNR };

inline std::string to_string(DetectorModel m) {
    switch (m) {
    case DetectorModel::Photoelectric: return "photo";
    case DetectorModel::OnOff: return "onoff";
    case DetectorModel::PNR: return "pnr";
    }
    return "?";
}

/// Detector description. For Photoelectric the response is
/// G = eta * n + nu; multiplexed models split the light uniformly over N bins
/// and use G = (eta / N) * n + nu per bin, nu being the per-bin dark term.
struct DetectorConfig {
    DetectorModel model = DetectorModel::OnOff;
    int N = 1; ///< bins (OnOff, PNR)
    int K = 1; ///< intrinsic levels (PNR); K = 1 is on-off
    double eta = 1.0;
    double nu = 0.0;

    static DetectorConfig photoelectric(double eta, double nu = 0.0) {
        return {DetectorModel::Photoelectric, 1, 1, eta, nu};
    }
    static DetectorConfig on_off(int N, double eta, double nu = 0.0) {
        return {DetectorModel::OnOff, N, 1, eta, nu};
    }
    static DetectorConfig pnr(int N, int K, double eta, double nu = 0.0) {
        return {DetectorModel::PNR, N, K, eta, nu};
    }

    void validate() const {
        if (!(eta > 0.0 && eta <= 1.0)) throw std::domain_error("efficiency must lie in (0, 1]");
        if (!(nu >= 0.0) || !std::isfinite(nu)) throw std::domain_error("dark term must be >= 0");
        if (model != DetectorModel::Photoelectric) {
            if (N < 1 || N > kMaxCombinatoricN) throw std::domain_error("bin count must lie in [1, 64]");
            if (model == DetectorModel::PNR && (K < 1 || K > 6))
                throw std::domain_error("intrinsic resolution K must lie in [1, 6]");
        }
    }

    double rate() const { return model == DetectorModel::Photoelectric ? eta : eta / N; }
    double offset() const { return nu; }
    bool multiplexed() const { return model != DetectorModel::Photoelectric; }
};

using Outcome = std::vector<int>;

/// Outcome -> probability map, outcomes in ascending lexicographic order.
struct CountDistribution {
    enum class Kind { Single, MultiOutcome, Multimode };

    Kind kind = Kind::Single;
    std::vector<Outcome> outcomes;
    std::vector<double> probs;
    int N = 0;          ///< bins, or n_max for photoelectric / multimode counts
    int K = 1;          ///< intrinsic levels for MultiOutcome
    double tail = 0.0;  ///< 1 - total, for truncated distributions
    bool truncated = false;

    std::size_t size() const { return outcomes.size(); }

    double total() const {
        double s = 0.0;
        for (double p : probs) s += p;
        return s;
    }

    /// Probability of an outcome; zero for outcomes outside the table.
    double prob(const Outcome& o) const {
        auto it = std::lower_bound(outcomes.begin(), outcomes.end(), o);
        if (it == outcomes.end() || *it != o) return 0.0;
        return probs[static_cast<std::size_t>(it - outcomes.begin())];
    }
    double prob(int k) const { return prob(Outcome{k}); }
};

namespace detail {

inline double clip_probability(double p) {
    if (p < -1e-12) throw std::logic_error("negative probability " + std::to_string(p));
    return p < 0.0 ? 0.0 : p;
}

inline void compositions(int total, int parts, Outcome& cur, std::vector<Outcome>& out) {
    if (parts == 1) {
        cur.push_back(total);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int v = 0; v <= total; ++v) {
        cur.push_back(v);
        compositions(total - v, parts - 1, cur, out);
        cur.pop_back();
    }
}

} // namespace detail

/// All (N_0..N_K) with sum N in lexicographic order.
inline std::vector<Outcome> multinomial_outcomes(int N, int K) {
    if (static_cast<double>(binom(N + K, K)) > 1e5)
        throw std::domain_error("multinomial outcome space exceeds 1e5 entries");
    std::vector<Outcome> out;
    Outcome cur;
    detail::compositions(N, K + 1, cur, out);
    return out;
}

//---------------------------------------------------------------------------//
// Expression factories
//---------------------------------------------------------------------------//

/// :G^n / n! exp(-G): (photocount probability operator).
inline NOExpr photo_count_expr(const DetectorConfig& cfg, int n) {
    return NOExpr::monomial(cfg.rate(), cfg.offset(), 1.0 / factorial(n), n, 1.0);
}

/// :G^m:
inline NOExpr photo_moment_expr(const DetectorConfig& cfg, int m) {
    return NOExpr::monomial(cfg.rate(), cfg.offset(), 1.0, m, 0.0);
}

/// pi_0 = :exp(-G):, the no-click element of one bin.
inline NOExpr no_click_expr(const DetectorConfig& cfg) {
    return NOExpr::monomial(cfg.rate(), cfg.offset(), 1.0, 0, 1.0);
}

/// pi = 1 - :exp(-G):, the click element of one bin.
inline NOExpr click_expr(const DetectorConfig& cfg) {
    return NOExpr::poisson_tail(cfg.rate(), cfg.offset(), 1);
}

/// Single-bin POVM pi_0..pi_K: pi_j = :G^j/j! exp(-G): for j < K, and
/// pi_K = 1 - (pi_0 + ... + pi_{K-1}).
inline std::vector<NOExpr> pnr_povm(const DetectorConfig& cfg) {
    cfg.validate();
    if (cfg.model != DetectorModel::PNR) throw std::domain_error("pnr_povm: PNR model required");
    std::vector<NOExpr> povm;
    for (int j = 0; j < cfg.K; ++j)
        povm.push_back(NOExpr::monomial(cfg.rate(), cfg.offset(), 1.0 / factorial(j), j, 1.0));
    povm.push_back(NOExpr::poisson_tail(cfg.rate(), cfg.offset(), cfg.K));
    return povm;
}

/// Expands products of single-bin POVM powers once per configuration and
/// memoizes them; safe to share between threads.
class DetectorExpressions {
  public:
    explicit DetectorExpressions(DetectorConfig cfg) : cfg_(cfg) {
        cfg_.validate();
        if (cfg_.model == DetectorModel::OnOff) {
            povm_ = {no_click_expr(cfg_), click_expr(cfg_)};
        } else if (cfg_.model == DetectorModel::PNR) {
            povm_ = pnr_povm(cfg_);
        }
    }

    const DetectorConfig& config() const { return cfg_; }
    const std::vector<NOExpr>& povm() const { return povm_; }

    /// :prod_j pi_j^{e_j}: for multiplexed models (e has K + 1 entries).
    NOExpr product(const Outcome& exps) const {
        require_multiplexed();
        if (exps.size() != povm_.size()) throw std::domain_error("exponent vector has wrong length");
        std::lock_guard lock(mutex_);
        auto it = products_.find(exps);
        if (it != products_.end()) return it->second;
        NOExpr e = NOExpr::one(cfg_.rate(), cfg_.offset());
        for (std::size_t j = 0; j < exps.size(); ++j) {
            if (exps[j] < 0) throw std::domain_error("negative exponent");
            if (exps[j] > 0) e = e * pow_cached(j, exps[j]);
        }
        products_.emplace(exps, e);
        return e;
    }

    /// Probability operator of a multiplexed outcome (N_0..N_K).
    NOExpr outcome(const Outcome& counts) const {
        int sum = 0;
        for (int c : counts) sum += c;
        if (sum != cfg_.N) throw std::domain_error("outcome does not sum to N");
        return product(counts) * to_double(multinom(cfg_.N, counts));
    }

    /// Expression of the matrix-of-counts entry c_s / multinom(N; s), i.e.
    /// the bare POVM product for multiplexed detectors and (k+l)! p_{k+l}
    /// = :G^s exp(-G): for photoelectric detection.
    NOExpr count_entry(const Outcome& s) const {
        if (cfg_.model == DetectorModel::Photoelectric) {
            return NOExpr::monomial(cfg_.rate(), cfg_.offset(), 1.0, single(s), 1.0);
        }
        int sum = 0;
        for (int c : s) sum += c;
        if (sum != cfg_.N) throw std::domain_error("count entry exponents must sum to N");
        return product(s);
    }

    /// Expression of the matrix-of-moments entry for exponents s.
    NOExpr moment_entry(const Outcome& s) const {
        if (cfg_.model == DetectorModel::Photoelectric) return photo_moment_expr(cfg_, single(s));
        return product(s);
    }

  private:
    static int single(const Outcome& s) {
        if (s.size() != 1) throw std::domain_error("photoelectric entries take a single exponent");
        return s[0];
    }
    void require_multiplexed() const {
        if (!cfg_.multiplexed()) throw std::domain_error("multiplexed detector required");
    }
    // Caller holds mutex_.
    const NOExpr& pow_cached(std::size_t j, int k) const {
        auto key = std::make_pair(j, k);
        auto it = powers_.find(key);
        if (it == powers_.end()) it = powers_.emplace(key, pow(povm_[j], k)).first;
        return it->second;
    }

    DetectorConfig cfg_;
    std::vector<NOExpr> povm_;
    mutable std::mutex mutex_;
    mutable std::map<Outcome, NOExpr> products_;
    mutable std::map<std::pair<std::size_t, int>, NOExpr> powers_;
};

//---------------------------------------------------------------------------//
// Photoelectric
//---------------------------------------------------------------------------//

/// p_n = <:G^n/n! exp(-G):>, n = 0..n_max.
inline CountDistribution photo_distribution(const StateSpec& state, const DetectorConfig& cfg,
                                            int n_max) {
    cfg.validate();
    if (cfg.model != DetectorModel::Photoelectric)
        throw std::domain_error("photo_distribution: photoelectric model required");
    if (state.modes != 1) throw std::domain_error("single-mode state required");
    CountDistribution d;
    d.kind = CountDistribution::Kind::Single;
    d.N = n_max;
    for (int n = 0; n <= n_max; ++n) {
        d.outcomes.push_back({n});
        d.probs.push_back(detail::clip_probability(expect(state, photo_count_expr(cfg, n))));
    }
    d.tail = 1.0 - d.total();
    d.truncated = d.tail > 1e-10;
    return d;
}

/// <:G^m:>; with nu = 0 this is the factorial moment <:(eta n)^m:>.
inline double factorial_moment(const StateSpec& state, const DetectorConfig& cfg, int m) {
    if (m < 0) throw std::domain_error("negative moment order");
    DetectorConfig photo = cfg;
    photo.model = DetectorModel::Photoelectric;
    photo.validate();
    return expect(state, photo_moment_expr(photo, m));
}

/// sum_n n(n-1)...(n-m+1) p_n over the tabulated range.
inline double factorial_moment_from_counts(const CountDistribution& p, int m) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        int n = p.outcomes[i][0];
        if (n < m) continue;
        double f = 1.0;
        for (int j = 0; j < m; ++j) f *= static_cast<double>(n - j);
        s += f * p.probs[i];
    }
    return s;
}

//---------------------------------------------------------------------------//
// On-off click counting
//---------------------------------------------------------------------------//

/// c_k = <:C(N,k) exp(-G)^{N-k} (1 - exp(-G))^k:>, k = 0..N.
inline CountDistribution click_distribution(const StateSpec& state, const DetectorExpressions& det) {
    const auto& cfg = det.config();
    if (cfg.model != DetectorModel::OnOff) throw std::domain_error("click_distribution: on-off model required");
    if (state.modes != 1) throw std::domain_error("single-mode state required");
    CountDistribution d;
    d.kind = CountDistribution::Kind::Single;
    d.N = cfg.N;
    for (int k = 0; k <= cfg.N; ++k) {
        d.outcomes.push_back({k});
        d.probs.push_back(detail::clip_probability(expect(state, det.outcome({cfg.N - k, k}))));
    }
    d.tail = 1.0 - d.total();
    return d;
}

inline CountDistribution click_distribution(const StateSpec& state, const DetectorConfig& cfg) {
    return click_distribution(state, DetectorExpressions(cfg));
}

/// <:pi^m:> with pi = 1 - exp(-G), evaluated on the state.
inline double click_moment(const StateSpec& state, const DetectorConfig& cfg, int m) {
    if (cfg.model != DetectorModel::OnOff) throw std::domain_error("click_moment: on-off model required");
    if (m < 0) throw std::domain_error("negative moment order");
    cfg.validate();
    return expect(state, pow(click_expr(cfg), m));
}

/// <:pi^m:> = sum_{k=m}^N C(k,m)/C(N,m) c_k.
inline double click_moment_from_counts(const CountDistribution& c, int m) {
    if (m < 0 || m > c.N) throw std::domain_error("click moment order must lie in [0, N]");
    const double denom = static_cast<double>(binom(c.N, m));
    double s = 0.0;
    for (int k = m; k <= c.N; ++k) s += static_cast<double>(binom(k, m)) / denom * c.prob(k);
    return s;
}

//---------------------------------------------------------------------------//
// Multinomial (intrinsic resolution K)
//---------------------------------------------------------------------------//

/// c_{N_0..N_K} = <:multinom(N; N_0..N_K) pi_0^{N_0} ... pi_K^{N_K}:>.
inline CountDistribution pnr_distribution(const StateSpec& state, const DetectorExpressions& det) {
    const auto& cfg = det.config();
    if (cfg.model != DetectorModel::PNR) throw std::domain_error("pnr_distribution: PNR model required");
    if (state.modes != 1) throw std::domain_error("single-mode state required");
    CountDistribution d;
    d.kind = CountDistribution::Kind::MultiOutcome;
    d.N = cfg.N;
    d.K = cfg.K;
    d.outcomes = multinomial_outcomes(cfg.N, cfg.K);
    for (const auto& o : d.outcomes)
        d.probs.push_back(detail::clip_probability(expect(state, det.outcome(o))));
    d.tail = 1.0 - d.total();
    return d;
}

inline CountDistribution pnr_distribution(const StateSpec& state, const DetectorConfig& cfg) {
    return pnr_distribution(state, DetectorExpressions(cfg));
}

/// <:pi_0^{e_0} ... pi_K^{e_K}:>
inline double pnr_moment(const StateSpec& state, const DetectorExpressions& det, const Outcome& exps) {
    if (det.config().model != DetectorModel::PNR) throw std::domain_error("pnr_moment: PNR model required");
    return expect(state, det.product(exps));
}

inline double pnr_moment(const StateSpec& state, const DetectorConfig& cfg, const Outcome& exps) {
    return pnr_moment(state, DetectorExpressions(cfg), exps);
}

/// Multiplexed moments from counts via multinomial factorial moments:
///   <:prod_j pi_j^{e_j}:> = (N-|e|)!/N! sum_c c_{N_0..N_K} prod_j N_j!/(N_j-e_j)!.
/// For K = 1 this reduces to the binomial click-moment formula.
inline double multiplexed_moment_from_counts(const CountDistribution& c, const Outcome& exps) {
    if (c.kind == CountDistribution::Kind::Single) {
        if (exps.size() != 2 || exps[0] != 0)
            throw std::domain_error("on-off counts: only pure click moments (0, m) are supported");
        return click_moment_from_counts(c, exps[1]);
    }
    if (static_cast<int>(exps.size()) != c.K + 1) throw std::domain_error("exponent vector has wrong length");
    int order = 0;
    for (int e : exps) {
        if (e < 0) throw std::domain_error("negative exponent");
        order += e;
    }
    if (order > c.N) throw std::domain_error("moment order exceeds N");
    double norm = 1.0; // (N-|e|)!/N!
    for (int i = 0; i < order; ++i) norm /= static_cast<double>(c.N - i);
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        double f = 1.0;
        bool zero = false;
        for (std::size_t j = 0; j < exps.size(); ++j) {
            int nj = c.outcomes[i][j];
            if (nj < exps[j]) {
                zero = true;
                break;
            }
            for (int q = 0; q < exps[j]; ++q) f *= static_cast<double>(nj - q);
        }
        if (!zero) s += f * c.probs[i];
    }
    return s * norm;
}

/// Dispatches on the detector model.
inline CountDistribution count_distribution(const StateSpec& state, const DetectorConfig& cfg,
                                            int n_max = 60) {
    switch (cfg.model) {
    case DetectorModel::Photoelectric: return photo_distribution(state, cfg, n_max);
    case DetectorModel::OnOff: return click_distribution(state, cfg);
    case DetectorModel::PNR: return pnr_distribution(state, cfg);
    }
    throw std::logic_error("unknown detector model");
}

} // namespace clickwit
