// Copyright 2026 The clickwit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Quantum states of light and normally ordered expectation values.
//
// Two independent evaluation routes are provided:
//  - expect(): analytic route for (mixtures of) coherent superpositions via
//    <alpha|:h(n):|beta> = <alpha|beta> h(alpha* beta), applied per mode;
//  - expect_fock(): brute-force route on truncated Fock vectors via
//    <n|:n^q exp(-s n):|n> = n!/(n-q)! (1-s)^(n-q).
#pragma once

#include <cmath>
#include <complex>
#include <numeric>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "clickwit/expr.hpp"
#include "clickwit/numerics.hpp"

namespace clickwit {

inline constexpr double kNormTolerance = 1e-12;

/// Raised when a Fock truncation discards more probability than allowed.
class TruncationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct CoherentComponent {
    complex weight;
    std::vector<complex> amplitudes; ///< one per mode
};

/// sum_i weight_i |alpha_i>, a (multimode) superposition of coherent states.
struct CoherentSuperposition {
    std::vector<CoherentComponent> components;
};

/// Single-mode pure state sum_n coeffs[n] |n>, n = 0..n_max.
struct FockVector {
    std::vector<complex> coeffs;
    int n_max() const { return static_cast<int>(coeffs.size()) - 1; }
};

struct MixturePart;

/// Classical mixture sum_i prob_i rho_i.
struct Mixture {
    std::vector<MixturePart> parts;
};

struct StateSpec {
    std::variant<CoherentSuperposition, FockVector, Mixture> value;
    int modes = 1;
};

struct MixturePart {
    double prob;
    StateSpec state;
};

enum class Parity { Even, Odd };

inline std::string to_string(Parity p) { return p == Parity::Even ? "even" : "odd"; }

//---------------------------------------------------------------------------//
// Overlaps and norms
//---------------------------------------------------------------------------//

/// log <alpha|beta> for single-mode coherent states.
inline complex log_overlap(complex alpha, complex beta) {
    return -0.5 * std::norm(alpha) - 0.5 * std::norm(beta) + std::conj(alpha) * beta;
}

inline double norm_squared(const CoherentSuperposition& s) {
    complex total{};
    for (const auto& a : s.components)
        for (const auto& b : s.components) {
            complex l{};
            for (std::size_t m = 0; m < a.amplitudes.size(); ++m)
                l += log_overlap(a.amplitudes[m], b.amplitudes[m]);
            total += std::conj(a.weight) * b.weight * std::exp(l);
        }
    return total.real();
}

inline double norm_squared(const FockVector& f) {
    double s = 0.0;
    for (const complex& c : f.coeffs) s += std::norm(c);
    return s;
}

namespace detail {

inline void validate(const StateSpec& s);

inline void validate_part(const CoherentSuperposition& cs, int modes) {
    if (cs.components.empty()) throw std::domain_error("superposition has no components");
    for (const auto& c : cs.components)
        if (static_cast<int>(c.amplitudes.size()) != modes)
            throw std::domain_error("component amplitude count differs from mode count");
    if (std::abs(norm_squared(cs) - 1.0) > kNormTolerance)
        throw std::domain_error("coherent superposition is not normalized");
}

inline void validate_part(const FockVector& f, int modes) {
    if (modes != 1) throw std::domain_error("Fock vectors are single-mode");
    if (f.coeffs.empty()) throw std::domain_error("empty Fock vector");
    if (std::abs(norm_squared(f) - 1.0) > kNormTolerance)
        throw std::domain_error("Fock vector is not normalized");
}

inline void validate_part(const Mixture& m, int modes) {
    if (m.parts.empty()) throw std::domain_error("empty mixture");
    double total = 0.0;
    for (const auto& p : m.parts) {
        if (p.prob < 0.0) throw std::domain_error("negative mixture weight");
        if (p.state.modes != modes) throw std::domain_error("mixture parts differ in mode count");
        validate(p.state);
        total += p.prob;
    }
    if (std::abs(total - 1.0) > kNormTolerance)
        throw std::domain_error("mixture weights do not sum to one");
}

inline void validate(const StateSpec& s) {
    if (s.modes < 1) throw std::domain_error("state needs at least one mode");
    std::visit([&](const auto& v) { validate_part(v, s.modes); }, s.value);
}

} // namespace detail

//---------------------------------------------------------------------------//
// Constructors
//---------------------------------------------------------------------------//

inline StateSpec coherent_product(std::vector<complex> amplitudes) {
    int modes = static_cast<int>(amplitudes.size());
    StateSpec s{CoherentSuperposition{{{complex{1.0, 0.0}, std::move(amplitudes)}}}, modes};
    detail::validate(s);
    return s;
}

inline StateSpec coherent(complex alpha) { return coherent_product({alpha}); }

inline StateSpec vacuum(int modes = 1) {
    return coherent_product(std::vector<complex>(static_cast<std::size_t>(modes)));
}

/// (|alpha> +- |-alpha>) / sqrt(2(1 +- exp(-2 ||alpha||^2))), any number of modes.
inline StateSpec make_cat(std::vector<complex> alpha, Parity parity) {
    if (alpha.empty()) throw std::domain_error("make_cat: need at least one mode");
    double n2 = 0.0;
    for (const complex& a : alpha) n2 += std::norm(a);
    const int modes = static_cast<int>(alpha.size());
    if (n2 == 0.0) {
        if (parity == Parity::Odd) throw std::domain_error("odd cat state undefined at alpha = 0");
        return vacuum(modes);
    }
    // 1 + e^{-2x} and 1 - e^{-2x} = -expm1(-2x), the latter without cancellation.
    const double denom = parity == Parity::Even ? 2.0 * (1.0 + std::exp(-2.0 * n2))
                                                : -2.0 * std::expm1(-2.0 * n2);
    const double w = 1.0 / std::sqrt(denom);
    std::vector<complex> minus(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) minus[i] = -alpha[i];
    const double sign = parity == Parity::Even ? 1.0 : -1.0;
    StateSpec s{CoherentSuperposition{{{complex{w, 0.0}, std::move(alpha)},
                                       {complex{sign * w, 0.0}, std::move(minus)}}},
                modes};
    detail::validate(s);
    return s;
}

inline StateSpec make_cat(complex alpha, Parity parity) {
    return make_cat(std::vector<complex>{alpha}, parity);
}

inline StateSpec fock_vector(std::vector<complex> coeffs) {
    StateSpec s{FockVector{std::move(coeffs)}, 1};
    detail::validate(s);
    return s;
}

inline StateSpec fock_state(int n) {
    if (n < 0) throw std::domain_error("negative photon number");
    std::vector<complex> c(static_cast<std::size_t>(n) + 1);
    c.back() = 1.0;
    return fock_vector(std::move(c));
}

inline StateSpec mixture(std::vector<MixturePart> parts) {
    if (parts.empty()) throw std::domain_error("empty mixture");
    int modes = parts.front().state.modes;
    StateSpec s{Mixture{std::move(parts)}, modes};
    detail::validate(s);
    return s;
}

//---------------------------------------------------------------------------//
// Analytic route
//---------------------------------------------------------------------------//

/// Expectation value together with the sum of magnitudes of the summands
/// that produced it; the latter bounds the cancellation error.
struct Expectation {
    double value = 0.0;
    double magnitude = 0.0;
};

namespace detail {

inline Expectation expect_coherent(const CoherentSuperposition& s,
                                   std::span<const NOExpr> per_mode) {
    // Leads and remainders are summed separately; for cats the leads cancel
    // exactly and the remainders carry the value.
    complex lead_total{}, rest_total{};
    double mag = 0.0;
    for (const auto& a : s.components) {
        for (const auto& b : s.components) {
            complex lead = std::conj(a.weight) * b.weight, rest{};
            double pmag = std::abs(lead);
            for (std::size_t m = 0; m < per_mode.size(); ++m) {
                const complex x = std::conj(a.amplitudes[m]) * b.amplitudes[m];
                const complex l = log_overlap(a.amplitudes[m], b.amplitudes[m]);
                const auto [lm, rm] = per_mode[m].evaluate_split(x, l);
                rest = rest * (lm + rm) + lead * rm;
                lead *= lm;
                pmag *= per_mode[m].magnitude_scaled(x, l);
            }
            lead_total += lead;
            rest_total += rest;
            mag += pmag;
        }
    }
    const complex total = lead_total + rest_total;
    if (std::abs(total.imag()) > 1e-10 * std::max(1.0, mag))
        throw std::logic_error("expectation value has an imaginary residual");
    return {total.real(), mag};
}

} // namespace detail

inline double fock_diagonal(int n, const NOExpr& expr);

namespace detail {

inline Expectation expect_impl(const StateSpec& state, std::span<const NOExpr> per_mode) {
    if (static_cast<int>(per_mode.size()) != state.modes)
        throw std::domain_error("expression count differs from mode count");
    return std::visit(
        [&](const auto& v) -> Expectation {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, CoherentSuperposition>) {
                return expect_coherent(v, per_mode);
            } else if constexpr (std::is_same_v<T, FockVector>) {
                Expectation e;
                for (int n = 0; n <= v.n_max(); ++n) {
                    const double p = std::norm(v.coeffs[static_cast<std::size_t>(n)]);
                    if (p == 0.0) continue;
                    const double d = fock_diagonal(n, per_mode[0]);
                    e.value += p * d;
                    e.magnitude += p * std::abs(d);
                }
                return e;
            } else {
                Expectation e;
                for (const auto& p : v.parts) {
                    Expectation pe = expect_impl(p.state, per_mode);
                    e.value += p.prob * pe.value;
                    e.magnitude += p.prob * pe.magnitude;
                }
                return e;
            }
        },
        state.value);
}

} // namespace detail

/// <:prod_m h_m(n_m):> with one expression per mode.
inline Expectation expect_modes(const StateSpec& state, std::span<const NOExpr> per_mode) {
    return detail::expect_impl(state, per_mode);
}

/// <:h(n_mode):> with the identity on all other modes.
inline Expectation expect_detailed(const StateSpec& state, const NOExpr& expr, int mode = 0) {
    if (mode < 0 || mode >= state.modes) throw std::domain_error("mode index out of range");
    std::vector<NOExpr> per_mode(static_cast<std::size_t>(state.modes), NOExpr::one());
    per_mode[static_cast<std::size_t>(mode)] = expr;
    return detail::expect_impl(state, per_mode);
}

inline double expect(const StateSpec& state, const NOExpr& expr, int mode = 0) {
    return expect_detailed(state, expr, mode).value;
}

//---------------------------------------------------------------------------//
// Fock route
//---------------------------------------------------------------------------//

/// <n|:h(n):|n> from the closed form for diagonal normally ordered operators.
inline double fock_diagonal(int n, const NOExpr& expr) {
    const double r = expr.rate();
    const double nu = expr.offset();
    double total = 0.0;
    for (const Term& t : expr.terms()) {
        const double s = t.decay * r;
        double acc = 0.0;
        double falling = 1.0; // n!/(n-q)!
        for (int q = 0; q <= t.power && q <= n; ++q) {
            if (q > 0) falling *= static_cast<double>(n - q + 1);
            double pre = static_cast<double>(binom(t.power, q)) * std::pow(r, q) *
                         std::pow(nu, t.power - q);
            acc += pre * falling * std::pow(1.0 - s, n - q);
        }
        total += t.coeff * std::exp(-t.decay * nu) * acc;
    }
    return total;
}

inline double expect_fock(const StateSpec& state, const NOExpr& expr) {
    return std::visit(
        [&](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, FockVector>) {
                double s = 0.0;
                for (int n = 0; n <= v.n_max(); ++n) {
                    double p = std::norm(v.coeffs[static_cast<std::size_t>(n)]);
                    if (p != 0.0) s += p * fock_diagonal(n, expr);
                }
                return s;
            } else if constexpr (std::is_same_v<T, Mixture>) {
                double s = 0.0;
                for (const auto& p : v.parts) s += p.prob * expect_fock(p.state, expr);
                return s;
            } else {
                throw std::domain_error("expect_fock: convert the state with to_fock first");
            }
        },
        state.value);
}

/// Fock expansion of a single-mode state, truncated at n_max. Throws
/// TruncationError when the discarded probability exceeds max_tail.
inline StateSpec to_fock(const StateSpec& state, int n_max, double max_tail = 1e-12) {
    if (state.modes != 1) throw std::domain_error("to_fock: single-mode states only");
    if (n_max < 0) throw std::domain_error("to_fock: negative n_max");
    return std::visit(
        [&](const auto& v) -> StateSpec {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, FockVector>) {
                FockVector f = v;
                double tail = 0.0;
                for (int n = n_max + 1; n <= f.n_max(); ++n)
                    tail += std::norm(f.coeffs[static_cast<std::size_t>(n)]);
                if (tail > max_tail) throw TruncationError("to_fock: tail mass " + std::to_string(tail));
                f.coeffs.resize(static_cast<std::size_t>(n_max) + 1);
                return StateSpec{f, 1};
            } else if constexpr (std::is_same_v<T, CoherentSuperposition>) {
                FockVector f;
                f.coeffs.assign(static_cast<std::size_t>(n_max) + 1, complex{});
                for (const auto& c : v.components) {
                    const complex a = c.amplitudes[0];
                    complex term = c.weight * std::exp(-0.5 * std::norm(a)); // alpha^n/sqrt(n!)
                    for (int n = 0; n <= n_max; ++n) {
                        if (n > 0) term *= a / std::sqrt(static_cast<double>(n));
                        f.coeffs[static_cast<std::size_t>(n)] += term;
                    }
                }
                const double tail = 1.0 - norm_squared(f);
                if (tail > max_tail) throw TruncationError("to_fock: tail mass " + std::to_string(tail));
                return StateSpec{f, 1};
            } else {
                Mixture m;
                for (const auto& p : v.parts) m.parts.push_back({p.prob, to_fock(p.state, n_max, max_tail)});
                return StateSpec{m, 1};
            }
        },
        state.value);
}

/// to_fock with n_max raised from 60 until the tail mass drops below 1e-14.
inline StateSpec to_fock_auto(const StateSpec& state, int n_max = 60) {
    for (;; n_max *= 2) {
        try {
            return to_fock(state, n_max, 1e-14);
        } catch (const TruncationError&) {
            if (n_max > 4096) throw;
        }
    }
}

/// Photon-number distribution p_n, n = 0..n_max, of a single-mode state.
inline std::vector<double> photon_numbers(const StateSpec& state, int n_max) {
    StateSpec f = to_fock(state, n_max, 1.0);
    std::vector<double> p(static_cast<std::size_t>(n_max) + 1, 0.0);
    auto accumulate = [&](auto&& self, const StateSpec& s, double w) -> void {
        if (const auto* fv = std::get_if<FockVector>(&s.value)) {
            for (int n = 0; n <= n_max; ++n) p[static_cast<std::size_t>(n)] += w * std::norm(fv->coeffs[static_cast<std::size_t>(n)]);
        } else {
            for (const auto& part : std::get<Mixture>(s.value).parts) self(self, part.state, w * part.prob);
        }
    };
    accumulate(accumulate, f, 1.0);
    return p;
}

/// Photon numbers carrying probability above 1e-14 (lossless detection).
inline std::set<int> cat_parity_check(const StateSpec& state, int n_max) {
    std::set<int> support;
    auto p = photon_numbers(state, n_max);
    for (int n = 0; n <= n_max; ++n)
        if (p[static_cast<std::size_t>(n)] > 1e-14) support.insert(n);
    return support;
}

/// <N> = sum over modes of <n_m>.
inline double total_photon_number(const StateSpec& state) {
    const NOExpr n = NOExpr::monomial(1.0, 0.0, 1.0, 1, 0.0);
    double total = 0.0;
    for (int m = 0; m < state.modes; ++m) {
        if (std::holds_alternative<FockVector>(state.value))
            total += expect_fock(state, n);
        else
            total += expect(state, n, m);
    }
    return total;
}

} // namespace clickwit
