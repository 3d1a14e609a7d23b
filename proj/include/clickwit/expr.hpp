// Copyright 2026 The clickwit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace clickwit {

using complex = std::complex<double>;

/// One summand coeff * :G^power * exp(-decay * G): of a normally ordered
/// expression, where G = rate * n + offset is the detector response.
struct Term {
    double coeff = 0.0;
    int power = 0;
    double decay = 0.0;
};

namespace detail {

/// exp(a + b). The factors are exponentiated separately when neither can
/// overflow, so terms sharing `a` carry identical rounding in exp(a).
inline complex exp_sum(complex a, complex b) {
    constexpr double kSafe = 700.0;
    if (std::abs(a.real()) <= kSafe && std::abs(b.real()) <= kSafe) return std::exp(a) * std::exp(b);
    return std::exp(a + b);
}

/// exp(b) - 1 without cancellation for small |b|.
inline complex expm1(complex b) {
    const double c = std::cos(b.imag()), s = std::sin(b.imag());
    const double h = std::sin(0.5 * b.imag());
    return {std::expm1(b.real()) * c - 2.0 * h * h, std::exp(b.real()) * s};
}

/// Q_K(g) = 1 - exp(-g) sum_{j<K} g^j/j!, the Poisson tail. Near g = 0 the
/// tail series is summed directly to avoid cancellation.
inline complex poisson_tail(int K, complex g) {
    if (K <= 0) return {1.0, 0.0};
    if (std::abs(g) <= 1.0) {
        complex term{1.0, 0.0};
        for (int j = 1; j <= K; ++j) term *= g / static_cast<double>(j);
        complex sum = term;
        for (int j = K + 1; j < K + 80; ++j) {
            term *= g / static_cast<double>(j);
            sum += term;
            if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
        }
        return std::exp(-g) * sum;
    }
    complex term{1.0, 0.0}, head{1.0, 0.0};
    for (int j = 1; j < K; ++j) {
        term *= g / static_cast<double>(j);
        head += term;
    }
    return 1.0 - std::exp(-g) * head;
}

} // namespace detail

/// Normally ordered function of the photon number,
///
///   sum_j coeff_j :G^{power_j} exp(-decay_j G):,   G = rate * n + offset.
///
/// Under normal ordering these behave like scalar functions of G, so sums
/// and products act termwise (powers add, decays add). Terms are kept in
/// canonical order with like terms merged and exact zeros dropped.
///
/// Products of monomials and Poisson tails additionally carry the factored
/// form coeff * G^power * exp(-decay G) * Q_K(G)^tail_exp, which is used for
/// evaluation. Expanded powers of 1 - exp(-G) cancel badly for small G.
class NOExpr {
  public:
    struct Factored {
        double coeff = 1.0;
        int power = 0;
        double decay = 0.0;
        int tail_order = 0;
        int tail_exp = 0;
    };

    NOExpr() = default;
    NOExpr(double rate, double offset) : rate_(rate), offset_(offset) { validate_response(); }
    NOExpr(double rate, double offset, std::vector<Term> terms)
        : rate_(rate), offset_(offset), terms_(std::move(terms)) {
        validate_response();
        for (const Term& t : terms_)
            if (!std::isfinite(t.coeff) || t.power < 0 || !std::isfinite(t.decay))
                throw std::domain_error("NOExpr: invalid term");
        canonicalize();
    }

    static NOExpr constant(double c, double rate = 1.0, double offset = 0.0) {
        return monomial(rate, offset, c, 0, 0.0);
    }
    static NOExpr one(double rate = 1.0, double offset = 0.0) { return constant(1.0, rate, offset); }
    /// coeff * :G^power * exp(-decay G):
    static NOExpr monomial(double rate, double offset, double coeff, int power, double decay) {
        NOExpr e(rate, offset, {{coeff, power, decay}});
        e.factored_ = Factored{coeff, power, decay, 0, 0};
        return e;
    }
    /// Q_K(G) = 1 - sum_{j<K} :G^j/j! exp(-G):
    static NOExpr poisson_tail(double rate, double offset, int K) {
        if (K < 1) throw std::domain_error("NOExpr: tail order must be positive");
        std::vector<Term> terms{{1.0, 0, 0.0}};
        double inv_fact = 1.0;
        for (int j = 0; j < K; ++j) {
            if (j > 0) inv_fact /= static_cast<double>(j);
            terms.push_back({-inv_fact, j, 1.0});
        }
        NOExpr e(rate, offset, std::move(terms));
        e.factored_ = Factored{1.0, 0, 0.0, K, 1};
        return e;
    }

    double rate() const { return rate_; }
    double offset() const { return offset_; }
    const std::vector<Term>& terms() const { return terms_; }
    const std::optional<Factored>& factored() const { return factored_; }
    /// The same expression without its factored form.
    NOExpr expanded() const {
        NOExpr e = *this;
        e.factored_.reset();
        return e;
    }
    bool is_constant() const {
        return std::all_of(terms_.begin(), terms_.end(),
                           [](const Term& t) { return t.power == 0 && t.decay == 0.0; });
    }
    int max_power() const {
        int p = 0;
        for (const Term& t : terms_) p = std::max(p, t.power);
        return p;
    }

    NOExpr& operator+=(const NOExpr& o) {
        adopt_response(o);
        if (terms_.empty())
            factored_ = o.factored_;
        else if (!o.terms_.empty())
            factored_.reset();
        terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
        canonicalize();
        return *this;
    }
    NOExpr& operator-=(const NOExpr& o) { return *this += o * -1.0; }
    NOExpr& operator*=(double s) {
        for (Term& t : terms_) t.coeff *= s;
        if (factored_) factored_->coeff *= s;
        canonicalize();
        return *this;
    }

    friend NOExpr operator+(NOExpr a, const NOExpr& b) { return a += b; }
    friend NOExpr operator-(NOExpr a, const NOExpr& b) { return a -= b; }
    friend NOExpr operator*(NOExpr a, double s) { return a *= s; }
    friend NOExpr operator*(double s, NOExpr a) { return a *= s; }

    friend NOExpr operator*(const NOExpr& a, const NOExpr& b) {
        NOExpr out = a;
        out.adopt_response(b);
        out.terms_.clear();
        out.terms_.reserve(a.terms_.size() * b.terms_.size());
        for (const Term& x : a.terms_)
            for (const Term& y : b.terms_)
                out.terms_.push_back({x.coeff * y.coeff, x.power + y.power, x.decay + y.decay});
        out.factored_.reset();
        if (a.factored_ && b.factored_) {
            const Factored& f = *a.factored_;
            const Factored& g = *b.factored_;
            if (f.tail_exp == 0 || g.tail_exp == 0 || f.tail_order == g.tail_order) {
                out.factored_ = Factored{f.coeff * g.coeff, f.power + g.power, f.decay + g.decay,
                                         f.tail_exp ? f.tail_order : g.tail_order, f.tail_exp + g.tail_exp};
            }
        }
        out.canonicalize();
        return out;
    }

    /// Value of the underlying scalar function at a (possibly complex) photon
    /// number x; this is h(x) in <alpha|:h(n):|beta> = <alpha|beta> h(alpha* beta).
    complex evaluate(complex x) const { return evaluate_scaled(x, complex{0.0, 0.0}); }

    /// exp(log_factor) * h(x), combining exponents before exponentiation so
    /// that large cross-term exponents of cat states do not overflow.
    complex evaluate_scaled(complex x, complex log_factor) const {
        const complex g = rate_ * x + offset_;
        if (factored_) return evaluate_factored(g, log_factor);
        const bool g_zero = g == complex{0.0, 0.0};
        const complex log_g = g_zero ? complex{} : std::log(g);
        complex sum{0.0, 0.0};
        for (const Term& t : terms_) {
            if (t.power > 0 && g_zero) continue;
            const complex power_part = t.power > 0 ? static_cast<double>(t.power) * log_g : complex{};
            sum += t.coeff * detail::exp_sum(power_part, log_factor - t.decay * g);
        }
        return sum;
    }

    /// evaluate_scaled(x, log_factor) as lead + rest, where lead replaces
    /// exp(log_factor - d G) of each term by exp(-d |G|).
    std::pair<complex, complex> evaluate_split(complex x, complex log_factor) const {
        const complex g = rate_ * x + offset_;
        const double abs_g = std::abs(g);
        complex lead{}, rest{};
        // The lead carries exp(a - decay |G|), which is the same for all
        // component pairs with equal |G|.
        auto add = [&](complex coeff, complex a, complex b, double decay) {
            const complex lead_exp = a - decay * abs_g, rest_exp = b + decay * abs_g;
            if (std::abs(lead_exp.real()) <= 700.0 && std::abs(rest_exp.real()) <= 700.0) {
                const complex e = coeff * std::exp(lead_exp);
                lead += e;
                rest += e * detail::expm1(rest_exp);
            } else {
                lead += coeff * std::exp(a + b);
            }
        };
        if (factored_) {
            const Factored& f = *factored_;
            if (f.coeff == 0.0) return {};
            complex a{};
            if (f.power > 0) {
                if (g == complex{}) return {};
                a += static_cast<double>(f.power) * std::log(g);
            }
            if (f.tail_exp > 0) {
                const complex q = detail::poisson_tail(f.tail_order, g);
                if (q == complex{}) return {};
                a += static_cast<double>(f.tail_exp) * std::log(q);
            }
            add(f.coeff, a, log_factor - f.decay * g, f.decay);
            return {lead, rest};
        }
        const bool g_zero = g == complex{0.0, 0.0};
        const complex log_g = g_zero ? complex{} : std::log(g);
        for (const Term& t : terms_) {
            if (t.power > 0 && g_zero) continue;
            const complex a = t.power > 0 ? static_cast<double>(t.power) * log_g : complex{};
            add(t.coeff, a, log_factor - t.decay * g, t.decay);
        }
        return {lead, rest};
    }

    /// Same as evaluate_scaled, but the sum of absolute values of the summands.
    double magnitude_scaled(complex x, complex log_factor) const {
        const complex g = rate_ * x + offset_;
        if (factored_) return std::abs(evaluate_factored(g, log_factor));
        const bool g_zero = g == complex{0.0, 0.0};
        const double log_abs_g = g_zero ? 0.0 : std::log(std::abs(g));
        double sum = 0.0;
        for (const Term& t : terms_) {
            if (t.power > 0 && g_zero) continue;
            double e = (log_factor - t.decay * g).real();
            if (t.power > 0) e += t.power * log_abs_g;
            sum += std::abs(t.coeff) * std::exp(e);
        }
        return sum;
    }

    std::string str() const {
        std::string s;
        for (const Term& t : terms_) {
            if (!s.empty()) s += " + ";
            s += std::to_string(t.coeff) + "*G^" + std::to_string(t.power) + "*e^{-" +
                 std::to_string(t.decay) + "G}";
        }
        return s.empty() ? "0" : s;
    }

  private:
    complex evaluate_factored(complex g, complex log_factor) const {
        const Factored& f = *factored_;
        if (f.coeff == 0.0) return {};
        complex power_part{};
        if (f.power > 0) {
            if (g == complex{}) return {};
            power_part += static_cast<double>(f.power) * std::log(g);
        }
        if (f.tail_exp > 0) {
            const complex q = detail::poisson_tail(f.tail_order, g);
            if (q == complex{}) return {};
            power_part += static_cast<double>(f.tail_exp) * std::log(q);
        }
        return f.coeff * detail::exp_sum(power_part, log_factor - f.decay * g);
    }

    void validate_response() const {
        if (!(rate_ >= 0.0) || !(offset_ >= 0.0) || !std::isfinite(rate_) || !std::isfinite(offset_))
            throw std::domain_error("NOExpr: rate and offset must be finite and non-negative");
    }

    // Constant expressions do not depend on the response and can be combined
    // with any other expression.
    void adopt_response(const NOExpr& o) {
        if (rate_ == o.rate_ && offset_ == o.offset_) return;
        if (o.is_constant()) return;
        if (is_constant()) {
            rate_ = o.rate_;
            offset_ = o.offset_;
            return;
        }
        throw std::domain_error("NOExpr: incompatible response functions");
    }

    void canonicalize() {
        std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
            return a.power != b.power ? a.power < b.power : a.decay < b.decay;
        });
        std::vector<Term> merged;
        merged.reserve(terms_.size());
        for (const Term& t : terms_) {
            if (!merged.empty() && merged.back().power == t.power && merged.back().decay == t.decay)
                merged.back().coeff += t.coeff;
            else
                merged.push_back(t);
        }
        std::erase_if(merged, [](const Term& t) { return t.coeff == 0.0; });
        terms_ = std::move(merged);
    }

    double rate_ = 1.0;
    double offset_ = 0.0;
    std::vector<Term> terms_;
    std::optional<Factored> factored_;
};

/// e^k for k >= 0 by repeated squaring in the expression algebra.
inline NOExpr pow(const NOExpr& e, int k) {
    if (k < 0) throw std::domain_error("NOExpr pow: negative exponent");
    NOExpr result = NOExpr::one(e.rate(), e.offset());
    NOExpr base = e;
    while (k > 0) {
        if (k & 1) result = result * base;
        k >>= 1;
        if (k > 0) base = base * base;
    }
    return result;
}

} // namespace clickwit
