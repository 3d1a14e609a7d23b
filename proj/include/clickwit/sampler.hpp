// Copyright 2026 The clickwit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo sampling of counting distributions and bootstrap estimates of
// the witnesses built from the resulting histograms.
//
// Random numbers come from SplitMix64 used as a counter-based generator:
// draw i of stream s is mix(s + (i + 1) * 0x9E3779B97F4A7C15), with
//   mix(z): z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//           z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//           return z ^ (z >> 31);
// and a uniform double in [0, 1) is (draw >> 11) * 2^-53. Outcomes are drawn
// by inverse CDF over the lexicographic outcome order, so a (seed, shots,
// distribution) triple fixes the histogram bit for bit on every platform.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "clickwit/detectors.hpp"
#include "clickwit/parallel.hpp"
#include "clickwit/witnesses.hpp"

namespace clickwit {

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return splitmix64_mix(state_);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

/// Histogram of sampled outcomes.
struct SampleRun {
    std::uint64_t seed = 0;
    std::uint64_t shots = 0;
    CountDistribution::Kind kind = CountDistribution::Kind::Single;
    int N = 0;
    int K = 1;
    std::vector<Outcome> outcomes;
    std::vector<std::uint64_t> counts;

    /// Relative frequencies as a counting distribution.
    CountDistribution empirical() const {
        CountDistribution d;
        d.kind = kind;
        d.N = N;
        d.K = K;
        d.outcomes = outcomes;
        for (auto c : counts) d.probs.push_back(static_cast<double>(c) / static_cast<double>(shots));
        return d;
    }
};

namespace detail {

inline std::vector<double> cdf_of(const std::vector<double>& probs) {
    double total = 0.0;
    for (double p : probs) total += p;
    if (!(total > 0.0)) throw std::domain_error("distribution has no mass");
    std::vector<double> cdf;
    double run = 0.0;
    for (double p : probs) {
        run += std::max(p, 0.0);
        cdf.push_back(run / total);
    }
    return cdf;
}

inline std::vector<std::uint64_t> draw_histogram(const std::vector<double>& cdf, std::uint64_t shots,
                                                 std::uint64_t seed) {
    std::vector<std::uint64_t> hist(cdf.size(), 0);
    SplitMix64 rng(seed);
    for (std::uint64_t s = 0; s < shots; ++s) {
        double u = rng.uniform();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t idx = std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
        ++hist[idx];
    }
    return hist;
}

} // namespace detail

/// Draws `shots` outcomes from dist by inverse CDF.
inline SampleRun sample(const CountDistribution& dist, std::uint64_t shots, std::uint64_t seed) {
    if (shots == 0) throw std::domain_error("sample: shots must be positive");
    if (std::abs(dist.total() - 1.0) > 1e-10 && !dist.truncated)
        throw std::domain_error("sample: distribution is not normalized");
    SampleRun run;
    run.seed = seed;
    run.shots = shots;
    run.kind = dist.kind;
    run.N = dist.N;
    run.K = dist.K;
    run.outcomes = dist.outcomes;
    run.counts = detail::draw_histogram(detail::cdf_of(dist.probs), shots, seed);
    return run;
}

//---------------------------------------------------------------------------//
// Bootstrap
//---------------------------------------------------------------------------//

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct EmpiricalWitness {
    WitnessReport report;
    Estimate min_eig;
    std::vector<double> minors_stderr;
    /// Scalar on-off criteria (klyshko_int, klyshko_half, qb, skewness) when defined.
    std::map<std::string, Estimate> scalars;
    Verdict verdict = Verdict::Inconclusive;
    /// Outcomes referenced by the count matrix that were never observed.
    std::vector<std::string> empty_classes;
    int resamples = 0;
};

inline constexpr int kDefaultResamples = 200;

namespace detail {

inline std::string outcome_label(const Outcome& o) {
    std::string s;
    for (std::size_t i = 0; i < o.size(); ++i) {
        if (i) s += ":";
        s += std::to_string(o[i]);
    }
    return s;
}

inline std::map<std::string, double> click_scalars(const CountDistribution& c, const DetectorConfig& cfg) {
    std::map<std::string, double> out;
    if (cfg.model != DetectorModel::OnOff) return out;
    auto put = [&](const std::string& name, double v) {
        if (std::isfinite(v)) out[name] = v;
    };
    if (c.N >= 2) put("klyshko_int", klyshko_ratio(c, KlyshkoVariant::Integer).ratio);
    if (c.N >= 3) put("klyshko_half", klyshko_ratio(c, KlyshkoVariant::Half).ratio);
    try {
        put("qb", qb_parameter(c).qb);
    } catch (const std::domain_error&) {
    }
    if (c.N >= 3) put("skewness", skewness_witness(c).det_moments);
    return out;
}

inline double std_dev(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

} // namespace detail

/// "nonclassical" needs min_eig < -3 stderr; |min_eig| <= 3 stderr is inconclusive.
inline Verdict sampling_verdict(double min_eig, double std_error, double tolerance) {
    if (std_error == 0.0) return min_eig < -tolerance ? Verdict::Nonclassical : Verdict::NoViolation;
    if (min_eig < -3.0 * std_error) return Verdict::Nonclassical;
    if (std::abs(min_eig) <= 3.0 * std_error) return Verdict::Inconclusive;
    return Verdict::NoViolation;
}

/// Witness from the sampled histogram with bootstrap standard errors:
/// each resample redraws `shots` outcomes from the empirical frequencies.
/// Resample b uses stream splitmix64_mix(seed ^ (b + 1)), so results do not
/// depend on the thread count.
inline EmpiricalWitness empirical_witness(const SampleRun& run, const DetectorConfig& cfg, const IndexSet& set,
                                          int resamples = kDefaultResamples) {
    if (resamples < 0) throw std::domain_error("negative resample count");
    const CountDistribution emp = run.empirical();
    if (emp.kind == CountDistribution::Kind::Multimode) throw std::domain_error("multimode histograms are not supported");
    if ((cfg.model == DetectorModel::PNR) != (emp.kind == CountDistribution::Kind::MultiOutcome) ||
        (cfg.multiplexed() && emp.N != cfg.N))
        throw std::domain_error("histogram outcome space does not match the detector");

    EmpiricalWitness w;
    w.resamples = resamples;
    w.report = witness_matrix_from_counts(emp, cfg, set);
    w.min_eig.value = w.report.min_eig;

    if (set.kind == MatrixKind::Counts) {
        for (const auto& k : set.elements)
            for (const auto& l : set.elements) {
                Outcome s = entry_exponents(cfg, set.kind, k, l);
                Outcome needed = cfg.model == DetectorModel::OnOff ? Outcome{s[1]} : s;
                auto label = detail::outcome_label(needed);
                if (emp.prob(needed) == 0.0 &&
                    std::find(w.empty_classes.begin(), w.empty_classes.end(), label) == w.empty_classes.end())
                    w.empty_classes.push_back(label);
            }
    }

    auto base_scalars = detail::click_scalars(emp, cfg);
    const auto cdf = detail::cdf_of(emp.probs);
    const std::size_t dim = w.report.matrix.dim();
    std::vector<double> mins(static_cast<std::size_t>(resamples));
    std::vector<std::vector<double>> minors(static_cast<std::size_t>(resamples));
    std::vector<std::map<std::string, double>> scalars(static_cast<std::size_t>(resamples));
    parallel_for(static_cast<std::size_t>(resamples), [&](std::size_t b) {
        SampleRun r = run;
        r.counts = detail::draw_histogram(cdf, run.shots, splitmix64_mix(run.seed ^ (b + 1)));
        CountDistribution d = r.empirical();
        WitnessReport rep = witness_matrix_from_counts(d, cfg, set);
        mins[b] = rep.min_eig;
        minors[b] = rep.minors;
        scalars[b] = detail::click_scalars(d, cfg);
    });

    w.min_eig.std_error = detail::std_dev(mins);
    for (std::size_t i = 0; i < dim; ++i) {
        std::vector<double> xs;
        for (const auto& m : minors) xs.push_back(m[i]);
        w.minors_stderr.push_back(detail::std_dev(xs));
    }
    for (const auto& [name, value] : base_scalars) {
        std::vector<double> xs;
        for (const auto& s : scalars) {
            auto it = s.find(name);
            if (it != s.end()) xs.push_back(it->second);
        }
        w.scalars[name] = {value, detail::std_dev(xs)};
    }
    w.verdict = sampling_verdict(w.min_eig.value, w.min_eig.std_error, w.report.tolerance);
    return w;
}

//---------------------------------------------------------------------------//
// Histogram CSV: "outcome,count" header, one row per outcome, labels as
// "k" for single-index outcomes and "N0:N1:...:NK" for multinomial ones.
//---------------------------------------------------------------------------//

inline void write_histogram_csv(std::ostream& os, const SampleRun& run) {
    os << "outcome,count\n";
    for (std::size_t i = 0; i < run.outcomes.size(); ++i)
        os << detail::outcome_label(run.outcomes[i]) << ',' << run.counts[i] << '\n';
}

/// Reads a histogram for the given detector. Outcomes missing from the file
/// count as zero; unknown outcomes are rejected.
inline SampleRun read_histogram_csv(std::istream& is, const DetectorConfig& cfg, int n_max = 60) {
    SampleRun run;
    switch (cfg.model) {
    case DetectorModel::Photoelectric:
        run.kind = CountDistribution::Kind::Single;
        run.N = n_max;
        for (int n = 0; n <= n_max; ++n) run.outcomes.push_back({n});
        break;
    case DetectorModel::OnOff:
        run.kind = CountDistribution::Kind::Single;
        run.N = cfg.N;
        for (int k = 0; k <= cfg.N; ++k) run.outcomes.push_back({k});
        break;
    case DetectorModel::PNR:
        run.kind = CountDistribution::Kind::MultiOutcome;
        run.N = cfg.N;
        run.K = cfg.K;
        run.outcomes = multinomial_outcomes(cfg.N, cfg.K);
        break;
    }
    run.counts.assign(run.outcomes.size(), 0);
    std::string line;
    if (!std::getline(is, line) || line.rfind("outcome,count", 0) != 0)
        throw std::invalid_argument("histogram CSV must start with 'outcome,count'");
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("malformed histogram row: " + line);
        Outcome o;
        std::stringstream label(line.substr(0, comma));
        std::string part;
        while (std::getline(label, part, ':')) o.push_back(std::stoi(part));
        auto it = std::lower_bound(run.outcomes.begin(), run.outcomes.end(), o);
        if (it == run.outcomes.end() || *it != o) throw std::invalid_argument("unknown outcome " + line.substr(0, comma));
        run.counts[static_cast<std::size_t>(it - run.outcomes.begin())] += std::stoull(line.substr(comma + 1));
    }
    for (auto c : run.counts) run.shots += c;
    if (run.shots == 0) throw std::invalid_argument("histogram is empty");
    return run;
}

} // namespace clickwit
