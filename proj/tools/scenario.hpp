// Copyright 2026 The clickwit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Scenario files, figure presets and the row tables written by the clickwit
// command-line tool.
#pragma once

#include <clickwit/multimode.hpp>
#include <clickwit/parallel.hpp>
#include <clickwit/sampler.hpp>
#include <clickwit/witnesses.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace clickwit::cli {

using json = nlohmann::ordered_json;

/// Bad scenario or parameters (exit status 2).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File system failure (exit status 3).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StateSpecConfig {
    std::string kind = "cat"; ///< "cat" or "coherent"
    std::vector<Parity> parities{Parity::Even, Parity::Odd};
    int modes = 1;
    double alpha2 = 1.0; ///< total |alpha|^2
    /// Direction of alpha, rescaled to alpha2; empty means real and equal over modes.
    std::vector<complex> amplitudes;
};

struct SetSelection {
    std::string preset = "all"; ///< "integer", "half" or "all"
    std::vector<std::vector<IndexElement>> explicit_sets;
};

struct SweepSpec {
    bool enabled = false;
    std::string variable = "alpha2"; ///< "alpha2" or "eta"
    std::string grid = "log";
    double start = 1e-2;
    double stop = 1e1;
    int points = 200;
};

struct OutputSpec {
    std::string dir = "out";
    std::string format = "csv";
    std::string prefix = "scenario";
};

struct SampleSpec {
    std::uint64_t shots = 100000;
    std::uint64_t seed = 1;
    int resamples = kDefaultResamples;
};

struct Scenario {
    std::string name = "scenario";
    std::string analysis = "witness"; ///< "witness" or "ratio"
    StateSpecConfig state;
    DetectorConfig detector = DetectorConfig::on_off(4, 1.0);
    SetSelection sets;
    std::vector<MatrixKind> matrices{MatrixKind::Counts};
    std::vector<std::string> criteria{"min_eig", "det"};
    int photo_order = 4;
    std::vector<int> mode_counts{1};
    SweepSpec sweep;
    OutputSpec output;
    SampleSpec sample;
};

struct Row {
    double grid_value = 0.0;
    std::string set_id;
    std::string criterion;
    double value = 0.0;
    std::optional<double> std_error;
    std::string verdict;
    std::string state;
    std::string model;
    int N = 1;
    int K = 1;
    double eta = 1.0;
    double nu = 0.0;
    double alpha2 = 0.0;
    double mean_photons = 0.0;
};

inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{"grid_value", "set_id", "criterion", "value", "stderr",
                                               "verdict",    "state",  "model",     "N",     "K",
                                               "eta",        "nu",     "alpha2",    "mean_photons"};
    return cols;
}

//---------------------------------------------------------------------------//
// Formatting
//---------------------------------------------------------------------------//

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string state_label(const std::string& kind, Parity p) {
    if (kind == "coherent") return "coherent";
    return p == Parity::Even ? "cat+" : "cat-";
}

inline std::string csv_line(const Row& r) {
    std::string s;
    s += format_double(r.grid_value) + ',' + r.set_id + ',' + r.criterion + ',' + format_double(r.value) + ',';
    if (r.std_error) s += format_double(*r.std_error);
    s += ',' + r.verdict + ',' + r.state + ',' + r.model + ',' + std::to_string(r.N) + ',' + std::to_string(r.K) +
         ',' + format_double(r.eta) + ',' + format_double(r.nu) + ',' + format_double(r.alpha2) + ',' +
         format_double(r.mean_photons);
    return s;
}

inline json row_json(const Row& r) {
    auto num = [](double v) -> json {
        if (std::isfinite(v)) return v;
        return format_double(v);
    };
    json j;
    j["grid_value"] = num(r.grid_value);
    j["set_id"] = r.set_id;
    j["criterion"] = r.criterion;
    j["value"] = num(r.value);
    j["stderr"] = r.std_error ? num(*r.std_error) : json(nullptr);
    j["verdict"] = r.verdict;
    j["state"] = r.state;
    j["model"] = r.model;
    j["N"] = r.N;
    j["K"] = r.K;
    j["eta"] = num(r.eta);
    j["nu"] = num(r.nu);
    j["alpha2"] = num(r.alpha2);
    j["mean_photons"] = num(r.mean_photons);
    return j;
}

//---------------------------------------------------------------------------//
// Scenario parsing
//---------------------------------------------------------------------------//

namespace detail {

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ValidationError(where + " must be a JSON object");
    for (const auto& item : obj.items()) {
        bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return item.key() == a; });
        if (!ok) throw ValidationError("unknown field '" + item.key() + "' in " + where);
    }
}

template <class T>
T get(const json& obj, const char* key, const std::string& where, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("field '" + std::string(key) + "' in " + where + " has the wrong type");
    }
}

inline HalfInt parse_component(const json& v) {
    try {
        if (v.is_string()) return parse_half_int(v.get<std::string>());
        if (v.is_number()) return parse_half_int(format_double(v.get<double>()));
    } catch (const std::exception& e) {
        throw ValidationError(std::string("bad index value: ") + e.what());
    }
    throw ValidationError("index values must be numbers or strings like \"3/2\"");
}

inline IndexElement parse_element(const json& v) {
    IndexElement e;
    if (v.is_array()) {
        for (const auto& c : v) e.push_back(parse_component(c));
    } else {
        e.push_back(parse_component(v));
    }
    return e;
}

inline Parity parse_parity(const std::string& s) {
    if (s == "even" || s == "+") return Parity::Even;
    if (s == "odd" || s == "-") return Parity::Odd;
    throw ValidationError("parity must be 'even', 'odd' or 'both'");
}

inline DetectorModel parse_model(const std::string& s) {
    if (s == "photo" || s == "photoelectric") return DetectorModel::Photoelectric;
    if (s == "onoff" || s == "on-off") return DetectorModel::OnOff;
    if (s == "pnr") return DetectorModel::PNR;
    throw ValidationError("detector model must be 'photo', 'onoff' or 'pnr'");
}

inline MatrixKind parse_matrix(const std::string& s) {
    if (s == "C") return MatrixKind::Counts;
    if (s == "M") return MatrixKind::Moments;
    throw ValidationError("matrix kinds are 'C' and 'M'");
}

inline const std::set<std::string>& witness_criteria() {
    static const std::set<std::string> c{"min_eig", "det", "klyshko_int", "klyshko_half", "qb", "skewness", "g2", "g3"};
    return c;
}

inline const std::set<std::string>& ratio_criteria() {
    static const std::set<std::string> c{"ratio_ii", "ratio_iii", "count_ratio_ii", "count_ratio_iii"};
    return c;
}

} // namespace detail

/// Checks ranges and cross-field consistency; throws ValidationError.
inline void validate(const Scenario& s) {
    try {
        s.detector.validate();
    } catch (const std::domain_error& e) {
        throw ValidationError(e.what());
    }
    if (s.analysis != "witness" && s.analysis != "ratio") throw ValidationError("analysis must be 'witness' or 'ratio'");
    if (s.state.kind != "cat" && s.state.kind != "coherent") throw ValidationError("state kind must be 'cat' or 'coherent'");
    if (s.state.parities.empty()) throw ValidationError("no state parity selected");
    if (!(s.state.alpha2 >= 0.0) || !std::isfinite(s.state.alpha2)) throw ValidationError("alpha2 must be >= 0");
    if (s.state.modes < 1 || s.state.modes > kMaxModes) throw ValidationError("modes must lie in [1, 8]");
    if (!s.state.amplitudes.empty()) {
        if (static_cast<int>(s.state.amplitudes.size()) != s.state.modes)
            throw ValidationError("amplitude count differs from the mode count");
        double norm = 0.0;
        for (const complex& a : s.state.amplitudes) norm += std::norm(a);
        if (!(norm > 0.0) || !std::isfinite(norm)) throw ValidationError("amplitudes must be finite and not all zero");
        if (s.analysis == "ratio" && s.mode_counts != std::vector<int>{s.state.modes})
            throw ValidationError("explicit amplitudes fix the mode count");
    }
    if (s.sweep.points < 1) throw ValidationError("sweep needs at least one grid point");
    if (s.sweep.variable != "alpha2" && s.sweep.variable != "eta") throw ValidationError("sweep variable must be 'alpha2' or 'eta'");
    if (s.sweep.grid != "log" && s.sweep.grid != "linear") throw ValidationError("grid must be 'log' or 'linear'");
    if (s.sweep.enabled) {
        if (!std::isfinite(s.sweep.start) || !std::isfinite(s.sweep.stop)) throw ValidationError("grid bounds must be finite");
        if (s.sweep.grid == "log" && !(s.sweep.start > 0.0 && s.sweep.stop > 0.0))
            throw ValidationError("log grids need positive bounds");
        if (s.sweep.variable == "eta" && !(s.sweep.start > 0.0 && s.sweep.stop <= 1.0 && s.sweep.start <= 1.0 && s.sweep.stop > 0.0))
            throw ValidationError("efficiency grid must lie in (0, 1]");
        if (s.sweep.variable == "alpha2" && !(s.sweep.start >= 0.0 && s.sweep.stop >= 0.0))
            throw ValidationError("alpha2 grid must be non-negative");
    }
    if (s.output.format != "csv" && s.output.format != "json") throw ValidationError("output format must be 'csv' or 'json'");
    if (s.output.prefix.empty() || s.output.prefix.find('/') != std::string::npos)
        throw ValidationError("output prefix must be a plain file name stem");
    if (s.sample.shots == 0) throw ValidationError("shots must be positive");
    if (s.sample.resamples < 0) throw ValidationError("resamples must be >= 0");
    if (s.photo_order < 0 || s.photo_order > 40) throw ValidationError("photo_order must lie in [0, 40]");
    if (s.analysis == "witness") {
        if (s.state.modes != 1) throw ValidationError("witness analysis needs a single-mode state");
        if (s.matrices.empty()) throw ValidationError("no matrix kind selected");
        for (const auto& c : s.criteria)
            if (!detail::witness_criteria().count(c)) throw ValidationError("unknown criterion '" + c + "'");
        for (const auto& c : s.criteria)
            if (c != "min_eig" && c != "det" && s.detector.model != DetectorModel::OnOff)
                throw ValidationError("criterion '" + c + "' needs the on-off detector");
        if (s.sets.preset != "integer" && s.sets.preset != "half" && s.sets.preset != "all")
            throw ValidationError("set preset must be 'integer', 'half' or 'all'");
        for (const auto& elems : s.sets.explicit_sets) {
            for (MatrixKind kind : s.matrices) {
                try {
                    validate_index_set(make_index_set(elems, kind), s.detector);
                } catch (const std::domain_error& e) {
                    throw ValidationError(e.what());
                }
            }
        }
    } else {
        for (const auto& c : s.criteria)
            if (!detail::ratio_criteria().count(c)) throw ValidationError("unknown ratio criterion '" + c + "'");
        if (s.mode_counts.empty()) throw ValidationError("no mode counts given");
        for (int m : s.mode_counts)
            if (m < 1 || m > kMaxModes) throw ValidationError("mode counts must lie in [1, 8]");
        if (s.state.kind != "cat") throw ValidationError("ratio analysis needs cat states");
    }
}

/// Parses a scenario document; unknown fields are rejected.
inline Scenario parse_scenario(const json& doc) {
    using detail::check_keys;
    using detail::get;
    check_keys(doc, "scenario",
               {"name", "analysis", "state", "detector", "index_sets", "matrices", "criteria", "photo_order", "modes",
                "sweep", "output", "sample"});
    Scenario s;
    s.name = get<std::string>(doc, "name", "scenario", s.name);
    s.output.prefix = s.name;
    s.analysis = get<std::string>(doc, "analysis", "scenario", s.analysis);
    if (s.analysis == "ratio") s.criteria = {"ratio_ii", "ratio_iii"};
    if (doc.contains("state")) {
        const json& st = doc["state"];
        check_keys(st, "state", {"kind", "parity", "modes", "alpha2", "amplitudes"});
        s.state.kind = get<std::string>(st, "kind", "state", s.state.kind);
        std::string parity = get<std::string>(st, "parity", "state", "both");
        if (parity == "both")
            s.state.parities = {Parity::Even, Parity::Odd};
        else
            s.state.parities = {detail::parse_parity(parity)};
        if (s.state.kind == "coherent") s.state.parities = {Parity::Even};
        s.state.modes = get<int>(st, "modes", "state", s.state.modes);
        s.state.alpha2 = get<double>(st, "alpha2", "state", s.state.alpha2);
        if (st.contains("amplitudes")) {
            const json& amps = st["amplitudes"];
            if (!amps.is_array() || amps.empty()) throw ValidationError("amplitudes must be a non-empty list");
            double norm = 0.0;
            for (const auto& a : amps) {
                if (a.is_number()) {
                    s.state.amplitudes.emplace_back(a.get<double>(), 0.0);
                } else if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number()) {
                    s.state.amplitudes.emplace_back(a[0].get<double>(), a[1].get<double>());
                } else {
                    throw ValidationError("each amplitude is a number or a [re, im] pair");
                }
                norm += std::norm(s.state.amplitudes.back());
            }
            if (!st.contains("modes")) s.state.modes = static_cast<int>(s.state.amplitudes.size());
            if (!st.contains("alpha2")) s.state.alpha2 = norm;
        }
    }
    if (doc.contains("detector")) {
        const json& d = doc["detector"];
        check_keys(d, "detector", {"model", "N", "K", "eta", "nu"});
        s.detector.model = detail::parse_model(get<std::string>(d, "model", "detector", "onoff"));
        s.detector.N = get<int>(d, "N", "detector", s.detector.model == DetectorModel::Photoelectric ? 1 : 4);
        s.detector.K = get<int>(d, "K", "detector", 1);
        s.detector.eta = get<double>(d, "eta", "detector", 1.0);
        s.detector.nu = get<double>(d, "nu", "detector", 0.0);
        if (s.detector.model == DetectorModel::Photoelectric) s.detector.N = s.detector.K = 1;
        if (s.detector.model == DetectorModel::OnOff) s.detector.K = 1;
    }
    if (doc.contains("index_sets")) {
        const json& is = doc["index_sets"];
        if (is.is_string()) {
            s.sets.preset = is.get<std::string>();
        } else if (is.is_array()) {
            for (const auto& set : is) {
                if (!set.is_array() || set.empty()) throw ValidationError("explicit index sets must be non-empty arrays");
                std::vector<IndexElement> elems;
                for (const auto& e : set) elems.push_back(detail::parse_element(e));
                s.sets.explicit_sets.push_back(std::move(elems));
            }
        } else {
            throw ValidationError("index_sets must be a preset name or a list of sets");
        }
    }
    if (doc.contains("matrices")) {
        s.matrices.clear();
        for (const auto& m : doc["matrices"]) {
            if (!m.is_string()) throw ValidationError("matrices must be strings");
            s.matrices.push_back(detail::parse_matrix(m.get<std::string>()));
        }
    }
    if (doc.contains("criteria")) s.criteria = get<std::vector<std::string>>(doc, "criteria", "scenario", s.criteria);
    s.photo_order = get<int>(doc, "photo_order", "scenario", s.photo_order);
    if (doc.contains("modes")) s.mode_counts = get<std::vector<int>>(doc, "modes", "scenario", s.mode_counts);
    else if (!s.state.amplitudes.empty()) s.mode_counts = {s.state.modes};
    if (doc.contains("sweep")) {
        const json& w = doc["sweep"];
        check_keys(w, "sweep", {"variable", "grid", "start", "stop", "points"});
        s.sweep.enabled = true;
        s.sweep.variable = get<std::string>(w, "variable", "sweep", s.sweep.variable);
        s.sweep.grid = get<std::string>(w, "grid", "sweep", s.sweep.grid);
        s.sweep.start = get<double>(w, "start", "sweep", s.sweep.start);
        s.sweep.stop = get<double>(w, "stop", "sweep", s.sweep.stop);
        s.sweep.points = get<int>(w, "points", "sweep", s.sweep.points);
    }
    if (doc.contains("output")) {
        const json& o = doc["output"];
        check_keys(o, "output", {"dir", "format", "prefix"});
        s.output.dir = get<std::string>(o, "dir", "output", s.output.dir);
        s.output.format = get<std::string>(o, "format", "output", s.output.format);
        s.output.prefix = get<std::string>(o, "prefix", "output", s.output.prefix);
    }
    if (doc.contains("sample")) {
        const json& p = doc["sample"];
        check_keys(p, "sample", {"shots", "seed", "resamples"});
        s.sample.shots = get<std::uint64_t>(p, "shots", "sample", s.sample.shots);
        s.sample.seed = get<std::uint64_t>(p, "seed", "sample", s.sample.seed);
        s.sample.resamples = get<int>(p, "resamples", "sample", s.sample.resamples);
    }
    validate(s);
    return s;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("scenario " + path + " is not valid JSON: " + e.what());
    }
    return parse_scenario(doc);
}

//---------------------------------------------------------------------------//
// Presets
//---------------------------------------------------------------------------//

inline std::vector<std::string> preset_names() { return {"fig1", "fig3", "fig4", "fig5", "fig6"}; }

inline Scenario preset(const std::string& name) {
    Scenario s;
    s.name = name;
    s.output.prefix = name;
    s.state.kind = "cat";
    s.state.parities = {Parity::Even, Parity::Odd};
    s.sweep = SweepSpec{true, "alpha2", "log", 1e-2, 1e1, 200};
    const auto h = [](int twice) { return IndexElement{HalfInt::from_twice(twice)}; };
    if (name == "fig1") {
        s.detector = DetectorConfig::photoelectric(0.5);
        s.sets.explicit_sets = {{h(2), h(4)}, {h(1), h(3)}};
        s.matrices = {MatrixKind::Counts, MatrixKind::Moments};
    } else if (name == "fig3") {
        s.detector = DetectorConfig::on_off(5, 0.5);
        s.matrices = {MatrixKind::Counts};
    } else if (name == "fig4") {
        s.detector = DetectorConfig::on_off(5, 0.5);
        s.matrices = {MatrixKind::Moments};
        s.criteria = {"min_eig", "det", "g2", "g3", "qb", "skewness"};
    } else if (name == "fig5") {
        s.detector = DetectorConfig::pnr(4, 2, 0.5);
        s.matrices = {MatrixKind::Counts};
    } else if (name == "fig6") {
        s.analysis = "ratio";
        s.detector = DetectorConfig::photoelectric(1.0);
        s.mode_counts = {1, 2, 3, 5};
        s.criteria = {"ratio_ii", "ratio_iii"};
    } else {
        throw ValidationError("unknown preset '" + name + "'");
    }
    validate(s);
    return s;
}

//---------------------------------------------------------------------------//
// Evaluation
//---------------------------------------------------------------------------//

inline std::vector<double> grid_points(const Scenario& s) {
    if (!s.sweep.enabled) return {s.sweep.variable == "eta" ? s.detector.eta : s.state.alpha2};
    std::vector<double> g;
    const int n = s.sweep.points;
    for (int i = 0; i < n; ++i) {
        double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        if (i == 0 || i == n - 1)
            g.push_back(i == 0 ? s.sweep.start : s.sweep.stop);
        else if (s.sweep.grid == "log")
            g.push_back(std::exp(std::log(s.sweep.start) + t * (std::log(s.sweep.stop) - std::log(s.sweep.start))));
        else
            g.push_back(s.sweep.start + t * (s.sweep.stop - s.sweep.start));
    }
    return g;
}

/// State with total |alpha|^2 = alpha2 along `direction` (default: real,
/// equal over modes).
inline StateSpec build_state(const std::string& kind, Parity parity, int modes, double alpha2,
                             const std::vector<complex>& direction = {}) {
    std::vector<complex> amps(static_cast<std::size_t>(modes), complex{std::sqrt(alpha2 / modes), 0.0});
    if (!direction.empty()) {
        double norm = 0.0;
        for (const complex& a : direction) norm += std::norm(a);
        amps = direction;
        for (complex& a : amps) a *= std::sqrt(alpha2 / norm);
    }
    if (kind == "coherent") return coherent_product(amps);
    try {
        return make_cat(amps, parity);
    } catch (const std::domain_error& e) {
        throw ValidationError(e.what());
    }
}

/// Index sets of the scenario for one matrix kind (empty patterns dropped).
inline std::vector<IndexSet> resolve_sets(const Scenario& s, MatrixKind kind) {
    std::vector<IndexSet> out;
    if (!s.sets.explicit_sets.empty()) {
        for (const auto& elems : s.sets.explicit_sets) out.push_back(make_index_set(elems, kind));
        return out;
    }
    for (auto& set : enumerate_index_sets(s.detector, kind, s.photo_order)) {
        if (set.empty()) continue;
        bool integer = std::all_of(set.pattern.begin(), set.pattern.end(),
                                   [](IndexClass c) { return c == IndexClass::Integer; });
        if (s.sets.preset == "integer" && !integer) continue;
        if (s.sets.preset == "half" && integer) continue;
        out.push_back(std::move(set));
    }
    return out;
}

namespace detail {

inline std::string matrix_verdict(bool negative) { return negative ? "nonclassical" : "no-violation"; }

inline std::string det_verdict(const WitnessReport& r) {
    const double det = r.minors.back();
    const double scale = std::pow(std::max(r.matrix.max_abs(), 1e-300), static_cast<double>(r.minors.size()));
    return det < -kRelativeNegativity * scale ? "nonclassical" : "no-violation";
}

inline void witness_rows(const Scenario& s, const DetectorConfig& cfg, const DetectorExpressions& det,
                         const StateSpec& state, const Row& base, std::vector<Row>& out) {
    const bool want_min = std::count(s.criteria.begin(), s.criteria.end(), "min_eig") > 0;
    const bool want_det = std::count(s.criteria.begin(), s.criteria.end(), "det") > 0;
    for (MatrixKind kind : s.matrices) {
        for (const auto& set : resolve_sets(s, kind)) {
            WitnessReport r = witness_matrix(state, det, set);
            Row row = base;
            row.set_id = set.id;
            if (want_min) {
                row.criterion = "min_eig_" + to_string(kind);
                row.value = r.min_eig;
                row.verdict = matrix_verdict(r.negative);
                out.push_back(row);
            }
            if (want_det) {
                row.criterion = "det_" + to_string(kind);
                row.value = r.minors.back();
                row.verdict = det_verdict(r);
                out.push_back(row);
            }
        }
    }
    std::vector<std::string> scalars;
    for (const auto& c : s.criteria)
        if (c != "min_eig" && c != "det") scalars.push_back(c);
    if (scalars.empty()) return;
    const CountDistribution c = click_distribution(state, det);
    for (const auto& name : scalars) {
        Row row = base;
        row.set_id = "scalar";
        row.criterion = name;
        row.verdict = "indeterminate";
        row.value = std::numeric_limits<double>::quiet_NaN();
        if (name == "klyshko_int" || name == "klyshko_half") {
            auto k = klyshko_ratio(c, name == "klyshko_int" ? KlyshkoVariant::Integer : KlyshkoVariant::Half);
            row.value = k.ratio;
            row.verdict = to_string(k.verdict);
        } else if (name == "qb") {
            try {
                row.value = qb_parameter(c).qb;
                row.verdict = row.value < -1e-12 ? "nonclassical" : "no-violation";
            } catch (const std::domain_error&) {
            }
        } else if (name == "skewness") {
            row.value = skewness_witness(c).det_moments;
            row.verdict = row.value < -1e-12 ? "nonclassical" : "no-violation";
        } else if (name == "g2" || name == "g3") {
            const double first = click_moment(state, cfg, 1);
            if (first > 0.0) {
                const double g2 = click_moment(state, cfg, 2) / (first * first);
                const double g3 = click_moment(state, cfg, 3) / (first * first * first);
                row.value = name == "g2" ? g2 : g3;
                const bool neg = name == "g2" ? g2 - 1.0 < -1e-12 : g3 - g2 * g2 < -1e-12 * std::max(1.0, g2 * g2);
                row.verdict = neg ? "nonclassical" : "no-violation";
            }
        }
        out.push_back(row);
    }
}

inline void ratio_rows(const Scenario& s, double alpha2, double eta, Parity parity, double grid_value,
                       std::vector<Row>& out) {
    for (int modes : s.mode_counts) {
        StateSpec state = build_state("cat", parity, modes, alpha2, s.state.amplitudes);
        MultiIndex zero(static_cast<std::size_t>(modes), HalfInt(0));
        MultiIndex e1 = zero, h1 = zero, h3 = zero;
        e1[0] = HalfInt(1);
        h1[0] = HalfInt::from_twice(1);
        h3[0] = HalfInt::from_twice(3);
        Row base;
        base.grid_value = grid_value;
        base.set_id = "mu" + std::to_string(modes);
        base.state = state_label("cat", parity);
        base.model = "photo";
        base.eta = eta;
        base.alpha2 = alpha2;
        base.mean_photons = eta * cat_total_photon_number(alpha2, parity);
        for (const auto& c : s.criteria) {
            const bool two = c == "ratio_ii" || c == "count_ratio_ii";
            const bool counts = c.rfind("count_", 0) == 0;
            RatioResult r = counts ? (two ? count_ratio_criterion(state, zero, e1, eta) : count_ratio_criterion(state, h1, h3, eta))
                                   : (two ? ratio_criterion(state, zero, e1, eta) : ratio_criterion(state, h1, h3, eta));
            Row row = base;
            row.criterion = c;
            row.value = r.ratio;
            row.verdict = to_string(r.verdict);
            out.push_back(row);
        }
    }
}

inline void sort_rows(std::vector<Row>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.grid_value != b.grid_value) return a.grid_value < b.grid_value;
        if (a.set_id != b.set_id) return a.set_id < b.set_id;
        return a.state < b.state;
    });
}

} // namespace detail

/// All exact rows of a scenario, ordered by grid value, set id and state.
/// Grid points are evaluated concurrently; the result does not depend on
/// the thread count.
inline std::vector<Row> evaluate(const Scenario& s, unsigned threads = 0) {
    validate(s);
    const auto grid = grid_points(s);
    std::vector<std::vector<Row>> per_point(grid.size());
    parallel_for(
        grid.size(),
        [&](std::size_t i) {
            const double g = grid[i];
            const double alpha2 = s.sweep.enabled && s.sweep.variable == "alpha2" ? g : s.state.alpha2;
            DetectorConfig cfg = s.detector;
            if (s.sweep.enabled && s.sweep.variable == "eta") cfg.eta = g;
            for (Parity p : s.state.parities) {
                if (s.analysis == "ratio") {
                    detail::ratio_rows(s, alpha2, cfg.eta, p, g, per_point[i]);
                    continue;
                }
                DetectorExpressions det(cfg);
                StateSpec state = build_state(s.state.kind, p, 1, alpha2, s.state.amplitudes);
                Row base;
                base.grid_value = g;
                base.state = state_label(s.state.kind, p);
                base.model = to_string(cfg.model);
                base.N = cfg.N;
                base.K = cfg.K;
                base.eta = cfg.eta;
                base.nu = cfg.nu;
                base.alpha2 = alpha2;
                base.mean_photons = total_photon_number(state);
                detail::witness_rows(s, cfg, det, state, base, per_point[i]);
            }
        },
        threads);
    std::vector<Row> rows;
    for (auto& v : per_point) rows.insert(rows.end(), v.begin(), v.end());
    detail::sort_rows(rows);
    return rows;
}

/// Witness rows with bootstrap standard errors for one sampled histogram.
/// mean_photons is NaN when the source state is unknown.
inline std::vector<Row> evaluate_sampled(const Scenario& s, const SampleRun& run, double alpha2, Parity parity,
                                         double mean_photons = std::numeric_limits<double>::quiet_NaN()) {
    std::vector<Row> rows;
    Row base;
    base.grid_value = alpha2;
    base.state = state_label(s.state.kind, parity);
    base.model = to_string(s.detector.model);
    base.N = s.detector.N;
    base.K = s.detector.K;
    base.eta = s.detector.eta;
    base.nu = s.detector.nu;
    base.alpha2 = alpha2;
    base.mean_photons = mean_photons;
    std::map<std::string, Estimate> scalars;
    for (MatrixKind kind : s.matrices) {
        for (const auto& set : resolve_sets(s, kind)) {
            EmpiricalWitness w = empirical_witness(run, s.detector, set, s.sample.resamples);
            Row row = base;
            row.set_id = set.id;
            row.criterion = "min_eig_" + to_string(kind);
            row.value = w.min_eig.value;
            row.std_error = w.min_eig.std_error;
            row.verdict = w.empty_classes.empty() ? to_string(w.verdict) : "indeterminate";
            rows.push_back(row);
            if (scalars.empty()) scalars = w.scalars;
        }
    }
    for (const auto& [name, est] : scalars) {
        if (std::find(s.criteria.begin(), s.criteria.end(), name) == s.criteria.end()) continue;
        Row sr = base;
        sr.set_id = "scalar";
        sr.criterion = name;
        sr.value = est.value;
        sr.std_error = est.std_error;
        sr.verdict = "inconclusive";
        if (name == "klyshko_int" || name == "klyshko_half") {
            double bound = name == "klyshko_int" ? 0.5 * (1.0 - 1.0 / s.detector.N)
                                                 : 2.0 / 3.0 * (1.0 - 1.0 / (s.detector.N - 1.0));
            if (est.value < bound - 3.0 * est.std_error) sr.verdict = "nonclassical";
            else if (est.value > bound + 3.0 * est.std_error) sr.verdict = "no-violation";
        } else {
            sr.verdict = to_string(sampling_verdict(est.value, est.std_error, 0.0));
        }
        rows.push_back(sr);
    }
    return rows;
}

//---------------------------------------------------------------------------//
// Output
//---------------------------------------------------------------------------//

/// Output directory: explicit flag, then CLICKWIT_OUT_DIR, then the scenario.
inline std::string output_dir(const Scenario& s, const std::optional<std::string>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("CLICKWIT_OUT_DIR"); env && *env) return env;
    return s.output.dir;
}

/// Writes one file per (set id, criterion) and returns the paths written.
inline std::vector<std::string> write_rows(const std::vector<Row>& rows, const std::string& dir, const std::string& prefix,
                                           const std::string& format) {
    std::map<std::pair<std::string, std::string>, std::vector<const Row*>> groups;
    for (const auto& r : rows) groups[{r.set_id, r.criterion}].push_back(&r);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    std::vector<std::string> written;
    for (const auto& [key, group] : groups) {
        const std::string path = (std::filesystem::path(dir) / (prefix + "_" + key.first + "_" + key.second + "." + format)).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path);
        if (format == "csv") {
            for (std::size_t i = 0; i < csv_columns().size(); ++i) out << (i ? "," : "") << csv_columns()[i];
            out << '\n';
            for (const Row* r : group) out << csv_line(*r) << '\n';
        } else {
            json arr = json::array();
            for (const Row* r : group) arr.push_back(row_json(*r));
            out << arr.dump(2) << '\n';
        }
        if (!out) throw IoError("write failed for " + path);
        written.push_back(path);
    }
    return written;
}

/// One line per index set: "<id> {<elements>}".
inline std::string describe_sets(const DetectorConfig& cfg, MatrixKind kind, int photo_order = 4) {
    std::string s;
    for (const auto& set : enumerate_index_sets(cfg, kind, photo_order))
        s += set.id + " " + (set.empty() ? std::string("{} (no admissible elements)") : set.str()) + "\n";
    return s;
}

} // namespace clickwit::cli
