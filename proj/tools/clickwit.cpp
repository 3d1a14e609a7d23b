// Copyright 2026 The clickwit Authors
// SPDX-License-Identifier: Apache-2.0
//
// clickwit: nonclassicality witnesses for click-counting detectors.
#include "scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace cw = clickwit;
namespace cli = clickwit::cli;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct Overrides {
    std::string scenario;
    std::optional<std::string> model, state, parity, sets, format, prefix, out;
    std::optional<int> N, K, photo_order;
    std::optional<double> eta, nu, alpha2;
    std::vector<std::string> matrices, criteria;
    std::optional<std::string> variable, grid;
    std::optional<double> start, stop;
    std::optional<int> points;
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("--scenario", o.scenario, "JSON scenario file");
    app->add_option("--model", o.model, "photo, onoff or pnr");
    app->add_option("--N", o.N, "number of bins");
    app->add_option("--K", o.K, "intrinsic resolution of each bin");
    app->add_option("--eta", o.eta, "quantum efficiency");
    app->add_option("--nu", o.nu, "dark-count term");
    app->add_option("--state", o.state, "cat or coherent");
    app->add_option("--parity", o.parity, "even, odd or both");
    app->add_option("--alpha2", o.alpha2, "|alpha|^2");
    app->add_option("--sets", o.sets, "integer, half or all");
    app->add_option("--matrix", o.matrices, "C and/or M");
    app->add_option("--criteria", o.criteria, "criteria to report");
    app->add_option("--photo-order", o.photo_order, "largest index for the photoelectric detector");
    app->add_option("--out", o.out, "output directory");
    app->add_option("--format", o.format, "csv or json");
    app->add_option("--prefix", o.prefix, "output file prefix");
}

void add_sweep(CLI::App* app, Overrides& o) {
    app->add_option("--variable", o.variable, "alpha2 or eta");
    app->add_option("--grid", o.grid, "log or linear");
    app->add_option("--start", o.start, "first grid value");
    app->add_option("--stop", o.stop, "last grid value");
    app->add_option("--points", o.points, "number of grid points");
}

cli::Scenario build(const Overrides& o, bool sweep) {
    cli::json doc = cli::json::object();
    if (!o.scenario.empty()) {
        std::ifstream in(o.scenario);
        if (!in) throw cli::IoError("cannot open scenario file " + o.scenario);
        try {
            doc = cli::json::parse(in);
        } catch (const cli::json::parse_error& e) {
            throw cli::ValidationError("scenario " + o.scenario + " is not valid JSON: " + e.what());
        }
        if (!doc.is_object()) throw cli::ValidationError("scenario must be a JSON object");
    }
    auto section = [&](const char* key) -> cli::json& {
        if (!doc.contains(key)) doc[key] = cli::json::object();
        return doc[key];
    };
    if (o.model) section("detector")["model"] = *o.model;
    if (o.N) section("detector")["N"] = *o.N;
    if (o.K) section("detector")["K"] = *o.K;
    if (o.eta) section("detector")["eta"] = *o.eta;
    if (o.nu) section("detector")["nu"] = *o.nu;
    if (o.state) section("state")["kind"] = *o.state;
    if (o.parity) section("state")["parity"] = *o.parity;
    if (o.alpha2) section("state")["alpha2"] = *o.alpha2;
    if (o.sets) doc["index_sets"] = *o.sets;
    if (!o.matrices.empty()) doc["matrices"] = o.matrices;
    if (!o.criteria.empty()) doc["criteria"] = o.criteria;
    if (o.photo_order) doc["photo_order"] = *o.photo_order;
    if (o.format) section("output")["format"] = *o.format;
    if (o.prefix) section("output")["prefix"] = *o.prefix;
    if (sweep) {
        section("sweep");
        if (o.variable) doc["sweep"]["variable"] = *o.variable;
        if (o.grid) doc["sweep"]["grid"] = *o.grid;
        if (o.start) doc["sweep"]["start"] = *o.start;
        if (o.stop) doc["sweep"]["stop"] = *o.stop;
        if (o.points) doc["sweep"]["points"] = *o.points;
    } else {
        doc.erase("sweep");
    }
    return cli::parse_scenario(doc);
}

void print_rows(const std::vector<cli::Row>& rows) {
    for (std::size_t i = 0; i < cli::csv_columns().size(); ++i) std::cout << (i ? "," : "") << cli::csv_columns()[i];
    std::cout << '\n';
    for (const auto& r : rows) std::cout << cli::csv_line(r) << '\n';
}

void report_written(const std::vector<std::string>& paths) {
    for (const auto& p : paths) std::cerr << "wrote " << p << '\n';
}

int run_witness(const Overrides& o) {
    cli::Scenario s = build(o, false);
    auto rows = cli::evaluate(s);
    print_rows(rows);
    if (o.out) report_written(cli::write_rows(rows, *o.out, s.output.prefix, s.output.format));
    return 0;
}

int run_sweep(const Overrides& o) {
    cli::Scenario s = build(o, true);
    auto rows = cli::evaluate(s);
    report_written(cli::write_rows(rows, cli::output_dir(s, o.out), s.output.prefix, s.output.format));
    return 0;
}

struct SampleFlags {
    std::optional<std::uint64_t> shots, seed;
    std::optional<int> resamples;
    std::string histogram_out, histogram_in;
};

int run_sample(const Overrides& o, const SampleFlags& f) {
    cli::Scenario s = build(o, false);
    if (s.analysis != "witness") throw cli::ValidationError("sampling supports witness analysis only");
    if (f.shots) s.sample.shots = *f.shots;
    if (f.seed) s.sample.seed = *f.seed;
    if (f.resamples) s.sample.resamples = *f.resamples;
    cli::validate(s);
    if ((!f.histogram_in.empty() || !f.histogram_out.empty()) && s.state.parities.size() != 1)
        throw cli::ValidationError("histogram files need a single state parity");
    std::vector<cli::Row> rows;
    for (cw::Parity p : s.state.parities) {
        cw::SampleRun run;
        double mean = std::numeric_limits<double>::quiet_NaN();
        if (!f.histogram_in.empty()) {
            std::ifstream in(f.histogram_in);
            if (!in) throw cli::IoError("cannot open histogram " + f.histogram_in);
            run = cw::read_histogram_csv(in, s.detector);
            run.seed = s.sample.seed;
        } else {
            cw::StateSpec state = cli::build_state(s.state.kind, p, 1, s.state.alpha2, s.state.amplitudes);
            mean = cw::total_photon_number(state);
            run = cw::sample(cw::count_distribution(state, s.detector), s.sample.shots, s.sample.seed);
        }
        if (!f.histogram_out.empty()) {
            std::ofstream out(f.histogram_out, std::ios::binary);
            if (!out) throw cli::IoError("cannot write histogram " + f.histogram_out);
            cw::write_histogram_csv(out, run);
            if (!out) throw cli::IoError("write failed for " + f.histogram_out);
        }
        auto part = cli::evaluate_sampled(s, run, s.state.alpha2, p, mean);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    print_rows(rows);
    if (o.out) report_written(cli::write_rows(rows, *o.out, s.output.prefix, s.output.format));
    return 0;
}

int run_figures(const std::string& name, const std::optional<std::string>& out) {
    if (name == "list") {
        for (const auto& n : cli::preset_names()) std::cout << n << '\n';
        return 0;
    }
    cli::Scenario s = cli::preset(name);
    auto rows = cli::evaluate(s);
    report_written(cli::write_rows(rows, cli::output_dir(s, out), s.output.prefix, s.output.format));
    return 0;
}

int run_sets(const std::string& model, int N, int K, const std::string& kind, int photo_order) {
    cw::DetectorConfig cfg;
    cfg.model = cli::detail::parse_model(model);
    cfg.N = cfg.model == cw::DetectorModel::Photoelectric ? 1 : N;
    cfg.K = cfg.model == cw::DetectorModel::PNR ? K : 1;
    try {
        cfg.validate();
    } catch (const std::domain_error& e) {
        throw cli::ValidationError(e.what());
    }
    std::cout << cli::describe_sets(cfg, cli::detail::parse_matrix(kind), photo_order);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonclassicality witnesses for click-counting detectors"};
    app.require_subcommand(1);

    Overrides witness_o, sweep_o, sample_o;
    auto* witness = app.add_subcommand("witness", "evaluate witnesses at a single point");
    add_common(witness, witness_o);

    auto* sweep = app.add_subcommand("sweep", "evaluate witnesses over a parameter grid");
    add_common(sweep, sweep_o);
    add_sweep(sweep, sweep_o);

    SampleFlags sf;
    auto* samp = app.add_subcommand("sample", "simulate finite-shot data and bootstrap the witnesses");
    add_common(samp, sample_o);
    samp->add_option("--shots", sf.shots, "number of simulated shots");
    samp->add_option("--seed", sf.seed, "PRNG seed");
    samp->add_option("--resamples", sf.resamples, "bootstrap resamples");
    samp->add_option("--histogram-out", sf.histogram_out, "write the sampled histogram");
    samp->add_option("--histogram-in", sf.histogram_in, "analyze a histogram instead of sampling");

    std::string fig_name;
    std::optional<std::string> fig_out;
    auto* figs = app.add_subcommand("figures", "regenerate a preset sweep");
    figs->add_option("name", fig_name, "preset name or 'list'")->required();
    figs->add_option("--out", fig_out, "output directory");

    std::string sets_model = "onoff", sets_kind = "C";
    int sets_N = 4, sets_K = 1, sets_order = 4;
    auto* sets = app.add_subcommand("sets", "list the admissible index sets");
    sets->add_option("--model", sets_model, "photo, onoff or pnr");
    sets->add_option("--N", sets_N, "number of bins");
    sets->add_option("--K", sets_K, "intrinsic resolution");
    sets->add_option("--kind", sets_kind, "C or M");
    sets->add_option("--photo-order", sets_order, "largest index for the photoelectric detector");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*witness) return run_witness(witness_o);
        if (*sweep) return run_sweep(sweep_o);
        if (*samp) return run_sample(sample_o, sf);
        if (*figs) return run_figures(fig_name, fig_out);
        if (*sets) return run_sets(sets_model, sets_N, sets_K, sets_kind, sets_order);
    } catch (const cli::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return 0;
}
