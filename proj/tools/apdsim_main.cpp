// Command line front end: detector simulation, duty-cycle table
// construction and queries, coincidence correction, fringe synthesis and
// fitting. Exit codes: 0 success, 2 usage or configuration problem,
// 3 malformed or out-of-range data, 4 numerical failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "apdsim/coincidence.hpp"
#include "apdsim/detector_sim.hpp"
#include "apdsim/errors.hpp"
#include "apdsim/event_stream.hpp"
#include "apdsim/experiment_sim.hpp"
#include "apdsim/fringe_analysis.hpp"
#include "apdsim/lut.hpp"
#include "apdsim/recovery_model.hpp"
#include "apdsim/serialization.hpp"

namespace {

using nlohmann::json;

/// Configuration problems get their own exception so the top-level handler
/// can map them to exit code 2 rather than the data-error code.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

json load_config(const std::string& path,
                 const std::vector<std::string>& allowed_keys) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    try {
        apdsim::check_keys(j, "config", {}, allowed_keys);
    } catch (const apdsim::ParseError& e) {
        throw ConfigError(e.what());
    }
    return j;
}

apdsim::DetectorParams detector_from_config(const json& cfg, const char* key) {
    apdsim::DetectorParams p;
    if (cfg.contains(key)) {
        try {
            p = cfg.at(key).get<apdsim::DetectorParams>();
        } catch (const apdsim::ParseError& e) {
            throw ConfigError(std::string(key) + ": " + e.what());
        } catch (const json::exception& e) {
            throw ConfigError(std::string(key) + ": " + e.what());
        }
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
    }
    return p;
}

double config_number(const json& cfg, const char* key, double fallback) {
    if (!cfg.contains(key)) return fallback;
    if (!cfg.at(key).is_number())
        throw ConfigError(std::string(key) + " must be a number");
    return cfg.at(key).get<double>();
}

/// Writes through a temporary file in the target directory so readers never
/// see a partial file and failures leave nothing behind.
void write_atomic(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    try {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        writer(out);
        out.flush();
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
    std::filesystem::rename(tmp, path);
}

json fit_to_json(const apdsim::VisibilityFit& f) {
    return json{
        {"offset", f.offset},
        {"offset_err", f.offset_err},
        {"amplitude", f.amplitude},
        {"amplitude_err", f.amplitude_err},
        {"visibility", f.visibility},
        {"visibility_err", f.visibility_err},
        {"phase_deg", f.phase_deg},
        {"phase_err_deg", f.phase_err_deg},
        {"residual_rms", f.residual_rms},
        {"n_points", f.n_points},
        {"over_range", f.over_range},
    };
}

json estimate_to_json(const apdsim::DutyCycleEstimate& e) {
    return json{
        {"input_rate", e.input_rate},
        {"observed_rate", e.observed_rate},
        {"eta_fractional", e.eta_fractional},
        {"stderr_fractional", e.stderr_fractional},
        {"eta_area", e.eta_area},
        {"input_count", e.input_count},
        {"avalanche_count", e.avalanche_count},
        {"sensed_count", e.sensed_count},
        {"duration", e.duration},
    };
}

struct SimulateArgs {
    std::string config;
    std::optional<double> rate, duration;
    std::optional<std::uint64_t> seed;
    std::string trace_out, events_out;
};

int run_simulate(const SimulateArgs& a) {
    json cfg = a.config.empty()
                   ? json::object()
                   : load_config(a.config, {"detector", "source", "duration", "seed"});

    const apdsim::DetectorParams det = detector_from_config(cfg, "detector");

    apdsim::SourceModel src;
    if (cfg.contains("source")) {
        apdsim::check_keys(cfg.at("source"), "source", {"rate"}, {"kind", "dark_rate"});
        const std::string kind = cfg.at("source").value("kind", "poisson");
        if (kind != "poisson")
            throw ConfigError("source.kind \"" + kind +
                              "\" is not available from the command line");
        src.rate = cfg.at("source").at("rate").get<double>();
        src.dark_rate = cfg.at("source").value("dark_rate", 0.0);
    }
    if (a.rate) src.rate = *a.rate;
    if (!(src.rate + src.dark_rate > 0.0))
        throw ConfigError("no source rate given (config source.rate or --rate)");

    double duration = config_number(cfg, "duration", 1.0);
    if (a.duration) duration = *a.duration;
    std::uint64_t seed = cfg.value("seed", std::uint64_t{1});
    if (a.seed) seed = *a.seed;

    const apdsim::EventSequence seq =
        apdsim::generate(src, duration, apdsim::derive_seed(seed, 0, 0));
    const apdsim::DetectorTrace trace =
        apdsim::simulate(seq, det, apdsim::derive_seed(seed, 0, 1));
    const apdsim::DutyCycleEstimate est = apdsim::estimate_duty_cycle(trace);

    if (!a.events_out.empty())
        write_atomic(a.events_out,
                     [&](std::ostream& out) { apdsim::write_events_csv(seq, out); });
    if (!a.trace_out.empty())
        write_atomic(a.trace_out, [&](std::ostream& out) {
            apdsim::write_trace_csv(seq, trace, out);
        });

    json summary = estimate_to_json(est);
    summary["seed"] = seed;
    summary["detector"] = det;
    std::cout << summary.dump(2) << "\n";
    return 0;
}

struct BuildLutArgs {
    std::string config, out, csv_out, timestamp;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
};

int run_build_lut(const BuildLutArgs& a) {
    json cfg = load_config(a.config, {"detector", "lut", "seed"});
    const apdsim::DetectorParams det = detector_from_config(cfg, "detector");
    if (!cfg.contains("lut")) throw ConfigError("config needs a \"lut\" section");
    const json& lcfg = cfg.at("lut");
    try {
        apdsim::check_keys(lcfg, "lut", {"v_e_values", "input_rates"},
                           {"duration", "min_events_per_cell", "created_utc"});
    } catch (const apdsim::ParseError& e) {
        throw ConfigError(e.what());
    }

    std::vector<double> v_e_values, input_rates;
    try {
        v_e_values = lcfg.at("v_e_values").get<std::vector<double>>();
        input_rates = lcfg.at("input_rates").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("lut: ") + e.what());
    }

    apdsim::LutBuildOptions opt;
    opt.min_events_per_cell = lcfg.value("min_events_per_cell", 1e5);
    opt.jobs = a.jobs;
    opt.created_utc = lcfg.value("created_utc", std::string{});
    if (!a.timestamp.empty()) opt.created_utc = a.timestamp;
    const double duration = lcfg.value("duration", 0.1);
    std::uint64_t seed = cfg.value("seed", std::uint64_t{1});
    if (a.seed) seed = *a.seed;

    apdsim::DutyCycleTable table;
    try {
        table = apdsim::build_table(det, v_e_values, input_rates, duration, seed, opt);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("lut: ") + e.what());
    }

    write_atomic(a.out, [&](std::ostream& out) { apdsim::save_table(table, out); });
    if (!a.csv_out.empty())
        write_atomic(a.csv_out,
                     [&](std::ostream& out) { apdsim::write_table_csv(table, out); });

    std::cerr << "table: " << table.v_e_axis.size() << " x "
              << table.observed_rate_axis.size() << " grid, observed rates ["
              << table.observed_rate_axis.front() << ", "
              << table.observed_rate_axis.back() << "] Hz -> " << a.out << "\n";
    return 0;
}

int run_lookup(const std::string& table_path, double v_e, double observed_rate,
               bool as_json) {
    const apdsim::DutyCycleTable table = apdsim::load_table(table_path);
    const double eta = apdsim::lookup_eta(table, v_e, observed_rate);
    if (as_json) {
        std::cout << json{{"eta", eta}}.dump(2) << "\n";
    } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", eta);
        std::cout << buf << "\n";
    }
    return 0;
}

struct CorrectArgs {
    std::string table, table1, table2;
    apdsim::CoincidenceMeasurement m;
    std::optional<double> eta1, eta2;
};

int run_correct(const CorrectArgs& a) {
    apdsim::CorrectionResult r;
    if (a.eta1 && a.eta2) {
        r = apdsim::correct_with_eta(a.m, *a.eta1, *a.eta2);
    } else if (a.eta1 || a.eta2) {
        throw ConfigError("--eta1 and --eta2 must be given together");
    } else {
        const std::string p1 = a.table1.empty() ? a.table : a.table1;
        const std::string p2 = a.table2.empty() ? a.table : a.table2;
        if (p1.empty() || p2.empty())
            throw ConfigError("give --table, --table1/--table2, or --eta1/--eta2");
        const apdsim::DutyCycleTable t1 = apdsim::load_table(p1);
        const apdsim::DutyCycleTable t2 =
            (p2 == p1) ? t1 : apdsim::load_table(p2);
        r = apdsim::correct(a.m, t1, t2);
    }
    std::cout << json{{"eta1", r.eta1},
                      {"eta2", r.eta2},
                      {"c_acc_naive", r.c_acc_naive},
                      {"c_acc_corrected", r.c_acc_corrected},
                      {"c_naive", r.c_naive},
                      {"c_corrected", r.c_corrected},
                      {"negative", r.negative}}
                     .dump(2)
              << "\n";
    return 0;
}

struct FitArgs {
    std::string data, table, table1, table2;
    std::optional<double> tau1, tau2, v_e1, v_e2;
};

int run_fit(const FitArgs& a) {
    apdsim::FringeDataset ds = apdsim::read_fringe_csv(a.data);
    if (a.tau1) ds.tau1 = *a.tau1;
    if (a.tau2) ds.tau2 = *a.tau2;
    if (a.v_e1) ds.v_e1 = *a.v_e1;
    if (a.v_e2) ds.v_e2 = *a.v_e2;

    const std::string p1 = a.table1.empty() ? a.table : a.table1;
    const std::string p2 = a.table2.empty() ? a.table : a.table2;
    if (p1.empty() || p2.empty())
        throw ConfigError("give --table or --table1/--table2");
    const apdsim::DutyCycleTable t1 = apdsim::load_table(p1);
    const apdsim::DutyCycleTable t2 = (p2 == p1) ? t1 : apdsim::load_table(p2);

    const apdsim::FringeAnalysis fa = apdsim::analyze(ds, t1, t2);
    double eta1 = 0.0, eta2 = 0.0;
    for (const auto& pp : fa.per_point) {
        eta1 += pp.eta1;
        eta2 += pp.eta2;
    }
    const double n = static_cast<double>(fa.per_point.size());
    std::cout << json{{"raw", fit_to_json(fa.raw)},
                      {"naive", fit_to_json(fa.naive)},
                      {"corrected", fit_to_json(fa.corrected)},
                      {"eta1_mean", eta1 / n},
                      {"eta2_mean", eta2 / n}}
                     .dump(2)
              << "\n";
    return 0;
}

struct SynthArgs {
    std::string config, out;
    std::optional<std::uint64_t> seed;
};

int run_synth(const SynthArgs& a) {
    json cfg = load_config(a.config, {"detector", "detector2", "pair_source",
                                      "angles_deg", "tau1", "tau2",
                                      "duration_per_angle", "seed"});
    const apdsim::DetectorParams p1 = detector_from_config(cfg, "detector");
    const apdsim::DetectorParams p2 = cfg.contains("detector2")
                                          ? detector_from_config(cfg, "detector2")
                                          : p1;

    if (!cfg.contains("pair_source"))
        throw ConfigError("config needs a \"pair_source\" section");
    apdsim::PairSourceModel model;
    try {
        const json& ps = cfg.at("pair_source");
        apdsim::check_keys(ps, "pair_source", {"pair_rate"},
                           {"visibility", "phase_deg", "background1", "background2"});
        model.pair_rate = ps.at("pair_rate").get<double>();
        model.visibility = ps.value("visibility", 1.0);
        model.phase_deg = ps.value("phase_deg", 0.0);
        model.background1 = ps.value("background1", 0.0);
        model.background2 = ps.value("background2", 0.0);
        model.validate();
    } catch (const apdsim::ParseError& e) {
        throw ConfigError(e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("pair_source: ") + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("pair_source: ") + e.what());
    }

    std::vector<double> angles;
    try {
        if (!cfg.contains("angles_deg"))
            throw ConfigError("config needs \"angles_deg\"");
        angles = cfg.at("angles_deg").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("angles_deg: ") + e.what());
    }

    const double tau1 = config_number(cfg, "tau1", 0.0);
    const double tau2 = config_number(cfg, "tau2", 0.0);
    const double dur = config_number(cfg, "duration_per_angle", 1.0);
    std::uint64_t seed = cfg.value("seed", std::uint64_t{1});
    if (a.seed) seed = *a.seed;

    apdsim::FringeDataset ds;
    try {
        ds = apdsim::generate_fringe_dataset(model, p1, p2, angles, tau1, tau2,
                                             dur, seed);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    write_atomic(a.out, [&](std::ostream& out) { apdsim::write_fringe_csv(ds, out); });
    std::cerr << ds.points.size() << " fringe points -> " << a.out << "\n";
    return 0;
}

int run_table_csv(const std::string& table_path, const std::string& out) {
    const apdsim::DutyCycleTable table = apdsim::load_table(table_path);
    write_atomic(out, [&](std::ostream& os) { apdsim::write_table_csv(table, os); });
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geiger-mode APD saturation model: duty-cycle estimation and "
                 "accidental-coincidence correction"};
    app.set_version_flag("--version", "apdsim 0.1.0");
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* c_sim = app.add_subcommand(
        "simulate-detector", "Sweep a photon stream through one detector");
    c_sim->add_option("--config", sim.config, "JSON config (detector, source, duration, seed)");
    double sim_rate = 0.0, sim_duration = 0.0;
    std::uint64_t sim_seed = 0;
    CLI::Option* o_rate = c_sim->add_option("--rate", sim_rate, "input photon rate, Hz");
    CLI::Option* o_dur = c_sim->add_option("--duration", sim_duration, "window, seconds");
    CLI::Option* o_seed = c_sim->add_option("--seed", sim_seed, "random seed");
    c_sim->add_option("--trace-out", sim.trace_out, "per-event trace CSV path");
    c_sim->add_option("--events-out", sim.events_out, "input event CSV path");

    BuildLutArgs bl;
    CLI::App* c_lut = app.add_subcommand("build-lut",
                                         "Simulate a duty-cycle lookup table");
    c_lut->add_option("--config", bl.config, "JSON config (detector, lut, seed)")
        ->required();
    c_lut->add_option("--out", bl.out, "table JSON path")->required();
    c_lut->add_option("--csv-out", bl.csv_out, "flat CSV of the grid");
    c_lut->add_option("--jobs", bl.jobs, "worker threads")
        ->check(CLI::PositiveNumber);
    c_lut->add_option("--timestamp", bl.timestamp,
                      "fix the provenance timestamp (reproducible builds)");
    std::uint64_t lut_seed = 0;
    CLI::Option* o_lut_seed = c_lut->add_option("--seed", lut_seed, "random seed");

    std::string lk_table;
    double lk_ve = 0.0, lk_rate = 0.0;
    bool lk_json = false;
    CLI::App* c_lk = app.add_subcommand("lookup", "Duty cycle at (v_e, observed rate)");
    c_lk->add_option("--table", lk_table, "table JSON path")->required();
    c_lk->add_option("--v-e", lk_ve, "nominal excess bias, volts")->required();
    c_lk->add_option("--observed-rate", lk_rate, "observed singles rate, Hz")
        ->required();
    c_lk->add_flag("--json", lk_json, "JSON output");

    CorrectArgs co;
    CLI::App* c_co = app.add_subcommand(
        "correct", "Subtract accidentals from a coincidence measurement");
    c_co->add_option("--table", co.table, "duty-cycle table for both detectors");
    c_co->add_option("--table1", co.table1, "duty-cycle table, detector 1");
    c_co->add_option("--table2", co.table2, "duty-cycle table, detector 2");
    c_co->add_option("--s1", co.m.s1, "observed singles rate 1, Hz")->required();
    c_co->add_option("--s2", co.m.s2, "observed singles rate 2, Hz")->required();
    c_co->add_option("--tau1", co.m.tau1, "gate width 1, seconds")->required();
    c_co->add_option("--tau2", co.m.tau2, "gate width 2, seconds")->required();
    c_co->add_option("--c-raw", co.m.c_raw, "raw coincidence rate, Hz")->required();
    c_co->add_option("--v-e1", co.m.v_e1, "excess bias, detector 1");
    c_co->add_option("--v-e2", co.m.v_e2, "excess bias, detector 2");
    double co_eta1 = 0.0, co_eta2 = 0.0;
    CLI::Option* o_eta1 = c_co->add_option("--eta1", co_eta1, "duty cycle 1, bypasses tables");
    CLI::Option* o_eta2 = c_co->add_option("--eta2", co_eta2, "duty cycle 2, bypasses tables");

    FitArgs fit;
    CLI::App* c_fit = app.add_subcommand(
        "fit-visibility", "Fit a fringe dataset raw, naive, and corrected");
    c_fit->add_option("--data", fit.data, "fringe CSV path")->required();
    c_fit->add_option("--table", fit.table, "duty-cycle table for both detectors");
    c_fit->add_option("--table1", fit.table1, "duty-cycle table, detector 1");
    c_fit->add_option("--table2", fit.table2, "duty-cycle table, detector 2");
    double f_tau1 = 0, f_tau2 = 0, f_ve1 = 0, f_ve2 = 0;
    CLI::Option* o_ft1 = c_fit->add_option("--tau1", f_tau1, "override gate width 1");
    CLI::Option* o_ft2 = c_fit->add_option("--tau2", f_tau2, "override gate width 2");
    CLI::Option* o_fv1 = c_fit->add_option("--v-e1", f_ve1, "override excess bias 1");
    CLI::Option* o_fv2 = c_fit->add_option("--v-e2", f_ve2, "override excess bias 2");

    SynthArgs sy;
    CLI::App* c_sy = app.add_subcommand("synth-fringe",
                                        "Simulate a polarisation fringe scan");
    c_sy->add_option("--config", sy.config, "JSON config")->required();
    c_sy->add_option("--out", sy.out, "fringe CSV path")->required();
    std::uint64_t sy_seed = 0;
    CLI::Option* o_sy_seed = c_sy->add_option("--seed", sy_seed, "random seed");

    std::string tc_table, tc_out;
    CLI::App* c_tc = app.add_subcommand("table-csv",
                                        "Export a table as flat CSV");
    c_tc->add_option("--table", tc_table, "table JSON path")->required();
    c_tc->add_option("--out", tc_out, "CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_sim->parsed()) {
            if (o_rate->count()) sim.rate = sim_rate;
            if (o_dur->count()) sim.duration = sim_duration;
            if (o_seed->count()) sim.seed = sim_seed;
            return run_simulate(sim);
        }
        if (c_lut->parsed()) {
            if (o_lut_seed->count()) bl.seed = lut_seed;
            return run_build_lut(bl);
        }
        if (c_lk->parsed()) return run_lookup(lk_table, lk_ve, lk_rate, lk_json);
        if (c_co->parsed()) {
            if (o_eta1->count()) co.eta1 = co_eta1;
            if (o_eta2->count()) co.eta2 = co_eta2;
            return run_correct(co);
        }
        if (c_fit->parsed()) {
            if (o_ft1->count()) fit.tau1 = f_tau1;
            if (o_ft2->count()) fit.tau2 = f_tau2;
            if (o_fv1->count()) fit.v_e1 = f_ve1;
            if (o_fv2->count()) fit.v_e2 = f_ve2;
            return run_fit(fit);
        }
        if (c_sy->parsed()) {
            if (o_sy_seed->count()) sy.seed = sy_seed;
            return run_synth(sy);
        }
        if (c_tc->parsed()) return run_table_csv(tc_table, tc_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const apdsim::RangeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const apdsim::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const apdsim::FitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const apdsim::BuildError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 2;
}
