#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "apdsim/coincidence.hpp"
#include "apdsim/detector_sim.hpp"
#include "apdsim/errors.hpp"
#include "apdsim/event_stream.hpp"
#include "apdsim/experiment_sim.hpp"
#include "apdsim/fringe_analysis.hpp"
#include "apdsim/lut.hpp"
#include "apdsim/recovery_model.hpp"
#include "apdsim/rng.hpp"

namespace py = pybind11;
using namespace apdsim;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Geiger-mode APD saturation model: recovery dynamics, duty-cycle "
              "tables, coincidence correction, fringe analysis";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    auto range_err = py::register_exception<RangeError>(m, "RangeError", PyExc_ValueError);
    py::register_exception<SaturationAmbiguityError>(m, "SaturationAmbiguityError",
                                                     range_err.ptr());
    py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);
    py::register_exception<BuildError>(m, "BuildError", PyExc_RuntimeError);

    py::enum_<RecoveryKind>(m, "RecoveryKind")
        .value("exponential_recharge", RecoveryKind::exponential_recharge)
        .value("stepwise_dead_time", RecoveryKind::stepwise_dead_time);

    py::class_<DetectorParams>(m, "DetectorParams")
        .def(py::init<>())
        .def_readwrite("v_e_set", &DetectorParams::v_e_set)
        .def_readwrite("rc_time", &DetectorParams::rc_time)
        .def_readwrite("v_characteristic", &DetectorParams::v_characteristic)
        .def_readwrite("pulse_gain", &DetectorParams::pulse_gain)
        .def_readwrite("v_cld", &DetectorParams::v_cld)
        .def_readwrite("sigma_rel", &DetectorParams::sigma_rel)
        .def_readwrite("recovery_kind", &DetectorParams::recovery_kind)
        .def_readwrite("dead_time", &DetectorParams::dead_time)
        .def("validate", &DetectorParams::validate);

    m.def("excess_voltage", &excess_voltage, py::arg("t"), py::arg("params"));
    m.def("avalanche_probability", &avalanche_probability, py::arg("v_e"),
          py::arg("params"));
    m.def("pulse_height_mean", &pulse_height_mean, py::arg("v_e"), py::arg("params"));
    m.def("threshold_crossing_time", &threshold_crossing_time, py::arg("params"));
    m.def("sigma_time", &sigma_time, py::arg("params"));
    m.def("sense_probability", &sense_probability, py::arg("t"), py::arg("params"));
    m.def("detection_probability", &detection_probability, py::arg("t"),
          py::arg("params"));
    m.def("detection_probability_limit", &detection_probability_limit,
          py::arg("params"));

    py::class_<EventSequence>(m, "EventSequence")
        .def(py::init<>())
        .def_readwrite("times", &EventSequence::times)
        .def_readwrite("duration", &EventSequence::duration)
        .def_readwrite("source_rate", &EventSequence::source_rate)
        .def_readwrite("seed", &EventSequence::seed)
        .def("validate", &EventSequence::validate, py::arg("strict") = true)
        .def("__len__", [](const EventSequence& s) { return s.times.size(); });

    py::class_<SourceModel> source(m, "SourceModel");
    py::enum_<SourceModel::Kind>(source, "Kind")
        .value("poisson", SourceModel::Kind::poisson)
        .value("custom", SourceModel::Kind::custom);
    source.def(py::init<>())
        .def_readwrite("kind", &SourceModel::kind)
        .def_readwrite("rate", &SourceModel::rate)
        .def_readwrite("dark_rate", &SourceModel::dark_rate)
        .def_readwrite("waiting_time_sampler", &SourceModel::waiting_time_sampler);

    py::class_<SimRng>(m, "SimRng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("uniform", &SimRng::uniform)
        .def("exponential", &SimRng::exponential, py::arg("rate"))
        .def("gaussian", &SimRng::gaussian, py::arg("mean"), py::arg("sd"));

    m.def("generate", &generate, py::arg("model"), py::arg("duration"),
          py::arg("seed"));
    m.def("merge", &merge, py::arg("a"), py::arg("b"));
    m.def("write_events_csv",
          py::overload_cast<const EventSequence&, const std::filesystem::path&>(
              &write_events_csv),
          py::arg("seq"), py::arg("path"));
    m.def("read_events_csv",
          py::overload_cast<const std::filesystem::path&>(&read_events_csv),
          py::arg("path"));

    py::enum_<Disposition>(m, "Disposition")
        .value("no_avalanche", Disposition::no_avalanche)
        .value("avalanche_unsensed", Disposition::avalanche_unsensed)
        .value("avalanche_sensed", Disposition::avalanche_sensed);

    py::class_<DetectorTrace>(m, "DetectorTrace")
        .def_readonly("input_count", &DetectorTrace::input_count)
        .def_readonly("dispositions", &DetectorTrace::dispositions)
        .def_readonly("avalanche_times", &DetectorTrace::avalanche_times)
        .def_readonly("pulse_heights", &DetectorTrace::pulse_heights)
        .def_readonly("sensed_count", &DetectorTrace::sensed_count)
        .def_readonly("duration", &DetectorTrace::duration)
        .def_readonly("params", &DetectorTrace::params)
        .def_readonly("seed", &DetectorTrace::seed);

    py::class_<DutyCycleEstimate>(m, "DutyCycleEstimate")
        .def_readonly("input_rate", &DutyCycleEstimate::input_rate)
        .def_readonly("observed_rate", &DutyCycleEstimate::observed_rate)
        .def_readonly("eta_fractional", &DutyCycleEstimate::eta_fractional)
        .def_readonly("stderr_fractional", &DutyCycleEstimate::stderr_fractional)
        .def_readonly("eta_area", &DutyCycleEstimate::eta_area)
        .def_readonly("input_count", &DutyCycleEstimate::input_count)
        .def_readonly("avalanche_count", &DutyCycleEstimate::avalanche_count)
        .def_readonly("sensed_count", &DutyCycleEstimate::sensed_count)
        .def_readonly("duration", &DutyCycleEstimate::duration);

    m.def("simulate", &simulate, py::arg("seq"), py::arg("params"), py::arg("seed"));
    m.def("sensed_times", &sensed_times, py::arg("trace"));
    m.def("eta_fractional", &eta_fractional, py::arg("trace"));
    m.def("eta_area", &eta_area, py::arg("trace"));
    m.def("estimate_duty_cycle", &estimate_duty_cycle, py::arg("trace"));
    m.def("rate_sweep", &rate_sweep, py::arg("params"), py::arg("input_rates"),
          py::arg("duration"), py::arg("seed"), py::arg("min_events") = 0.0,
          py::call_guard<py::gil_scoped_release>());

    py::class_<LutProvenance>(m, "LutProvenance")
        .def_readwrite("detector", &LutProvenance::detector)
        .def_readwrite("input_rates", &LutProvenance::input_rates)
        .def_readwrite("duration", &LutProvenance::duration)
        .def_readwrite("min_events_per_cell", &LutProvenance::min_events_per_cell)
        .def_readwrite("seed", &LutProvenance::seed)
        .def_readwrite("created_utc", &LutProvenance::created_utc);

    py::class_<DutyCycleTable>(m, "DutyCycleTable")
        .def(py::init<>())
        .def_readwrite("v_e_axis", &DutyCycleTable::v_e_axis)
        .def_readwrite("observed_rate_axis", &DutyCycleTable::observed_rate_axis)
        .def_readwrite("eta", &DutyCycleTable::eta)
        .def_readwrite("provenance", &DutyCycleTable::provenance)
        .def("at", &DutyCycleTable::at, py::arg("i_ve"), py::arg("j_obs"))
        .def("validate", &DutyCycleTable::validate);

    py::class_<LutBuildOptions>(m, "LutBuildOptions")
        .def(py::init<>())
        .def_readwrite("min_events_per_cell", &LutBuildOptions::min_events_per_cell)
        .def_readwrite("jobs", &LutBuildOptions::jobs)
        .def_readwrite("created_utc", &LutBuildOptions::created_utc);

    m.def("build_table", &build_table, py::arg("base"), py::arg("v_e_values"),
          py::arg("input_rates"), py::arg("duration"), py::arg("seed"),
          py::arg("options") = LutBuildOptions{},
          py::call_guard<py::gil_scoped_release>());
    m.def("lookup_eta", &lookup_eta, py::arg("table"), py::arg("v_e"),
          py::arg("observed_rate"));
    m.def("save_table",
          py::overload_cast<const DutyCycleTable&, const std::filesystem::path&>(
              &save_table),
          py::arg("table"), py::arg("path"));
    m.def("load_table",
          py::overload_cast<const std::filesystem::path&>(&load_table),
          py::arg("path"));

    py::class_<CoincidenceMeasurement>(m, "CoincidenceMeasurement")
        .def(py::init<>())
        .def_readwrite("s1", &CoincidenceMeasurement::s1)
        .def_readwrite("s2", &CoincidenceMeasurement::s2)
        .def_readwrite("tau1", &CoincidenceMeasurement::tau1)
        .def_readwrite("tau2", &CoincidenceMeasurement::tau2)
        .def_readwrite("c_raw", &CoincidenceMeasurement::c_raw)
        .def_readwrite("v_e1", &CoincidenceMeasurement::v_e1)
        .def_readwrite("v_e2", &CoincidenceMeasurement::v_e2);

    py::class_<CorrectionResult>(m, "CorrectionResult")
        .def_readonly("eta1", &CorrectionResult::eta1)
        .def_readonly("eta2", &CorrectionResult::eta2)
        .def_readonly("c_acc_naive", &CorrectionResult::c_acc_naive)
        .def_readonly("c_acc_corrected", &CorrectionResult::c_acc_corrected)
        .def_readonly("c_naive", &CorrectionResult::c_naive)
        .def_readonly("c_corrected", &CorrectionResult::c_corrected)
        .def_readonly("negative", &CorrectionResult::negative);

    m.def("accidentals_naive", &accidentals_naive, py::arg("s1"), py::arg("s2"),
          py::arg("tau1"), py::arg("tau2"));
    m.def("accidentals_corrected", &accidentals_corrected, py::arg("s1"),
          py::arg("s2"), py::arg("tau1"), py::arg("tau2"), py::arg("eta1"),
          py::arg("eta2"));
    m.def("correct_with_eta", &correct_with_eta, py::arg("measurement"),
          py::arg("eta1"), py::arg("eta2"));
    m.def("correct",
          py::overload_cast<const CoincidenceMeasurement&, const DutyCycleTable&,
                            const DutyCycleTable&>(&correct),
          py::arg("measurement"), py::arg("table1"), py::arg("table2"));
    m.def("correct",
          py::overload_cast<const CoincidenceMeasurement&, const DutyCycleTable&>(
              &correct),
          py::arg("measurement"), py::arg("table"));

    m.def("count_overlaps",
          py::overload_cast<const DetectorTrace&, const DetectorTrace&, double,
                            double>(&count_overlaps),
          py::arg("trace1"), py::arg("trace2"), py::arg("tau1"), py::arg("tau2"));
    m.def("count_overlaps",
          py::overload_cast<const std::vector<double>&, const std::vector<double>&,
                            double, double>(&count_overlaps),
          py::arg("times1"), py::arg("times2"), py::arg("tau1"), py::arg("tau2"));

    py::class_<AccidentalsMeasurement>(m, "AccidentalsMeasurement")
        .def_readonly("measured_rate", &AccidentalsMeasurement::measured_rate)
        .def_readonly("overlap_count", &AccidentalsMeasurement::overlap_count)
        .def_readonly("s1", &AccidentalsMeasurement::s1)
        .def_readonly("s2", &AccidentalsMeasurement::s2)
        .def_readonly("duration", &AccidentalsMeasurement::duration)
        .def_readonly("est1", &AccidentalsMeasurement::est1)
        .def_readonly("est2", &AccidentalsMeasurement::est2);

    m.def("measure_accidentals", &measure_accidentals, py::arg("params1"),
          py::arg("params2"), py::arg("rate1"), py::arg("rate2"), py::arg("tau1"),
          py::arg("tau2"), py::arg("duration"), py::arg("seed"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<PairSourceModel>(m, "PairSourceModel")
        .def(py::init<>())
        .def_readwrite("pair_rate", &PairSourceModel::pair_rate)
        .def_readwrite("visibility", &PairSourceModel::visibility)
        .def_readwrite("phase_deg", &PairSourceModel::phase_deg)
        .def_readwrite("background1", &PairSourceModel::background1)
        .def_readwrite("background2", &PairSourceModel::background2)
        .def("validate", &PairSourceModel::validate);

    py::class_<FringePoint>(m, "FringePoint")
        .def(py::init<>())
        .def_readwrite("angle_deg", &FringePoint::angle_deg)
        .def_readwrite("c_raw_counts", &FringePoint::c_raw_counts)
        .def_readwrite("s1_counts", &FringePoint::s1_counts)
        .def_readwrite("s2_counts", &FringePoint::s2_counts)
        .def_readwrite("integration_s", &FringePoint::integration_s);

    py::class_<FringeDataset>(m, "FringeDataset")
        .def(py::init<>())
        .def_readwrite("points", &FringeDataset::points)
        .def_readwrite("tau1", &FringeDataset::tau1)
        .def_readwrite("tau2", &FringeDataset::tau2)
        .def_readwrite("v_e1", &FringeDataset::v_e1)
        .def_readwrite("v_e2", &FringeDataset::v_e2)
        .def("validate", &FringeDataset::validate);

    m.def("generate_fringe_dataset", &generate_fringe_dataset, py::arg("model"),
          py::arg("params1"), py::arg("params2"), py::arg("angles_deg"),
          py::arg("tau1"), py::arg("tau2"), py::arg("duration_per_angle"),
          py::arg("seed"), py::call_guard<py::gil_scoped_release>());
    m.def("write_fringe_csv",
          py::overload_cast<const FringeDataset&, const std::filesystem::path&>(
              &write_fringe_csv),
          py::arg("dataset"), py::arg("path"));
    m.def("read_fringe_csv",
          py::overload_cast<const std::filesystem::path&>(&read_fringe_csv),
          py::arg("path"));

    py::class_<VisibilityFit>(m, "VisibilityFit")
        .def_readonly("offset", &VisibilityFit::offset)
        .def_readonly("amplitude", &VisibilityFit::amplitude)
        .def_readonly("visibility", &VisibilityFit::visibility)
        .def_readonly("phase_deg", &VisibilityFit::phase_deg)
        .def_readonly("offset_err", &VisibilityFit::offset_err)
        .def_readonly("amplitude_err", &VisibilityFit::amplitude_err)
        .def_readonly("visibility_err", &VisibilityFit::visibility_err)
        .def_readonly("phase_err_deg", &VisibilityFit::phase_err_deg)
        .def_readonly("residual_rms", &VisibilityFit::residual_rms)
        .def_readonly("n_points", &VisibilityFit::n_points)
        .def_readonly("over_range", &VisibilityFit::over_range);

    py::class_<FringeAnalysis>(m, "FringeAnalysis")
        .def_readonly("raw", &FringeAnalysis::raw)
        .def_readonly("naive", &FringeAnalysis::naive)
        .def_readonly("corrected", &FringeAnalysis::corrected)
        .def_readonly("per_point", &FringeAnalysis::per_point);

    m.def("fit_visibility",
          py::overload_cast<const std::vector<double>&, const std::vector<double>&>(
              &fit_visibility),
          py::arg("angles_deg"), py::arg("rates"));
    m.def("fit_visibility",
          py::overload_cast<const std::vector<double>&, const std::vector<double>&,
                            const std::vector<double>&>(&fit_visibility),
          py::arg("angles_deg"), py::arg("rates"), py::arg("variances"));
    m.def("analyze", &analyze, py::arg("dataset"), py::arg("table1"),
          py::arg("table2"));
}
