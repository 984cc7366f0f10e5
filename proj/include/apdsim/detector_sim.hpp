#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "apdsim/event_stream.hpp"
#include "apdsim/recovery_model.hpp"

namespace apdsim {

enum class Disposition : std::uint8_t {
    no_avalanche,        ///< photon arrived while the bias was too low
    avalanche_unsensed,  ///< avalanche fired but the pulse missed threshold
    avalanche_sensed,    ///< avalanche fired and was counted
};

std::string to_string(Disposition d);

/// Outcome of sweeping one event stream through a detector.
///
/// dispositions is parallel to the input timestamps; avalanche_times and
/// pulse_heights are parallel to each other and cover every avalanche,
/// sensed or not. An avalanche is sensed exactly when its pulse height
/// reaches params.v_cld.
struct DetectorTrace {
    std::size_t input_count = 0;
    std::vector<Disposition> dispositions;
    std::vector<double> avalanche_times;
    std::vector<double> pulse_heights;
    std::size_t sensed_count = 0;
    double duration = 0.0;
    DetectorParams params;
    std::uint64_t seed = 0;
};

/// Timestamps of sensed avalanches, the stream a counter downstream sees.
std::vector<double> sensed_times(const DetectorTrace& trace);

/// Both duty-cycle estimates plus the counting context they came from.
struct DutyCycleEstimate {
    double input_rate = 0.0;
    double observed_rate = 0.0;
    double eta_fractional = 0.0;     ///< sensed / input
    double stderr_fractional = 0.0;  ///< binomial standard error of the above
    double eta_area = 0.0;           ///< time average of detection probability
    std::size_t input_count = 0;
    std::size_t avalanche_count = 0;
    std::size_t sensed_count = 0;
    double duration = 0.0;
};

/// Sweeps the stream through the detector in time order. Every avalanche
/// resets the recovery clock whether or not it was sensed; the detector
/// starts fully recharged. Deterministic in (seq, params, seed).
DetectorTrace simulate(const EventSequence& seq, const DetectorParams& params,
                       std::uint64_t seed);

/// Fraction of input photons that were sensed. Throws std::invalid_argument
/// on an empty trace, where the ratio is undefined.
double eta_fractional(const DetectorTrace& trace);

/// Time average of the detection probability along the trace: the detector
/// is fully live before the first avalanche, and each avalanche restarts
/// the recovery curve. Segments beyond the recovery horizon contribute the
/// asymptotic detection probability exactly.
double eta_area(const DetectorTrace& trace);

/// Bundles both estimators with the observed rates.
DutyCycleEstimate estimate_duty_cycle(const DetectorTrace& trace);

/// One sweep point per input rate. Each point draws a fresh
/// Poisson stream; the window is stretched to max(duration, min_events/rate)
/// so high-rate points keep their statistics without inflating low-rate
/// run time.
std::vector<DutyCycleEstimate> rate_sweep(const DetectorParams& params,
                                          const std::vector<double>& input_rates,
                                          double duration, std::uint64_t seed,
                                          double min_events = 0.0);

/// Per-event CSV: (time_seconds, disposition, pulse_height). The sequence
/// must be the one the trace was produced from.
void write_trace_csv(const EventSequence& seq, const DetectorTrace& trace,
                     std::ostream& out);
void write_trace_csv(const EventSequence& seq, const DetectorTrace& trace,
                     const std::filesystem::path& path);

} // namespace apdsim
