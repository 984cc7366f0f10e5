#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "apdsim/rng.hpp"

namespace apdsim {

/// Timestamps of photons arriving at one detector, with the metadata needed
/// to regenerate or trim the sequence.
struct EventSequence {
    std::vector<double> times;   ///< seconds, non-decreasing, within [0, duration)
    double duration = 0.0;       ///< observation window length, seconds
    double source_rate = 0.0;    ///< nominal total rate the stream was built for
    std::uint64_t seed = 0;      ///< seed used when the stream was generated

    /// Throws std::invalid_argument on unsorted or out-of-window timestamps.
    /// Generated streams are strictly increasing; merged streams may carry
    /// exact ties, so those validate with strict = false.
    void validate(bool strict = true) const;
};

/// Photon source description. Dark counts are an independent Poisson
/// component folded into the stream regardless of kind.
struct SourceModel {
    enum class Kind { poisson, custom };

    Kind kind = Kind::poisson;
    double rate = 0.0;       ///< mean arrival rate, Hz
    double dark_rate = 0.0;  ///< detector dark count rate, Hz

    /// Waiting-time sampler for kind == custom; draws successive gaps in
    /// seconds. Must be set for custom sources, ignored otherwise.
    std::function<double(SimRng&)> waiting_time_sampler;

    void validate() const;
};

/// Draws one event stream over [0, duration). Deterministic in (model, duration, seed).
EventSequence generate(const SourceModel& model, double duration, std::uint64_t seed);

/// Interleaves two streams of equal duration into one sorted stream.
/// Exact ties survive as distinct adjacent events.
EventSequence merge(const EventSequence& a, const EventSequence& b);

/// CSV with a metadata header comment; timestamps keep 17 significant
/// digits so a round trip is bit exact.
void write_events_csv(const EventSequence& seq, std::ostream& out);
void write_events_csv(const EventSequence& seq, const std::filesystem::path& path);
EventSequence read_events_csv(std::istream& in);
EventSequence read_events_csv(const std::filesystem::path& path);

} // namespace apdsim
