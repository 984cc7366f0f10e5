#include "apdsim/event_stream.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "apdsim/errors.hpp"

namespace apdsim {

void EventSequence::validate(bool strict) const {
    if (!(duration >= 0.0)) throw std::invalid_argument("duration must be non-negative");
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        if (!(t >= 0.0 && t < duration))
            throw std::invalid_argument("timestamp outside [0, duration)");
        if (i > 0) {
            if (strict ? !(times[i - 1] < t) : !(times[i - 1] <= t))
                throw std::invalid_argument("timestamps not sorted");
        }
    }
}

void SourceModel::validate() const {
    if (!(rate >= 0.0)) throw std::invalid_argument("source rate must be non-negative");
    if (!(dark_rate >= 0.0)) throw std::invalid_argument("dark rate must be non-negative");
    if (kind == Kind::custom && !waiting_time_sampler)
        throw std::invalid_argument("custom source needs a waiting-time sampler");
}

namespace {

std::vector<double> draw_poisson_times(double rate, double duration, SimRng& rng) {
    std::vector<double> times;
    if (rate <= 0.0) return times;
    times.reserve(static_cast<std::size_t>(rate * duration * 1.01) + 16);
    double t = rng.exponential(rate);
    while (t < duration) {
        times.push_back(t);
        t += rng.exponential(rate);
    }
    return times;
}

} // namespace

EventSequence generate(const SourceModel& model, double duration, std::uint64_t seed) {
    model.validate();
    if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");

    EventSequence seq;
    seq.duration = duration;
    seq.source_rate = model.rate + model.dark_rate;
    seq.seed = seed;

    SimRng rng(seed);
    if (model.kind == SourceModel::Kind::poisson) {
        // Source and dark counts are independent Poisson processes; their
        // superposition is Poisson at the summed rate, so one pass suffices.
        seq.times = draw_poisson_times(model.rate + model.dark_rate, duration, rng);
    } else {
        double t = 0.0;
        for (;;) {
            const double gap = model.waiting_time_sampler(rng);
            if (!(gap > 0.0))
                throw std::invalid_argument("waiting-time sampler returned a non-positive gap");
            t += gap;
            if (t >= duration) break;
            seq.times.push_back(t);
        }
        if (model.dark_rate > 0.0) {
            EventSequence dark;
            dark.duration = duration;
            dark.source_rate = model.dark_rate;
            dark.seed = seed;
            dark.times = draw_poisson_times(model.dark_rate, duration, rng);
            EventSequence base = seq;
            seq = merge(base, dark);
            seq.seed = seed;
            seq.source_rate = model.rate + model.dark_rate;
        }
    }
    return seq;
}

EventSequence merge(const EventSequence& a, const EventSequence& b) {
    if (a.duration != b.duration)
        throw std::invalid_argument("cannot merge streams of different duration");
    EventSequence out;
    out.duration = a.duration;
    out.source_rate = a.source_rate + b.source_rate;
    out.seed = 0; // no single seed regenerates a merged stream
    out.times.resize(a.times.size() + b.times.size());
    std::merge(a.times.begin(), a.times.end(), b.times.begin(), b.times.end(),
               out.times.begin());
    return out;
}

namespace {

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

void write_events_csv(const EventSequence& seq, std::ostream& out) {
    out << "# apdsim-events v1 seed=" << seq.seed
        << " rate=" << fmt17(seq.source_rate)
        << " duration=" << fmt17(seq.duration) << "\n";
    out << "index,time_seconds\n";
    for (std::size_t i = 0; i < seq.times.size(); ++i)
        out << i << ',' << fmt17(seq.times[i]) << "\n";
}

void write_events_csv(const EventSequence& seq, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_events_csv(seq, out);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

EventSequence read_events_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("empty event file");

    EventSequence seq;
    {
        unsigned long long seed = 0;
        double rate = 0.0, duration = 0.0;
        if (std::sscanf(line.c_str(), "# apdsim-events v1 seed=%llu rate=%lg duration=%lg",
                        &seed, &rate, &duration) != 3)
            throw ParseError("line 1: missing or malformed event header");
        seq.seed = seed;
        seq.source_rate = rate;
        seq.duration = duration;
    }

    if (!std::getline(in, line) || line.rfind("index,time_seconds", 0) != 0)
        throw ParseError("line 2: expected column header index,time_seconds");

    std::size_t lineno = 2;
    std::size_t expected_index = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        unsigned long long idx = 0;
        double t = 0.0;
        if (std::sscanf(line.c_str(), "%llu,%lg", &idx, &t) != 2)
            throw ParseError("line " + std::to_string(lineno) + ": malformed event row");
        if (idx != expected_index)
            throw ParseError("line " + std::to_string(lineno) + ": non-sequential event index");
        ++expected_index;
        seq.times.push_back(t);
    }

    try {
        seq.validate(false);
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("event file invalid: ") + e.what());
    }
    return seq;
}

EventSequence read_events_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    return read_events_csv(in);
}

} // namespace apdsim
