#include "apdsim/detector_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "apdsim/rng.hpp"

namespace apdsim {

std::string to_string(Disposition d) {
    switch (d) {
    case Disposition::no_avalanche: return "no-avalanche";
    case Disposition::avalanche_unsensed: return "avalanche-unsensed";
    case Disposition::avalanche_sensed: return "avalanche-sensed";
    }
    throw std::invalid_argument("unknown disposition");
}

std::vector<double> sensed_times(const DetectorTrace& trace) {
    std::vector<double> out;
    out.reserve(trace.sensed_count);
    for (std::size_t k = 0; k < trace.avalanche_times.size(); ++k)
        if (trace.pulse_heights[k] >= trace.params.v_cld)
            out.push_back(trace.avalanche_times[k]);
    return out;
}

DetectorTrace simulate(const EventSequence& seq, const DetectorParams& params,
                       std::uint64_t seed) {
    params.validate();
    seq.validate(false);

    DetectorTrace tr;
    tr.params = params;
    tr.seed = seed;
    tr.duration = seq.duration;
    tr.input_count = seq.times.size();
    tr.dispositions.resize(seq.times.size(), Disposition::no_avalanche);

    SimRng rng(seed);
    const bool stepwise = params.recovery_kind == RecoveryKind::stepwise_dead_time;
    const double full_height = pulse_height_mean(params.v_e_set, params);
    double t_last = -std::numeric_limits<double>::infinity();

    for (std::size_t i = 0; i < seq.times.size(); ++i) {
        const double t = seq.times[i];
        const double dt = t - t_last;

        if (stepwise) {
            if (dt >= params.dead_time) {
                tr.dispositions[i] = Disposition::avalanche_sensed;
                tr.avalanche_times.push_back(t);
                tr.pulse_heights.push_back(full_height);
                ++tr.sensed_count;
                t_last = t;
            }
            continue;
        }

        const double v_e = excess_voltage(dt, params);
        if (rng.uniform() < avalanche_probability(v_e, params)) {
            const double mean = pulse_height_mean(v_e, params);
            double height = rng.gaussian(mean, params.sigma_rel * mean);
            if (height < 0.0) height = 0.0;
            const bool sensed = height >= params.v_cld;
            tr.dispositions[i] = sensed ? Disposition::avalanche_sensed
                                        : Disposition::avalanche_unsensed;
            tr.avalanche_times.push_back(t);
            tr.pulse_heights.push_back(height);
            if (sensed) ++tr.sensed_count;
            t_last = t; // any avalanche discharges the junction
        }
    }
    return tr;
}

double eta_fractional(const DetectorTrace& trace) {
    if (trace.input_count == 0)
        throw std::invalid_argument("duty cycle undefined for a trace with no input events");
    return static_cast<double>(trace.sensed_count) /
           static_cast<double>(trace.input_count);
}

namespace {

/// Tabulated cumulative integral of the detection probability after one
/// avalanche. The grid is dense across the sensing transition (sigma_time
/// scale) and coarse elsewhere (rc_time scale); beyond the horizon the
/// integrand has converged to its asymptote and the tail is added exactly.
class RecoveryIntegral {
public:
    explicit RecoveryIntegral(const DetectorParams& p) : p_(p) {
        pd_inf_ = detection_probability_limit(p);
        horizon_ = 50.0 * p.rc_time;

        const double coarse = p.rc_time / 400.0;
        const double t0 = threshold_crossing_time(p);
        const double s = sigma_time(p);
        double a = std::max(0.0, t0 - 10.0 * s);
        double b = std::min(horizon_, t0 + 10.0 * s);

        u_.push_back(0.0);
        auto fill = [this](double lo, double hi, double step) {
            if (!(hi > lo)) return;
            const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / step)));
            for (int k = 1; k <= n; ++k)
                u_.push_back(lo + (hi - lo) * static_cast<double>(k) / n);
        };
        fill(0.0, a, coarse);
        if (s > 0.0) fill(a, b, s / 16.0);
        fill(std::max(a, b), horizon_, coarse);

        g_.resize(u_.size());
        g_[0] = 0.0;
        for (std::size_t k = 1; k < u_.size(); ++k)
            g_[k] = g_[k - 1] + panel(u_[k - 1], u_[k]);
    }

    /// Integral of detection probability over (0, len] after an avalanche.
    double integral(double len) const {
        if (!(len > 0.0)) return 0.0;
        if (len >= horizon_) return g_.back() + (len - horizon_) * pd_inf_;
        const auto it = std::upper_bound(u_.begin(), u_.end(), len);
        const std::size_t k = static_cast<std::size_t>(it - u_.begin()) - 1;
        return g_[k] + panel(u_[k], len);
    }

    double asymptote() const { return pd_inf_; }

private:
    double panel(double lo, double hi) const {
        const double h = hi - lo;
        if (!(h > 0.0)) return 0.0;
        const double fl = detection_probability(lo, p_);
        const double fm = detection_probability(0.5 * (lo + hi), p_);
        const double fh = detection_probability(hi, p_);
        return h * (fl + 4.0 * fm + fh) / 6.0;
    }

    DetectorParams p_;
    std::vector<double> u_, g_;
    double horizon_ = 0.0;
    double pd_inf_ = 0.0;
};

} // namespace

double eta_area(const DetectorTrace& trace) {
    if (!(trace.duration > 0.0))
        throw std::invalid_argument("duty cycle undefined for zero duration");
    const DetectorParams& p = trace.params;
    const auto& av = trace.avalanche_times;

    if (p.recovery_kind == RecoveryKind::stepwise_dead_time) {
        if (av.empty()) return 1.0;
        double live = av.front();
        for (std::size_t k = 0; k < av.size(); ++k) {
            const double next = (k + 1 < av.size()) ? av[k + 1] : trace.duration;
            live += std::max(0.0, next - av[k] - p.dead_time);
        }
        return live / trace.duration;
    }

    const RecoveryIntegral ri(p);
    if (av.empty()) return ri.asymptote();
    // Fully live before the first avalanche.
    double acc = av.front() * ri.asymptote();
    for (std::size_t k = 0; k < av.size(); ++k) {
        const double next = (k + 1 < av.size()) ? av[k + 1] : trace.duration;
        acc += ri.integral(next - av[k]);
    }
    return acc / trace.duration;
}

DutyCycleEstimate estimate_duty_cycle(const DetectorTrace& trace) {
    if (!(trace.duration > 0.0))
        throw std::invalid_argument("duty cycle undefined for zero duration");
    DutyCycleEstimate e;
    e.input_count = trace.input_count;
    e.avalanche_count = trace.avalanche_times.size();
    e.sensed_count = trace.sensed_count;
    e.duration = trace.duration;
    e.input_rate = static_cast<double>(trace.input_count) / trace.duration;
    e.observed_rate = static_cast<double>(trace.sensed_count) / trace.duration;
    e.eta_fractional = eta_fractional(trace);
    const double n = static_cast<double>(trace.input_count);
    e.stderr_fractional = std::sqrt(e.eta_fractional * (1.0 - e.eta_fractional) / n);
    e.eta_area = eta_area(trace);
    return e;
}

std::vector<DutyCycleEstimate> rate_sweep(const DetectorParams& params,
                                          const std::vector<double>& input_rates,
                                          double duration, std::uint64_t seed,
                                          double min_events) {
    params.validate();
    if (input_rates.empty())
        throw std::invalid_argument("rate sweep needs at least one input rate");
    if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
    if (!(min_events >= 0.0)) throw std::invalid_argument("min_events must be non-negative");

    std::vector<DutyCycleEstimate> out;
    out.reserve(input_rates.size());
    for (std::size_t i = 0; i < input_rates.size(); ++i) {
        const double rate = input_rates[i];
        if (!(rate > 0.0)) throw std::invalid_argument("input rates must be positive");
        const double window = std::max(duration, min_events / rate);
        SourceModel src;
        src.rate = rate;
        const EventSequence seq = generate(src, window, derive_seed(seed, i, 0));
        const DetectorTrace tr = simulate(seq, params, derive_seed(seed, i, 1));
        out.push_back(estimate_duty_cycle(tr));
    }
    return out;
}

namespace {

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

void write_trace_csv(const EventSequence& seq, const DetectorTrace& trace,
                     std::ostream& out) {
    if (seq.times.size() != trace.dispositions.size())
        throw std::invalid_argument("trace does not match the event sequence");
    out << "# apdsim-trace v1 seed=" << trace.seed
        << " duration=" << fmt17(trace.duration)
        << " events=" << trace.input_count << "\n";
    out << "time_seconds,disposition,pulse_height\n";
    std::size_t k = 0;
    for (std::size_t i = 0; i < seq.times.size(); ++i) {
        out << fmt17(seq.times[i]) << ',' << to_string(trace.dispositions[i]) << ',';
        if (trace.dispositions[i] != Disposition::no_avalanche)
            out << fmt17(trace.pulse_heights[k++]);
        out << "\n";
    }
}

void write_trace_csv(const EventSequence& seq, const DetectorTrace& trace,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_trace_csv(seq, trace, out);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

} // namespace apdsim
