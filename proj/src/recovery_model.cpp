#include "apdsim/recovery_model.hpp"

#include <cmath>
#include <stdexcept>

namespace apdsim {

std::string to_string(RecoveryKind kind) {
    switch (kind) {
    case RecoveryKind::exponential_recharge: return "exponential-recharge";
    case RecoveryKind::stepwise_dead_time: return "stepwise-dead-time";
    }
    throw std::invalid_argument("unknown recovery kind");
}

RecoveryKind recovery_kind_from_string(const std::string& name) {
    if (name == "exponential-recharge") return RecoveryKind::exponential_recharge;
    if (name == "stepwise-dead-time") return RecoveryKind::stepwise_dead_time;
    throw std::invalid_argument("unknown recovery kind \"" + name + "\"");
}

void DetectorParams::validate() const {
    if (!(v_e_set > 0.0)) throw std::invalid_argument("v_e_set must be positive");
    if (!(rc_time > 0.0)) throw std::invalid_argument("rc_time must be positive");
    if (!(v_characteristic > 0.0)) throw std::invalid_argument("v_characteristic must be positive");
    if (!(pulse_gain > 0.0)) throw std::invalid_argument("pulse_gain must be positive");
    if (!(v_cld >= 0.0)) throw std::invalid_argument("v_cld must be non-negative");
    if (!(sigma_rel > 0.0 && sigma_rel < 1.0))
        throw std::invalid_argument("sigma_rel must lie in (0, 1)");
    // The threshold must be reachable with margin, otherwise the detector
    // never senses its own pulses and t0 is undefined.
    if (!(std::sqrt(v_cld / pulse_gain) < v_e_set))
        throw std::invalid_argument("sqrt(v_cld / pulse_gain) must be below v_e_set");
    if (recovery_kind == RecoveryKind::stepwise_dead_time && !(dead_time >= 0.0))
        throw std::invalid_argument("dead_time must be non-negative");
}

double excess_voltage(double t, const DetectorParams& p) {
    if (t <= 0.0) return 0.0;
    return p.v_e_set * -std::expm1(-t / p.rc_time);
}

double avalanche_probability(double v_e, const DetectorParams& p) {
    if (v_e < 0.0) throw std::invalid_argument("excess voltage must be non-negative");
    return -std::expm1(-v_e / p.v_characteristic);
}

double pulse_height_mean(double v_e, const DetectorParams& p) {
    if (v_e < 0.0) throw std::invalid_argument("excess voltage must be non-negative");
    return p.pulse_gain * v_e * v_e;
}

double threshold_crossing_time(const DetectorParams& p) {
    const double v_th = std::sqrt(p.v_cld / p.pulse_gain);
    // Invert v_e_set * (1 - exp(-t/RC)) = v_th.
    return -p.rc_time * std::log1p(-v_th / p.v_e_set);
}

double sigma_time(const DetectorParams& p) {
    if (p.v_cld == 0.0) return 0.0;
    const double t0 = threshold_crossing_time(p);
    const double v0 = excess_voltage(t0, p);
    // d/dt [gain * v_e(t)^2] = 2 * gain * v_e * v_e' with
    // v_e'(t) = (v_e_set - v_e) / RC.
    const double slope = 2.0 * p.pulse_gain * v0 * (p.v_e_set - v0) / p.rc_time;
    return p.sigma_rel * p.v_cld / slope;
}

double gaussian_cdf(double z) {
    return 0.5 * std::erfc(-z * 0.70710678118654752440084436210485);
}

double sense_probability(double t, const DetectorParams& p) {
    const double s = sigma_time(p);
    if (s == 0.0) return t >= threshold_crossing_time(p) ? 1.0 : 0.0;
    return gaussian_cdf((t - threshold_crossing_time(p)) / s);
}

double detection_probability(double t, const DetectorParams& p) {
    if (p.recovery_kind == RecoveryKind::stepwise_dead_time)
        return t >= p.dead_time ? 1.0 : 0.0;
    return sense_probability(t, p) * avalanche_probability(excess_voltage(t, p), p);
}

double detection_probability_limit(const DetectorParams& p) {
    if (p.recovery_kind == RecoveryKind::stepwise_dead_time) return 1.0;
    return avalanche_probability(p.v_e_set, p);
}

} // namespace apdsim
