#pragma once

#include <cstdint>
#include <string>

namespace apdsim {

enum class RecoveryKind {
    /// Excess bias recharges exponentially through the quench resistor.
    exponential_recharge,
    /// Idealised detector: blind for a fixed dead time, then fully live.
    stepwise_dead_time,
};

std::string to_string(RecoveryKind kind);
RecoveryKind recovery_kind_from_string(const std::string& name);

/// Static description of one passively quenched detector.
///
/// Time is measured in seconds from the most recent avalanche, voltages in
/// volts. pulse_gain has units 1/V so that pulse_gain * v_e^2 is a voltage.
struct DetectorParams {
    double v_e_set = 15.0;          ///< nominal excess bias, reached at full recharge
    double rc_time = 1e-6;          ///< recharge time constant of the quench circuit
    double v_characteristic = 5.0;  ///< excess bias scale of the avalanche turn-on
    double pulse_gain = 0.01;       ///< quadratic gain of pulse height vs excess bias
    double v_cld = 0.04;            ///< discriminator threshold on pulse height
    double sigma_rel = 0.15;        ///< relative pulse height spread
    RecoveryKind recovery_kind = RecoveryKind::exponential_recharge;
    double dead_time = 0.0;         ///< fixed dead time, stepwise variant only

    /// Throws std::invalid_argument if any field is out of its allowed range.
    void validate() const;
};

/// Excess bias a time t after an avalanche, v_e_set * (1 - exp(-t/RC)).
/// Negative t is treated as t = 0 (inside the avalanche).
double excess_voltage(double t, const DetectorParams& p);

/// Probability that an incident photon triggers an avalanche at excess
/// bias v_e: 1 - exp(-v_e / v_characteristic).
double avalanche_probability(double v_e, const DetectorParams& p);

/// Mean discriminator-input pulse height at excess bias v_e.
double pulse_height_mean(double v_e, const DetectorParams& p);

/// Recovery time at which the mean pulse height crosses the discriminator
/// threshold: excess_voltage(t0) = sqrt(v_cld / pulse_gain).
double threshold_crossing_time(const DetectorParams& p);

/// Width of the sensing transition expressed in time. The pulse height
/// spread sigma_rel * v_cld around threshold is divided by the slope of the
/// mean pulse height curve at the crossing time.
double sigma_time(const DetectorParams& p);

/// Probability that an avalanche at recovery time t clears the
/// discriminator, a Gaussian step centred on threshold_crossing_time with
/// width sigma_time.
double sense_probability(double t, const DetectorParams& p);

/// Probability that a photon arriving at recovery time t is counted.
/// Exponential recharge: sense_probability(t) * avalanche_probability at
/// the instantaneous bias. Stepwise variant: 0 before dead_time, 1 after.
double detection_probability(double t, const DetectorParams& p);

/// Large-t limit of detection_probability (fully recharged detector).
double detection_probability_limit(const DetectorParams& p);

/// Standard normal CDF, the smoothed step used for sensing.
double gaussian_cdf(double z);

} // namespace apdsim
