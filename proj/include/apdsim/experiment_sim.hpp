#pragma once

#include <cstdint>
#include <vector>

#include "apdsim/detector_sim.hpp"
#include "apdsim/fringe_analysis.hpp"

namespace apdsim {

/// Pairs of AND-gate overlaps between the sensed pulses of two traces:
/// pulse at t1 opens a window of tau1, pulse at t2 a window of tau2, and a
/// pair counts when the windows intersect. Traces must share a duration.
long long count_overlaps(const DetectorTrace& t1, const DetectorTrace& t2,
                         double tau1, double tau2);

/// Overlap pairs between two bare pulse-time lists (each sorted ascending).
long long count_overlaps(const std::vector<double>& a,
                         const std::vector<double>& b, double tau1,
                         double tau2);

/// Coincidence measurement on two detectors fed independent Poisson light,
/// the configuration where every observed coincidence is accidental.
struct AccidentalsMeasurement {
    double measured_rate = 0.0;   ///< overlap pairs per second
    long long overlap_count = 0;
    double s1 = 0.0, s2 = 0.0;    ///< observed singles rates
    double duration = 0.0;
    DutyCycleEstimate est1, est2; ///< per-arm duty-cycle estimates
};

AccidentalsMeasurement measure_accidentals(const DetectorParams& p1,
                                           const DetectorParams& p2,
                                           double rate1, double rate2,
                                           double tau1, double tau2,
                                           double duration, std::uint64_t seed);

/// Polarisation-correlated pair source plus uncorrelated backgrounds.
/// Pairs hit both detectors simultaneously; the analyser transmits a pair
/// at angle theta with probability (1 + visibility * cos 2(theta - phase)) / 2.
struct PairSourceModel {
    double pair_rate = 0.0;     ///< pairs per second at the source, Hz
    double visibility = 1.0;    ///< true fringe visibility, in [0, 1]
    double phase_deg = 0.0;     ///< fringe maximum
    double background1 = 0.0;   ///< uncorrelated rate into detector 1, Hz
    double background2 = 0.0;   ///< uncorrelated rate into detector 2, Hz

    void validate() const;
};

/// Simulates a full fringe scan: one two-detector run per angle, raw
/// coincidences counted with the given gate widths. Deterministic in
/// (model, detectors, angles, seed).
FringeDataset generate_fringe_dataset(const PairSourceModel& model,
                                      const DetectorParams& p1,
                                      const DetectorParams& p2,
                                      const std::vector<double>& angles_deg,
                                      double tau1, double tau2,
                                      double duration_per_angle,
                                      std::uint64_t seed);

} // namespace apdsim
