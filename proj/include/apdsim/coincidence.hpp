#pragma once

#include "apdsim/lut.hpp"

namespace apdsim {

/// Singles and raw coincidence rates from one two-detector measurement.
/// tau1/tau2 are the coincidence gate contributions of the two channels;
/// v_e1/v_e2 identify the operating points for table lookups.
struct CoincidenceMeasurement {
    double s1 = 0.0;     ///< observed singles rate, detector 1, Hz
    double s2 = 0.0;     ///< observed singles rate, detector 2, Hz
    double tau1 = 0.0;   ///< effective gate width of channel 1, seconds
    double tau2 = 0.0;   ///< effective gate width of channel 2, seconds
    double c_raw = 0.0;  ///< raw coincidence rate, Hz
    double v_e1 = 0.0;   ///< nominal excess bias of detector 1
    double v_e2 = 0.0;   ///< nominal excess bias of detector 2

    void validate() const;
};

/// Accidental coincidence rate assuming ideal counters:
/// s1 * s2 * (tau1 + tau2).
double accidentals_naive(double s1, double s2, double tau1, double tau2);

/// Accidental rate with each gate width stretched by that detector's duty
/// cycle: s1 * s2 * (tau1 / eta1 + tau2 / eta2). Saturated detectors under-
/// report singles, and dividing by eta restores the photon flux actually
/// probing the gates. Requires eta in (0, 1].
double accidentals_corrected(double s1, double s2, double tau1, double tau2,
                             double eta1, double eta2);

struct CorrectionResult {
    double eta1 = 1.0;
    double eta2 = 1.0;
    double c_acc_naive = 0.0;      ///< accidental estimate, ideal counters
    double c_acc_corrected = 0.0;  ///< accidental estimate, duty-cycle aware
    double c_naive = 0.0;          ///< c_raw - c_acc_naive
    double c_corrected = 0.0;      ///< c_raw - c_acc_corrected
    bool negative = false;         ///< corrected rate went below zero
};

/// Full correction with duty cycles supplied directly.
CorrectionResult correct_with_eta(const CoincidenceMeasurement& m, double eta1,
                                  double eta2);

/// Full correction with duty cycles looked up at (v_e_i, s_i). Table errors
/// carry the detector number. Each arm may use its own table; the
/// single-table overload serves matched detector pairs.
CorrectionResult correct(const CoincidenceMeasurement& m,
                         const DutyCycleTable& table1,
                         const DutyCycleTable& table2);
CorrectionResult correct(const CoincidenceMeasurement& m,
                         const DutyCycleTable& table);

} // namespace apdsim
