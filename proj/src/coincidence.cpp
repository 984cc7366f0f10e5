#include "apdsim/coincidence.hpp"

#include <stdexcept>
#include <string>

#include "apdsim/errors.hpp"

namespace apdsim {

void CoincidenceMeasurement::validate() const {
    if (!(s1 >= 0.0) || !(s2 >= 0.0))
        throw std::invalid_argument("singles rates must be non-negative");
    if (!(tau1 >= 0.0) || !(tau2 >= 0.0))
        throw std::invalid_argument("gate widths must be non-negative");
    if (!(tau1 + tau2 > 0.0))
        throw std::invalid_argument("at least one gate width must be positive");
    if (!(c_raw >= 0.0))
        throw std::invalid_argument("raw coincidence rate must be non-negative");
}

double accidentals_naive(double s1, double s2, double tau1, double tau2) {
    if (!(s1 >= 0.0) || !(s2 >= 0.0))
        throw std::invalid_argument("singles rates must be non-negative");
    if (!(tau1 >= 0.0) || !(tau2 >= 0.0))
        throw std::invalid_argument("gate widths must be non-negative");
    return s1 * s2 * (tau1 + tau2);
}

double accidentals_corrected(double s1, double s2, double tau1, double tau2,
                             double eta1, double eta2) {
    if (!(s1 >= 0.0) || !(s2 >= 0.0))
        throw std::invalid_argument("singles rates must be non-negative");
    if (!(tau1 >= 0.0) || !(tau2 >= 0.0))
        throw std::invalid_argument("gate widths must be non-negative");
    if (!(eta1 > 0.0 && eta1 <= 1.0) || !(eta2 > 0.0 && eta2 <= 1.0))
        throw std::invalid_argument("duty cycles must lie in (0, 1]");
    return s1 * s2 * (tau1 / eta1 + tau2 / eta2);
}

CorrectionResult correct_with_eta(const CoincidenceMeasurement& m, double eta1,
                                  double eta2) {
    m.validate();
    CorrectionResult r;
    r.eta1 = eta1;
    r.eta2 = eta2;
    r.c_acc_naive = accidentals_naive(m.s1, m.s2, m.tau1, m.tau2);
    r.c_acc_corrected =
        accidentals_corrected(m.s1, m.s2, m.tau1, m.tau2, eta1, eta2);
    r.c_naive = m.c_raw - r.c_acc_naive;
    r.c_corrected = m.c_raw - r.c_acc_corrected;
    r.negative = r.c_corrected < 0.0;
    return r;
}

namespace {

double lookup_for_arm(const DutyCycleTable& table, double v_e, double rate,
                      int arm) {
    const std::string tag = "detector " + std::to_string(arm) + ": ";
    try {
        return lookup_eta(table, v_e, rate);
    } catch (const SaturationAmbiguityError& e) {
        throw SaturationAmbiguityError(tag + e.what());
    } catch (const RangeError& e) {
        throw RangeError(tag + e.what());
    }
}

} // namespace

CorrectionResult correct(const CoincidenceMeasurement& m,
                         const DutyCycleTable& table1,
                         const DutyCycleTable& table2) {
    m.validate();
    const double eta1 = lookup_for_arm(table1, m.v_e1, m.s1, 1);
    const double eta2 = lookup_for_arm(table2, m.v_e2, m.s2, 2);
    return correct_with_eta(m, eta1, eta2);
}

CorrectionResult correct(const CoincidenceMeasurement& m,
                         const DutyCycleTable& table) {
    return correct(m, table, table);
}

} // namespace apdsim
