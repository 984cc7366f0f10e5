#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "apdsim/coincidence.hpp"
#include "apdsim/errors.hpp"

using namespace apdsim;

namespace {

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    return v;
}

DutyCycleTable test_table() {
    LutBuildOptions opt;
    opt.min_events_per_cell = 2e4;
    opt.jobs = 4;
    opt.created_utc = "2026-01-01T00:00:00Z";
    return build_table(DetectorParams{}, {13.0, 15.0, 17.0},
                       log_spaced(1e4, 1e7, 8), 0.005, 505, opt);
}

} // namespace

TEST_CASE("naive accidental rate is the product of singles and gates") {
    CHECK(accidentals_naive(1e5, 2e5, 5e-8, 7e-8) ==
          doctest::Approx(2400.0).epsilon(1e-15));
    CHECK(accidentals_naive(0.0, 2e5, 5e-8, 7e-8) == 0.0);
    // Swapping the arms swaps nothing observable.
    CHECK(accidentals_naive(1e5, 2e5, 5e-8, 7e-8) ==
          accidentals_naive(2e5, 1e5, 7e-8, 5e-8));
    CHECK_THROWS_AS(accidentals_naive(-1.0, 1.0, 1e-8, 1e-8),
                    std::invalid_argument);
    CHECK_THROWS_AS(accidentals_naive(1.0, 1.0, -1e-8, 1e-8),
                    std::invalid_argument);
}

TEST_CASE("duty-cycle correction stretches each gate separately") {
    // Unit duty cycles reduce to the naive expression exactly.
    CHECK(accidentals_corrected(1e5, 2e5, 5e-8, 7e-8, 1.0, 1.0) ==
          accidentals_naive(1e5, 2e5, 5e-8, 7e-8));
    // Halving both duty cycles doubles the accidentals.
    CHECK(accidentals_corrected(1e5, 2e5, 5e-8, 7e-8, 0.5, 0.5) ==
          doctest::Approx(2.0 * 2400.0).epsilon(1e-15));
    // Each gate is scaled by its own arm's duty cycle.
    CHECK(accidentals_corrected(1e5, 2e5, 5e-8, 7e-8, 0.5, 1.0) ==
          doctest::Approx(1e5 * 2e5 * (1e-7 + 7e-8)).epsilon(1e-15));
    // Any real duty cycle below one raises the estimate.
    CHECK(accidentals_corrected(1e5, 2e5, 5e-8, 7e-8, 0.9, 0.95) >
          accidentals_naive(1e5, 2e5, 5e-8, 7e-8));

    CHECK_THROWS_AS(accidentals_corrected(1e5, 2e5, 5e-8, 7e-8, 0.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(accidentals_corrected(1e5, 2e5, 5e-8, 7e-8, 1.0, 1.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(accidentals_corrected(1e5, 2e5, 5e-8, 7e-8, -0.5, 1.0),
                    std::invalid_argument);
}

TEST_CASE("correction result carries both subtractions") {
    CoincidenceMeasurement m;
    m.s1 = 1e5;
    m.s2 = 2e5;
    m.tau1 = 5e-8;
    m.tau2 = 7e-8;
    m.c_raw = 3000.0;

    const CorrectionResult r = correct_with_eta(m, 0.8, 0.9);
    CHECK(r.eta1 == 0.8);
    CHECK(r.eta2 == 0.9);
    CHECK(r.c_acc_naive == doctest::Approx(2400.0).epsilon(1e-15));
    CHECK(r.c_acc_corrected ==
          doctest::Approx(1e5 * 2e5 * (5e-8 / 0.8 + 7e-8 / 0.9)).epsilon(1e-15));
    CHECK(r.c_naive == doctest::Approx(m.c_raw - r.c_acc_naive).epsilon(1e-15));
    CHECK(r.c_corrected ==
          doctest::Approx(m.c_raw - r.c_acc_corrected).epsilon(1e-15));
    CHECK(r.c_corrected < r.c_naive);
    CHECK_FALSE(r.negative);

    // Oversubtraction is reported, not clamped away.
    CoincidenceMeasurement weak = m;
    weak.c_raw = 100.0;
    const CorrectionResult neg = correct_with_eta(weak, 0.8, 0.9);
    CHECK(neg.negative);
    CHECK(neg.c_corrected < 0.0);
}

TEST_CASE("measurement validation rejects nonsense") {
    CoincidenceMeasurement m;
    m.s1 = 1e5;
    m.s2 = 1e5;
    m.tau1 = 5e-8;
    m.tau2 = 5e-8;
    m.c_raw = 10.0;
    CHECK_NOTHROW(m.validate());

    CoincidenceMeasurement bad = m;
    bad.s1 = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = m;
    bad.tau1 = bad.tau2 = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = m;
    bad.c_raw = -5.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = m;
    bad.tau2 = -1e-9;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    CHECK_THROWS_AS(correct_with_eta(bad, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("table-driven correction matches explicit duty cycles") {
    const DutyCycleTable table = test_table();

    CoincidenceMeasurement m;
    m.s1 = table.observed_rate_axis[2];
    m.s2 = table.observed_rate_axis[5];
    m.tau1 = 5e-8;
    m.tau2 = 5e-8;
    m.c_raw = 50.0;
    m.v_e1 = 15.0;
    m.v_e2 = 16.0;

    const double eta1 = lookup_eta(table, m.v_e1, m.s1);
    const double eta2 = lookup_eta(table, m.v_e2, m.s2);
    const CorrectionResult direct = correct_with_eta(m, eta1, eta2);
    const CorrectionResult via_table = correct(m, table);
    CHECK(via_table.eta1 == direct.eta1);
    CHECK(via_table.eta2 == direct.eta2);
    CHECK(via_table.c_corrected == direct.c_corrected);

    // Saturated arms push the accidental estimate up, so the corrected
    // coincidence rate drops below the naive one.
    CHECK(via_table.c_corrected < via_table.c_naive);

    const CorrectionResult two_tables = correct(m, table, table);
    CHECK(two_tables.c_corrected == via_table.c_corrected);
}

TEST_CASE("table errors identify the failing arm") {
    const DutyCycleTable table = test_table();

    CoincidenceMeasurement m;
    m.tau1 = 5e-8;
    m.tau2 = 5e-8;
    m.c_raw = 10.0;
    m.v_e1 = 15.0;
    m.v_e2 = 15.0;
    m.s1 = table.observed_rate_axis[3];
    m.s2 = table.observed_rate_axis[3];

    CoincidenceMeasurement low = m;
    low.s1 = table.observed_rate_axis.front() * 0.5;
    try {
        correct(low, table);
        FAIL("expected RangeError");
    } catch (const RangeError& e) {
        CHECK(std::string(e.what()).rfind("detector 1: ", 0) == 0);
    }

    CoincidenceMeasurement saturated = m;
    saturated.s2 = table.observed_rate_axis.back() * 2.0;
    try {
        correct(saturated, table);
        FAIL("expected SaturationAmbiguityError");
    } catch (const SaturationAmbiguityError& e) {
        CHECK(std::string(e.what()).rfind("detector 2: ", 0) == 0);
    }

    CoincidenceMeasurement off_bias = m;
    off_bias.v_e2 = 28.0;
    CHECK_THROWS_AS(correct(off_bias, table), RangeError);
}
