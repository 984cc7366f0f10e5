#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "apdsim/recovery_model.hpp"

using namespace apdsim;

namespace {

// Recharge ODE dV/dt = (v_e_set - V) / RC integrated with classic RK4,
// an oracle independent of the closed-form solution.
double recharge_rk4(double t_end, const DetectorParams& p, int steps) {
    double v = 0.0;
    const double h = t_end / steps;
    for (int i = 0; i < steps; ++i) {
        auto f = [&](double y) { return (p.v_e_set - y) / p.rc_time; };
        const double k1 = f(v);
        const double k2 = f(v + 0.5 * h * k1);
        const double k3 = f(v + 0.5 * h * k2);
        const double k4 = f(v + h * k3);
        v += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    }
    return v;
}

// Bisection on the mean pulse height, independent of the log expression.
double crossing_by_bisection(const DetectorParams& p) {
    double lo = 0.0, hi = 60.0 * p.rc_time;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (pulse_height_mean(excess_voltage(mid, p), p) < p.v_cld)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Standard normal density integrated with Simpson's rule from -8 sigma.
double normal_cdf_quadrature(double z) {
    const double lo = -8.0;
    const int n = 4000;
    const double h = (z - lo) / n;
    auto pdf = [](double x) {
        return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
    };
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = lo + i * h;
        acc += h * (pdf(a) + 4.0 * pdf(a + 0.5 * h) + pdf(a + h)) / 6.0;
    }
    return acc;
}

} // namespace

TEST_CASE("recharge curve matches the ODE solution") {
    const DetectorParams p;
    for (const double t : {0.1e-6, 0.5e-6, 1.0e-6, 3.0e-6}) {
        const double ode = recharge_rk4(t, p, 4000);
        CHECK(excess_voltage(t, p) == doctest::Approx(ode).epsilon(1e-10));
    }
    CHECK(excess_voltage(1e-6, p) == doctest::Approx(9.481808382428366).epsilon(1e-12));
    CHECK(excess_voltage(0.0, p) == 0.0);
    CHECK(excess_voltage(-1e-9, p) == 0.0);
    // Saturates at the set bias from below.
    CHECK(excess_voltage(50e-6, p) == doctest::Approx(15.0).epsilon(1e-12));
    CHECK(excess_voltage(50e-6, p) <= 15.0);
}

TEST_CASE("excess voltage increases monotonically toward the set bias") {
    const DetectorParams p;
    double prev = -1.0;
    for (int i = 0; i <= 500; ++i) {
        const double v = excess_voltage(i * 2e-8, p);
        CHECK(v >= prev);
        CHECK(v <= p.v_e_set);
        prev = v;
    }
}

TEST_CASE("avalanche probability follows the exponential turn-on") {
    const DetectorParams p;
    CHECK(avalanche_probability(0.0, p) == 0.0);
    CHECK(avalanche_probability(5.0, p) ==
          doctest::Approx(0.6321205588285577).epsilon(1e-12));
    CHECK(avalanche_probability(15.0, p) ==
          doctest::Approx(0.950212931632136).epsilon(1e-12));
    double prev = -1.0;
    for (int i = 0; i <= 300; ++i) {
        const double pa = avalanche_probability(i * 0.1, p);
        CHECK(pa >= prev);
        CHECK(pa < 1.0);
        prev = pa;
    }
    CHECK_THROWS_AS(avalanche_probability(-0.1, p), std::invalid_argument);
}

TEST_CASE("pulse height mean is quadratic in the excess bias") {
    const DetectorParams p;
    CHECK(pulse_height_mean(15.0, p) == doctest::Approx(2.25).epsilon(1e-15));
    CHECK(pulse_height_mean(2.0, p) == doctest::Approx(0.04).epsilon(1e-15));
    // Doubling the bias quadruples the pulse.
    CHECK(pulse_height_mean(8.0, p) ==
          doctest::Approx(4.0 * pulse_height_mean(4.0, p)).epsilon(1e-15));
}

TEST_CASE("threshold crossing time matches bisection on the pulse height") {
    const DetectorParams p;
    const double t0 = threshold_crossing_time(p);
    CHECK(t0 == doctest::Approx(1.4310084364067338e-7).epsilon(1e-12));
    CHECK(t0 == doctest::Approx(crossing_by_bisection(p)).epsilon(1e-9));
    // The mean pulse height actually crosses the threshold there.
    CHECK(pulse_height_mean(excess_voltage(t0, p), p) ==
          doctest::Approx(p.v_cld).epsilon(1e-10));

    DetectorParams hi = p;
    hi.v_cld = 0.36;
    CHECK(threshold_crossing_time(hi) ==
          doctest::Approx(crossing_by_bisection(hi)).epsilon(1e-9));
}

TEST_CASE("sigma_time equals the pulse spread divided by the local slope") {
    const DetectorParams p;
    const double s = sigma_time(p);
    CHECK(s == doctest::Approx(1.1538461538461538e-8).epsilon(1e-12));

    // Central difference of the mean pulse height at the crossing time.
    const double t0 = threshold_crossing_time(p);
    const double h = 1e-11;
    const double slope = (pulse_height_mean(excess_voltage(t0 + h, p), p) -
                          pulse_height_mean(excess_voltage(t0 - h, p), p)) /
                         (2.0 * h);
    CHECK(s == doctest::Approx(p.sigma_rel * p.v_cld / slope).epsilon(1e-6));

    DetectorParams zero = p;
    zero.v_cld = 0.0;
    CHECK(sigma_time(zero) == 0.0);
    CHECK(threshold_crossing_time(zero) == 0.0);
}

TEST_CASE("sense probability is the Gaussian step at the crossing time") {
    const DetectorParams p;
    const double t0 = threshold_crossing_time(p);
    const double s = sigma_time(p);
    CHECK(sense_probability(t0, p) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sense_probability(t0 + 3.0 * s, p) ==
          doctest::Approx(0.9986501019683699).epsilon(1e-12));
    CHECK(sense_probability(t0 - 3.0 * s, p) ==
          doctest::Approx(1.0 - 0.9986501019683699).epsilon(1e-9));
    CHECK(sense_probability(0.0, p) < 1e-12);
    CHECK(sense_probability(50.0 * p.rc_time, p) == doctest::Approx(1.0).epsilon(1e-12));

    for (const double z : {-2.0, -0.5, 0.0, 0.7, 2.5}) {
        CHECK(gaussian_cdf(z) ==
              doctest::Approx(normal_cdf_quadrature(z)).epsilon(1e-9));
    }

    DetectorParams zero = p;
    zero.v_cld = 0.0;
    CHECK(sense_probability(0.0, zero) == 1.0);
}

TEST_CASE("detection probability composes sensing and triggering") {
    const DetectorParams p;
    const double t0 = threshold_crossing_time(p);
    CHECK(detection_probability(0.0, p) == 0.0);
    CHECK(detection_probability(t0, p) ==
          doctest::Approx(0.16483997698218035).epsilon(1e-12));
    CHECK(detection_probability(50.0 * p.rc_time, p) ==
          doctest::Approx(0.950212931632136).epsilon(1e-12));
    CHECK(detection_probability_limit(p) ==
          doctest::Approx(0.950212931632136).epsilon(1e-15));

    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double t = i * 5e-9;
        const double pd = detection_probability(t, p);
        CHECK(pd ==
              doctest::Approx(sense_probability(t, p) *
                              avalanche_probability(excess_voltage(t, p), p))
                  .epsilon(1e-15));
        CHECK(pd >= prev - 1e-15);
        prev = pd;
    }
}

TEST_CASE("stepwise variant is a hard gate at the dead time") {
    DetectorParams p;
    p.recovery_kind = RecoveryKind::stepwise_dead_time;
    p.dead_time = 5e-7;
    p.validate();
    CHECK(detection_probability(4.9e-7, p) == 0.0);
    CHECK(detection_probability(5e-7, p) == 1.0);
    CHECK(detection_probability(1e-3, p) == 1.0);
    CHECK(detection_probability_limit(p) == 1.0);
}

TEST_CASE("parameter validation rejects out-of-range fields") {
    DetectorParams p;
    CHECK_NOTHROW(p.validate());

    auto expect_reject = [](auto mutate) {
        DetectorParams q;
        mutate(q);
        CHECK_THROWS_AS(q.validate(), std::invalid_argument);
    };
    expect_reject([](DetectorParams& q) { q.v_e_set = 0.0; });
    expect_reject([](DetectorParams& q) { q.v_e_set = -3.0; });
    expect_reject([](DetectorParams& q) { q.rc_time = 0.0; });
    expect_reject([](DetectorParams& q) { q.v_characteristic = -1.0; });
    expect_reject([](DetectorParams& q) { q.pulse_gain = 0.0; });
    expect_reject([](DetectorParams& q) { q.v_cld = -0.01; });
    expect_reject([](DetectorParams& q) { q.sigma_rel = 0.0; });
    expect_reject([](DetectorParams& q) { q.sigma_rel = 1.0; });
    // Threshold at or above the asymptotic pulse height: never senses.
    expect_reject([](DetectorParams& q) { q.v_cld = 2.25; });
    expect_reject([](DetectorParams& q) { q.v_cld = 3.0; });
    expect_reject([](DetectorParams& q) {
        q.recovery_kind = RecoveryKind::stepwise_dead_time;
        q.dead_time = -1e-9;
    });
}

TEST_CASE("recovery kind names round trip") {
    CHECK(to_string(RecoveryKind::exponential_recharge) == "exponential-recharge");
    CHECK(to_string(RecoveryKind::stepwise_dead_time) == "stepwise-dead-time");
    CHECK(recovery_kind_from_string("exponential-recharge") ==
          RecoveryKind::exponential_recharge);
    CHECK(recovery_kind_from_string("stepwise-dead-time") ==
          RecoveryKind::stepwise_dead_time);
    CHECK_THROWS_AS(recovery_kind_from_string("bogus"), std::invalid_argument);
}
