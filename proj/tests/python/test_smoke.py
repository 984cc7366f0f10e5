"""End-to-end smoke checks for the python bindings.

The heavy numerical validation lives in the C++ test binaries; here we only
prove that the bindings expose the same behaviour: values survive the
crossing, exceptions map onto python types, and results are deterministic.
"""

import math

import pytest

import apdsim


def test_closed_form_values():
    p = apdsim.DetectorParams()
    t0 = apdsim.threshold_crossing_time(p)
    assert math.isclose(t0, 1.4310084364067338e-7, rel_tol=1e-12)
    assert math.isclose(apdsim.sigma_time(p), 1.1538461538461538e-8, rel_tol=1e-12)
    assert math.isclose(
        apdsim.detection_probability_limit(p), 0.950212931632136, rel_tol=1e-12
    )
    # Composition: detection = sense * avalanche at the crossing point.
    pd = apdsim.detection_probability(t0, p)
    ps = apdsim.sense_probability(t0, p)
    pa = apdsim.avalanche_probability(apdsim.excess_voltage(t0, p), p)
    assert math.isclose(pd, ps * pa, rel_tol=1e-12)


def test_simulate_and_estimate():
    src = apdsim.SourceModel()
    src.rate = 2e5
    seq = apdsim.generate(src, 0.05, 42)
    assert len(seq) > 8000
    p = apdsim.DetectorParams()
    trace = apdsim.simulate(seq, p, 43)
    est = apdsim.estimate_duty_cycle(trace)
    assert 0.5 < est.eta_fractional < 1.0
    assert 0.5 < est.eta_area < 1.0
    assert abs(est.eta_area - est.eta_fractional) < 0.05
    # Same seeds, same numbers.
    again = apdsim.estimate_duty_cycle(apdsim.simulate(seq, p, 43))
    assert again.eta_fractional == est.eta_fractional
    assert again.eta_area == est.eta_area


def test_table_roundtrip_and_errors(tmp_path):
    opt = apdsim.LutBuildOptions()
    opt.min_events_per_cell = 2e4
    opt.jobs = 2
    opt.created_utc = "2026-01-01T00:00:00Z"
    rates = [1e4 * (1e6 / 1e4) ** (i / 4) for i in range(5)]
    table = apdsim.build_table(
        apdsim.DetectorParams(), [13.0, 15.0, 17.0], rates, 0.005, 404, opt
    )
    assert table.validate() is None

    # Node lookup reproduces the stored grid value exactly.
    got = apdsim.lookup_eta(table, table.v_e_axis[1], table.observed_rate_axis[2])
    assert got == table.at(1, 2)

    path = tmp_path / "table.json"
    apdsim.save_table(table, path)
    back = apdsim.load_table(path)
    assert back.eta == table.eta
    assert back.v_e_axis == table.v_e_axis
    assert back.provenance.seed == table.provenance.seed

    hi = table.observed_rate_axis[-1]
    with pytest.raises(apdsim.SaturationAmbiguityError):
        apdsim.lookup_eta(table, 15.0, hi * 2.0)
    # The saturation error is still a range error, and a ValueError.
    with pytest.raises(apdsim.RangeError):
        apdsim.lookup_eta(table, 15.0, hi * 2.0)
    with pytest.raises(ValueError):
        apdsim.lookup_eta(table, 12.0, table.observed_rate_axis[0])

    with pytest.raises(ValueError):
        apdsim.load_table(tmp_path / "missing.json")


def test_coincidence_correction():
    m = apdsim.CoincidenceMeasurement()
    m.s1 = 1e5
    m.s2 = 2e5
    m.tau1 = 5e-8
    m.tau2 = 7e-8
    m.c_raw = 3000.0
    m.v_e1 = 15.0
    m.v_e2 = 15.0
    r = apdsim.correct_with_eta(m, 1.0, 1.0)
    assert math.isclose(r.c_acc_naive, 2400.0, rel_tol=1e-12)
    assert r.c_acc_corrected == r.c_acc_naive
    assert math.isclose(r.c_corrected, 600.0, rel_tol=1e-12)
    half = apdsim.correct_with_eta(m, 0.5, 0.5)
    assert math.isclose(half.c_acc_corrected, 2.0 * r.c_acc_naive, rel_tol=1e-12)


def test_overlap_counting():
    # Half-open windows: touching endpoints do not overlap.
    assert apdsim.count_overlaps([1.0], [1.1], 0.1, 0.1) == 0
    assert apdsim.count_overlaps([1.0], [1.05], 0.1, 0.1) == 1


def test_visibility_fit():
    angles = [15.0 * i for i in range(12)]
    rates = [
        100.0 * (1.0 + 0.8 * math.cos(2.0 * math.radians(a - 25.0))) for a in angles
    ]
    fit = apdsim.fit_visibility(angles, rates)
    assert math.isclose(fit.visibility, 0.8, rel_tol=1e-9)
    assert abs(fit.phase_deg - 25.0) < 1e-7
    assert not fit.over_range

    with pytest.raises(apdsim.FitError):
        apdsim.fit_visibility([0.0, 45.0, 90.0], rates[:3])
