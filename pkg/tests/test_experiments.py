import json
import math
from dataclasses import replace

import numpy as np
import pytest

from hyperring import __version__
from hyperring.config import config_hash
from hyperring.errors import ConfigError, InfeasiblePowerError, NumericAccuracyError
from hyperring.experiments import (RateReport, SweepResult, analyze_system, equalize_powers, jsa_map,
                                   rate_report, ring_probabilities, sweep_duration, sweep_eta, sweep_power,
                                   sweep_rate, write_sweep)
from hyperring.model import ghz


def test_sweep_result_invariants():
    with pytest.raises(ConfigError):
        SweepResult("x", [1.0, 1.0], {"a": [1, 2]})
    with pytest.raises(NumericAccuracyError):
        SweepResult("x", [1.0, 2.0], {"a": [1, np.nan]})
    r = SweepResult("x", [1.0, 2.0], {"a": [3, 4]})
    assert r.rows == [(1.0, {"a": 3.0}), (2.0, {"a": 4.0})]


def test_write_sweep(tmp_path, system):
    r = SweepResult("x", [1.0, 2.0], {"a": [1 / 3, 4.0], "b": [5, 6]})
    csv_path, json_path = write_sweep(r, tmp_path, "s", system)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "x,a,b"
    assert lines[1] == "1,0.33333333333333331,5"
    meta = json.loads(json_path.read_text())
    assert meta["config_hash"] == config_hash(system)
    assert meta["software_version"] == __version__


def test_rate_report_invariants(system):
    rep = rate_report(system)
    T = system.pumps[0].duration
    for p, r in zip(rep.per_ring_prob, rep.per_ring_rate):
        assert r == p / T
    assert rep.total_rate == pytest.approx(sum(rep.per_ring_rate), rel=1e-15)
    assert not rep.warn_multipair
    assert RateReport.from_probabilities([0.02] * 4, [1e-9] * 4).warn_multipair


def test_equalize_identical_rings(system):
    # within each pump pair, give the V ring the H ring's physics
    r = system.rings
    twins = [r[0], replace(r[0], ring_id=2, polarization=r[1].polarization),
             r[2], replace(r[2], ring_id=4, polarization=r[3].polarization)]
    out = equalize_powers(system.with_rings(twins), 1e-3)
    pw = [p.peak_power for p in out.pumps]
    assert pw[0] == pytest.approx(pw[1], rel=1e-12)
    assert pw[2] == pytest.approx(pw[3], rel=1e-12)


def test_equalize_doubled_k(system):
    base = equalize_powers(system, 1e-3)
    # K scales as Lambda^2, so sqrt(2) Lambda doubles K
    boosted = system.with_rings([replace(r, nonlinear_param=r.nonlinear_param * math.sqrt(2)) if r.ring_id == 2
                                 else r for r in system.rings])
    out = equalize_powers(boosted, 1e-3)
    assert out.pumps[1].peak_power == pytest.approx(base.pumps[1].peak_power / math.sqrt(2), rel=1e-9)
    assert out.pumps[0].peak_power == pytest.approx(base.pumps[0].peak_power, rel=1e-12)


def test_equalize_reverification(system):
    out = equalize_powers(system, 4 * 3.12e-4)
    probs = ring_probabilities(out)
    for a in probs:
        for b in probs:
            assert abs(a - b) / b < 1e-6
    for p in out.pumps:
        assert p.peak_power == pytest.approx(1e-3, rel=0.1)


def test_equalize_limits(system):
    with pytest.raises(InfeasiblePowerError):
        equalize_powers(system, 1e-3, max_power=1e-4)
    with pytest.raises(ConfigError):
        equalize_powers(system, 0.2)


def test_sweep_eta_insensitivity(system):
    res = sweep_eta(system, {3, 4}, np.linspace(0.3, 0.7, 5))
    g = res.column("gamma_pol")
    assert g.max() - g.min() < 1e-3
    mid = res.rows[2][1]
    assert mid["gamma_pol"] == pytest.approx(0.99942, abs=5e-4)
    assert mid["gamma_bin"] == pytest.approx(0.99998, abs=5e-5)
    res = sweep_eta(system, {2, 4}, np.linspace(0.3, 0.7, 5))
    assert np.ptp(res.column("gamma_bin")) < 1e-3


def test_sweep_eta_rejects_bad_values(system):
    with pytest.raises(ConfigError):
        sweep_eta(system, {3, 4}, [0.5, 1.0])
    with pytest.raises(ConfigError):
        sweep_eta(system, {5}, [0.5])


def test_sweep_duration_short_range(system):
    res = sweep_duration(system, [1e-9, 2e-9, 4e-9])
    assert res.rows[0][1]["gamma_pol"] == pytest.approx(0.99939, abs=5e-5)
    assert res.rows[0][1]["gamma_bin"] == pytest.approx(0.99998, abs=5e-5)
    for col in ("gamma_pol", "gamma_bin"):
        assert np.all(np.diff(res.column(col)) <= 0)


def test_trade_off_over_long_durations(system):
    T = [1e-9, 3e-9, 1e-8, 3e-8, 1e-7]
    purity = sweep_duration(system, T)
    rate = sweep_rate(system.rings[0], system.pumps[0], T)
    assert np.all(np.diff(rate.column("rate_hz")) >= 0)
    assert np.all(np.diff(purity.column("gamma_pol")) <= 0)
    assert purity.meta["methods"][-1] == "sum"


def test_grid_and_sum_routes_agree(system):
    g = analyze_system(system, "grid")
    s = analyze_system(system, "sum")
    assert g.gamma_pol == pytest.approx(s.gamma_pol, abs=1e-6)
    assert g.gamma_bin == pytest.approx(s.gamma_bin, abs=1e-6)


def test_sweep_power(system):
    res = sweep_power(system.rings[0], system.pumps[0], [0.0, 1e-4, 1e-3, 2e-3])
    b = res.column("beta_squared")
    assert b[0] == 0.0
    slope = np.polyfit(np.log(res.x[1:]), np.log(b[1:]), 1)[0]
    assert slope == pytest.approx(2.0, abs=1e-3)
    assert b[2] == pytest.approx(3e-4, rel=0.15)


def test_sweep_rate_values(system):
    res = sweep_rate(system.rings[0], system.pumps[0], [1e-9, 1e-7])
    r1, r100 = res.column("rate_hz")
    assert r1 == pytest.approx(3.07e5, rel=0.15)
    assert 4 * r1 == pytest.approx(1.23e6, rel=0.15)
    assert r100 == pytest.approx(5.97e5, rel=0.10)


def test_sweeps_reproducible(system):
    a = sweep_eta(system, {3, 4}, [0.4, 0.6])
    b = sweep_eta(system, {3, 4}, [0.4, 0.6], workers=2)
    assert a.to_csv() == b.to_csv()


def test_jsa_map_centroid_shifts(system):
    ring, pump = system.rings[0], system.pumps[0]
    zero = jsa_map(ring, pump, 0.0)
    cx, cy = zero.centroid()
    assert abs(cx + cy) <= zero.spacing
    plus = jsa_map(ring, pump, ghz(1.0))
    minus = jsa_map(ring, pump, ghz(-1.0))
    assert sum(plus.centroid()) > 0
    assert sum(minus.centroid()) < 0


def test_long_pulse_purity_drop(system):
    # coarse check at 100 ns: polarization purity falls by about half, bin purity by a few percent
    short = analyze_system(system, "sum")
    long = analyze_system(system.with_duration(1e-7), "sum")
    assert (short.gamma_pol - long.gamma_pol) / short.gamma_pol == pytest.approx(0.50, abs=0.10)
    assert (short.gamma_bin - long.gamma_bin) / short.gamma_bin == pytest.approx(0.04, abs=0.10)
