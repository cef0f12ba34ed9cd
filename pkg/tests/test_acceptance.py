"""Acceptance checks, one test per criterion.

Each check prints a single ``PASS``/``FAIL`` line with the measured values.
Run ``python tests/test_acceptance.py`` for the summary alone, or
``pytest tests/test_acceptance.py -v``; pytest lists the same lines in its
terminal summary.
"""

import time

import numpy as np
import pytest

from hyperring.biphoton import compute_jsa
from hyperring.experiments import (analyze_system, rate_report, required_grid, sweep_duration, sweep_eta,
                                   sweep_power, sweep_rate)
from hyperring.lineshape import EnhancementSign, field_enhancement
from hyperring.model import default_system, ghz
from hyperring.oracle import oracle_difference, random_system
from hyperring.state import (DOF, OverlapSet, build_reduced_density, closed_form_purity_bin,
                             closed_form_purity_pol, hyper_fidelity, marginal, purity)

RESULTS = []
_SEEN_JSAS = []
_SEEN_RHOS = []


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _analyze(system, method="grid"):
    a = analyze_system(system, method)
    _SEEN_JSAS.extend(a.jsas)
    _SEEN_RHOS.append(a.rho)
    return a


def check_1():
    t0 = time.perf_counter()
    a = _analyze(default_system())
    sweep = sweep_eta(default_system(), {3, 4}, [0.5])
    dt = time.perf_counter() - t0
    g_pol_eta = sweep.rows[0][1]["gamma_pol"]
    ok = (0.9990 <= a.gamma_pol <= 0.9999 and 0.9990 <= g_pol_eta <= 0.9999
          and abs(a.gamma_bin - 0.99998) <= 5e-4 and dt < 10)
    report(1, ok, f"gamma_pol={a.gamma_pol:.6f} (eta sweep {g_pol_eta:.6f}) in [0.9990, 0.9999], "
                  f"gamma_bin={a.gamma_bin:.6f} vs 0.99998+-5e-4, {dt:.1f}s < 10s")


def check_2():
    t0 = time.perf_counter()
    system = default_system(duration=10e-9)
    a = _analyze(system)
    dt = time.perf_counter() - t0
    ok = abs(a.gamma_pol - 0.95021) <= 0.01 and abs(a.gamma_bin - 0.99949) <= 2e-3 and dt < 30
    report(2, ok, f"T=10ns gamma_pol={a.gamma_pol:.5f} vs 0.95021+-0.01, "
                  f"gamma_bin={a.gamma_bin:.5f} vs 0.99949+-2e-3, {dt:.1f}s < 30s")


def check_3():
    s = default_system()
    ring, pump = s.rings[0], s.pumps[0]
    grid = required_grid([ring], [pump.duration])
    b1 = compute_jsa(ring, pump, grid).beta_squared
    res = sweep_power(ring, pump, [2.5e-4, 5e-4, 1e-3, 2e-3, 4e-3], method="grid", grid=grid)
    slope = np.polyfit(np.log(res.x), np.log(res.column("beta_squared")), 1)[0]
    ok = abs(b1 / 3e-4 - 1) <= 0.15 and abs(slope - 2.0) <= 1e-3
    report(3, ok, f"|beta1|^2={b1:.4e} vs 3e-4+-15%, log-log slope={slope:.6f} vs 2+-1e-3")


def check_4():
    s = default_system()
    rep = rate_report(s)
    r1 = rep.per_ring_rate[0]
    r100 = sweep_rate(s.rings[0], s.pumps[0], [1e-7]).column("rate_hz")[0]
    ok = (abs(r1 / 3.07e5 - 1) <= 0.15 and abs(4 * r1 / 1.23e6 - 1) <= 0.15
          and abs(rep.total_rate / 1.23e6 - 1) <= 0.15 and abs(r100 / 5.97e5 - 1) <= 0.15)
    report(4, ok, f"R1(1ns)={r1:.4e} vs 3.07e5, 4R1={4 * r1:.4e} (sum over rings {rep.total_rate:.4e}) "
                  f"vs 1.23e6, R1(100ns)={r100:.4e} vs 5.97e5, all +-15%")


def check_5():
    etas = np.linspace(0.3, 0.7, 9)
    a = sweep_eta(default_system(), {3, 4}, etas).column("gamma_pol")
    b = sweep_eta(default_system(), {2, 4}, etas).column("gamma_bin")
    ok = np.ptp(a) < 1e-3 and np.ptp(b) < 1e-3
    report(5, ok, f"ptp gamma_pol over eta3=eta4={np.ptp(a):.2e}, ptp gamma_bin over eta2=eta4={np.ptp(b):.2e}, "
                  f"both < 1e-3")


def check_6():
    t0 = time.perf_counter()
    base = default_system()
    diffs = [oracle_difference(base, 21)]
    rng = np.random.default_rng(2024)
    diffs += [oracle_difference(random_system(rng, base), 21) for _ in range(3)]
    dt = time.perf_counter() - t0
    _SEEN_JSAS.extend(j for d in diffs for j in d[1].spectra)
    _SEEN_RHOS.extend(r for d in diffs for r in (d[2], d[3]))
    worst = max(d[0] for d in diffs)
    report(6, worst < 1e-8 and dt < 60, f"max |rho_analytic - rho_oracle| = {worst:.2e} < 1e-8 over defaults + 3 "
                                        f"random configs, {dt:.1f}s < 60s")


def check_7():
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(1000):
        v = rng.normal(size=(4, 5)) + 1j * rng.normal(size=(4, 5))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        o = OverlapSet(v @ v.conj().T)
        t = rng.uniform(0, 2 * np.pi, 3)
        rho = build_reduced_density(o, *t)
        worst = max(worst,
                    abs(purity(marginal(rho, DOF.Polarization).rho2) - closed_form_purity_pol(o[1, 2], o[3, 4], *t)),
                    abs(purity(marginal(rho, DOF.Bin).rho2) - closed_form_purity_bin(o[1, 3], o[2, 4], *t)))
    report(7, worst < 1e-12, f"max |closed form - Tr(rho^2)| = {worst:.2e} < 1e-12 over 1000 draws")


def check_8():
    rng = np.random.default_rng(5)
    worst = 0.0
    for m in (-2, -1, 0, 1, 3):
        t1, t2 = rng.uniform(0, 2 * np.pi, 2)
        rho = build_reduced_density(OverlapSet.uniform(1.0), t1, t2, t1 + t2 + np.pi * m)
        for v in (purity(marginal(rho, DOF.Polarization).rho2), purity(marginal(rho, DOF.Bin).rho2),
                  hyper_fidelity(rho, t1, t2)):
            worst = max(worst, abs(v - 1.0))
    rho0 = build_reduced_density(OverlapSet.uniform(0.0), *rng.uniform(0, 2 * np.pi, 3))
    worst = max(worst, abs(purity(marginal(rho0, DOF.Polarization).rho2) - 0.5),
                abs(purity(marginal(rho0, DOF.Bin).rho2) - 0.5), abs(purity(rho0.rho) - 0.25))
    report(8, worst < 1e-12, f"max deviation from exact limits = {worst:.2e} < 1e-12")


def check_9():
    s = default_system()
    ring, pump = s.rings[0], s.pumps[0]
    jsa = compute_jsa(ring, pump, required_grid([ring], [pump.duration]))
    _SEEN_JSAS.append(jsa)
    f = np.conj(field_enhancement(jsa.omega, ring.linewidth, ring.group_velocity, ring.coupling_eff,
                                  ring.radius, EnhancementSign.Plus))
    g = jsa.values / np.outer(f, f)
    n = jsa.omega.size
    rng = np.random.default_rng(3)
    i, j = rng.integers(0, n, size=(2, 10_000))
    tot = i + j
    lo, hi = np.maximum(0, tot - (n - 1)), np.minimum(n - 1, tot)
    k = lo + (rng.random(10_000) * (hi - lo + 1)).astype(int)
    worst = float(np.max(np.abs(g[i, j] - g[k, tot - k]) / np.abs(g[i, j])))
    report(9, worst < 1e-10, f"max relative spread of G at equal Omega+Omega' = {worst:.2e} < 1e-10 "
                             f"(10^4 pairs)")


def check_10():
    s = default_system()
    for m in (ghz(1.0), ghz(-1.0)):
        ring = s.rings[0].with_mismatch(m)
        grid = required_grid([ring], [1e-9])
        _SEEN_JSAS.append(compute_jsa(ring, s.pumps[0], grid))
    _analyze(s.with_couplings({1: 0.3, 2: 0.7, 3: 0.4, 4: 0.6}))
    norm_dev = max(abs(j.norm() - 1.0) for j in _SEEN_JSAS)
    herm = max(float(np.max(np.abs(r.rho - r.rho.conj().T))) for r in _SEEN_RHOS)
    trace = max(abs(np.trace(r.rho).real - 1.0) for r in _SEEN_RHOS)
    neg = max(-np.linalg.eigvalsh(r.rho).min() for r in _SEEN_RHOS)
    ok = norm_dev <= 1e-9 and herm <= 1e-10 and trace <= 1e-10 and neg <= 1e-10
    report(10, ok, f"{len(_SEEN_JSAS)} JSAs: max |norm-1|={norm_dev:.1e}; {len(_SEEN_RHOS)} densities: "
                   f"herm {herm:.1e}, |tr-1| {trace:.1e}, min eig {-neg:.1e}")


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9, check_10]


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{k}" for k in range(1, 11)])
def test_criterion(check):
    check()


def main() -> int:
    failed = 0
    for check in CHECKS:
        try:
            check()
        except AssertionError:
            failed += 1
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
