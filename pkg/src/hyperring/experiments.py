"""Device-level calculations: rate equalisation, purity sweeps against
coupling and pulse duration, pair probability and rate curves, and
wavefunction maps.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .biphoton import (JointSpectralAmplitude, compute_jsa, pair_probability,
                       sum_coordinate_overlaps)
from .config import config_hash, config_to_dict
from .errors import ConfigError, InfeasiblePowerError, NumericAccuracyError
from .model import GridSpec, PumpParams, RingParams, SystemConfig
from .state import (DOF, OverlapSet, ReducedDensity, build_reduced_density, closed_form_purity_bin,
                    closed_form_purity_pol, hyper_fidelity, marginal, purity)

MULTIPAIR_THRESHOLD = 0.05
MAX_GRID_POINTS = 4097


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

def required_grid(rings, durations, base: GridSpec | None = None) -> GridSpec:
    """Smallest grid (never smaller than ``base``) that spans
    ``max(10 Gamma_max, 20/T_min)`` and puts eight samples across
    ``min(Gamma_min, 1/T_max)``."""
    gammas = [r.linewidth for r in rings]
    durations = list(durations)
    hw = max(10.0 * max(gammas), 20.0 / min(durations))
    finest = min(min(gammas), 1.0 / max(durations))
    n = 2 * math.ceil(hw / (finest / 8.0) * (1 + 1e-12)) + 1
    if base is not None:
        if base.half_width >= hw and base.spacing <= finest / 8.0:
            return base
        hw = max(hw, base.half_width)
        n = max(2 * math.ceil(hw / (finest / 8.0) * (1 + 1e-12)) + 1, base.n_points)
    return GridSpec(hw, max(n, 513))


def system_grid(system: SystemConfig) -> GridSpec:
    return required_grid(system.rings, [p.duration for p in system.pumps], system.grid)


# ---------------------------------------------------------------------------
# state analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateAnalysis:
    overlaps: OverlapSet
    rho: ReducedDensity
    gamma_pol: float
    gamma_bin: float
    fidelity: float
    method: str
    grid: GridSpec | None = None
    jsas: tuple = ()


def analyze_system(system: SystemConfig, method: str = "grid") -> StateAnalysis:
    """Overlaps, reduced density and purities of a configuration.

    ``method="grid"`` computes every wavefunction on :func:`system_grid`;
    ``method="sum"`` uses :func:`~hyperring.biphoton.sum_coordinate_overlaps`.
    The purities are taken from the reduced density and cross-checked
    against the closed forms.
    """
    jsas, grid = (), None
    if method == "grid":
        grid = system_grid(system)
        jsas = tuple(compute_jsa(r, p, grid) for r, p in zip(system.rings, system.pumps))
        overlaps = OverlapSet.from_jsas(jsas)
    elif method == "sum":
        overlaps = OverlapSet(sum_coordinate_overlaps(system.rings, system.pumps))
    else:
        raise ConfigError(f"unknown method {method!r}")

    rho = build_reduced_density(overlaps, *system.thetas)
    g_pol = purity(marginal(rho, DOF.Polarization).rho2)
    g_bin = purity(marginal(rho, DOF.Bin).rho2)
    O = overlaps
    closed = (closed_form_purity_pol(O[1, 2], O[3, 4], *system.thetas),
              closed_form_purity_bin(O[1, 3], O[2, 4], *system.thetas))
    if abs(closed[0] - g_pol) > 1e-12 or abs(closed[1] - g_bin) > 1e-12:
        raise NumericAccuracyError("closed-form and direct purities disagree",
                                   achieved=max(abs(closed[0] - g_pol), abs(closed[1] - g_bin)))
    return StateAnalysis(overlaps, rho, g_pol, g_bin, hyper_fidelity(rho, system.theta1, system.theta2),
                         method, grid, jsas)


# ---------------------------------------------------------------------------
# sweep results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepResult:
    axis_name: str
    x: tuple
    columns: dict
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.size > 1 and not np.all(np.diff(x) > 0):
            raise ConfigError(f"sweep axis {self.axis_name!r} must be strictly increasing")
        cols = {k: tuple(float(v) for v in vals) for k, vals in self.columns.items()}
        for k, vals in cols.items():
            if len(vals) != x.size:
                raise ValueError(f"column {k!r} has {len(vals)} values for {x.size} points")
            if not all(math.isfinite(v) for v in vals):
                raise NumericAccuracyError(f"column {k!r} contains non-finite values")
        object.__setattr__(self, "x", tuple(float(v) for v in x))
        object.__setattr__(self, "columns", cols)

    @property
    def rows(self) -> list:
        names = list(self.columns)
        return [(x, {k: self.columns[k][i] for k in names}) for i, x in enumerate(self.x)]

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.columns[name])

    def to_csv(self) -> str:
        names = list(self.columns)
        lines = [",".join(["x"] + names)]
        for i, x in enumerate(self.x):
            lines.append(",".join(f"{v:.17g}" for v in [x] + [self.columns[k][i] for k in names]))
        return "\n".join(lines) + "\n"


def write_sweep(result: SweepResult, out_dir, name: str, system: SystemConfig | None = None,
                extra: dict | None = None) -> tuple:
    """Write ``<name>.csv`` and the ``<name>.json`` metadata sidecar."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    csv_path.write_text(result.to_csv(), encoding="utf-8")
    meta = {"axis": result.axis_name, "columns": list(result.columns), "rows": len(result.x),
            "software_version": __version__, **result.meta}
    if system is not None:
        meta["config"] = config_to_dict(system)
        meta["config_hash"] = config_hash(system)
    if extra:
        meta.update(extra)
    json_path = out_dir / f"{name}.json"
    json_path.write_text(json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8")
    return csv_path, json_path


def _map(fn, items, workers: int):
    # results come back in input order whatever the scheduling
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _increasing(values, what: str) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ConfigError(f"{what} must be a non-empty 1-D sequence")
    return v


# ---------------------------------------------------------------------------
# rates and equalisation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateReport:
    per_ring_prob: tuple
    per_ring_rate: tuple
    total_rate: float
    warn_multipair: bool

    @classmethod
    def from_probabilities(cls, probs, durations) -> "RateReport":
        probs = tuple(float(p) for p in probs)
        rates = tuple(p / T for p, T in zip(probs, durations))
        return cls(probs, rates, float(sum(rates)), sum(probs) > MULTIPAIR_THRESHOLD)


def ring_probabilities(system: SystemConfig, method: str = "grid") -> tuple:
    if method == "grid":
        grid = system_grid(system)
        return tuple(compute_jsa(r, p, grid).beta_squared for r, p in zip(system.rings, system.pumps))
    if method == "sum":
        return tuple(pair_probability(r, p) for r, p in zip(system.rings, system.pumps))
    raise ConfigError(f"unknown method {method!r}")


def rate_report(system: SystemConfig, method: str = "grid") -> RateReport:
    """Per-ring pair probabilities and rates ``|beta_n|^2 / T``."""
    return RateReport.from_probabilities(ring_probabilities(system, method), [p.duration for p in system.pumps])


def equalize_powers(system: SystemConfig, target_total_prob: float, max_power: float = 0.1,
                    reference_power: float = 1e-3, rtol: float = 1e-6) -> SystemConfig:
    """Choose peak powers so every ring emits a pair with probability
    ``target_total_prob / 4``.

    Each ring's probability is ``K_n P_n^2``; ``K_n`` is measured with one
    wavefunction calculation at ``reference_power`` and the result is
    verified by recomputing all four probabilities.

    Raises
    ------
    InfeasiblePowerError
        If a ring would need more than ``max_power`` watts.
    """
    if not 0 < target_total_prob <= MULTIPAIR_THRESHOLD:
        raise ConfigError(f"target probability {target_total_prob} is outside (0, {MULTIPAIR_THRESHOLD}]")
    grid = system_grid(system)
    powers = []
    for ring, pump in zip(system.rings, system.pumps):
        k = compute_jsa(ring, pump.with_power(reference_power), grid).beta_squared / reference_power**2
        p = math.sqrt(target_total_prob / 4.0 / k)
        if p > max_power:
            raise InfeasiblePowerError(f"ring {ring.ring_id} needs {p:.4g} W (limit {max_power:.4g} W)")
        powers.append(p)
    out = system.with_pumps(pump.with_power(p) for pump, p in zip(system.pumps, powers))

    check = [compute_jsa(r, p, grid).beta_squared for r, p in zip(out.rings, out.pumps)]
    target = target_total_prob / 4.0
    worst = max(abs(b - target) / target for b in check)
    if worst > rtol:
        raise NumericAccuracyError(f"equalised probabilities differ from target by {worst:.3g}", achieved=worst)
    return out


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def sweep_eta(system: SystemConfig, vary, etas, note: str = "", method: str = "grid",
              workers: int = 1) -> SweepResult:
    """Purities against the common coupling efficiency of the rings in ``vary``."""
    vary = sorted({int(v) for v in vary})
    if not vary or not set(vary) <= {1, 2, 3, 4}:
        raise ConfigError(f"rings to vary must be a subset of 1..4, got {vary}")
    etas = _increasing(etas, "eta values")
    if np.any(etas <= 0) or np.any(etas >= 1):
        raise ConfigError("eta values must lie in (0, 1)")

    def point(eta):
        a = analyze_system(system.with_couplings({n: float(eta) for n in vary}), method)
        return a.gamma_pol, a.gamma_bin

    res = _map(point, etas, workers)
    fixed = {r.ring_id: r.coupling_eff for r in system.rings if r.ring_id not in vary}
    return SweepResult("eta", etas, {"gamma_pol": [r[0] for r in res], "gamma_bin": [r[1] for r in res]},
                       {"varied_rings": vary, "fixed_couplings": fixed, "note": note, "method": method})


def _duration_method(system: SystemConfig, method: str) -> str:
    if method != "auto":
        return method
    try:
        grid = system_grid(system)
    except ConfigError:
        return "sum"
    return "grid" if grid.n_points <= MAX_GRID_POINTS else "sum"


def sweep_duration(system: SystemConfig, durations, method: str = "auto", workers: int = 1) -> SweepResult:
    """Purities against the pulse duration ``T`` (same for all pumps).

    The grid is re-derived for each ``T``.  With ``method="auto"`` the
    sum-coordinate route takes over once the square grid would exceed
    ``MAX_GRID_POINTS`` samples per axis.
    """
    durations = _increasing(durations, "durations")
    if np.any(durations <= 0):
        raise ConfigError("durations must be positive")

    def point(T):
        s = system.with_duration(float(T))
        m = _duration_method(s, method)
        a = analyze_system(s, m)
        return a.gamma_pol, a.gamma_bin, m

    res = _map(point, durations, workers)
    return SweepResult("duration_s", durations,
                       {"gamma_pol": [r[0] for r in res], "gamma_bin": [r[1] for r in res]},
                       {"methods": [r[2] for r in res]})


def _probability(ring: RingParams, pump: PumpParams, method: str, grid: GridSpec | None) -> float:
    if method == "sum":
        return pair_probability(ring, pump)
    if pump.peak_power == 0:
        return 0.0
    g = grid if grid is not None else required_grid([ring], [pump.duration])
    return compute_jsa(ring, pump, g).beta_squared


def sweep_power(ring: RingParams, pump_template: PumpParams, powers, method: str = "sum",
                grid: GridSpec | None = None) -> SweepResult:
    """Pair probability per pulse against peak pump power."""
    powers = _increasing(powers, "powers")
    if np.any(powers < 0):
        raise ConfigError("powers must be non-negative")
    probs = [_probability(ring, pump_template.with_power(float(p)), method, grid) for p in powers]
    return SweepResult("peak_power_w", powers, {"beta_squared": probs},
                       {"ring_id": ring.ring_id, "duration_s": pump_template.duration, "method": method})


def sweep_rate(ring: RingParams, pump_template: PumpParams, durations, method: str = "sum",
               workers: int = 1) -> SweepResult:
    """Pair rate ``|beta|^2 / T`` against pulse duration at fixed peak power."""
    durations = _increasing(durations, "durations")
    if np.any(durations <= 0):
        raise ConfigError("durations must be positive")
    probs = _map(lambda T: _probability(ring, pump_template.with_duration(float(T)), method, None),
                 durations, workers)
    return SweepResult("duration_s", durations,
                       {"beta_squared": probs, "rate_hz": [b / T for b, T in zip(probs, durations)]},
                       {"ring_id": ring.ring_id, "peak_power_w": pump_template.peak_power, "method": method})


def jsa_map(ring: RingParams, pump: PumpParams, mismatch_override: float | None = None,
            grid: GridSpec | None = None) -> JointSpectralAmplitude:
    """Wavefunction of one ring, optionally with a different frequency mismatch.

    The default grid is wide enough to contain the shifted peak.
    """
    if mismatch_override is not None:
        ring = ring.with_mismatch(float(mismatch_override))
    if grid is None:
        grid = required_grid([ring], [pump.duration])
        reach = abs(ring.mismatch) + 10.0 * ring.linewidth
        if reach > grid.half_width:
            grid = required_grid([ring], [pump.duration], GridSpec(reach, grid.n_points))
    return compute_jsa(ring, pump, grid)
