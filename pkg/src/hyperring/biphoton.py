"""Joint spectral amplitude (biphoton wavefunction) of a single ring.

The pump convolution ``G`` depends on the signal and idler detunings only
through their sum ``s = Omega + Omega'``.  It is evaluated once on the sum
coordinate and shared by every cell of the two-dimensional grid.

Two quadrature routes are provided:

* :func:`compute_jsa` samples the wavefunction on a square detuning grid and
  integrates with a tensor Simpson rule.  This is what overlaps, exports and
  the discrete-state checks use.
* :func:`pair_probability` and :func:`sum_coordinate_overlaps` integrate the
  signal/idler Lorentzians analytically and only need a one-dimensional grid
  in ``s``.  They stay cheap for long pulses where the square grid would
  need tens of thousands of points per axis.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import hankel

from .errors import ConfigError, GridResolutionError, NumericAccuracyError, PeakOnBoundaryError
from .lineshape import EnhancementSign, enhancement_scale, field_enhancement
from .model import HBAR, GridSpec, PumpParams, RingParams
from .quadrature import odd_count, simpson_weights, simpson_with_error

CONVOLUTION_RTOL = 1e-8
# Gaussian window of the convolution integrand: exp(-(u T)^2) < 1e-35 beyond it
_WINDOW = 9.0
_SAMPLES_PER_SCALE = 32
_CHUNK = 1 << 21


@dataclass(frozen=True)
class PumpConvolution:
    s_samples: np.ndarray
    G_values: np.ndarray
    mismatch: float
    duration: float
    linewidth: float
    error_estimate: float


def _prefactor_squared(ring: RingParams, pump: PumpParams) -> float:
    """``(hbar |alpha|^2 Lambda R)^2 omega_S omega_I``."""
    alpha2 = pump.peak_power / (HBAR * pump.center)  # |alpha|^2 without the phase round trip
    return (HBAR * alpha2 * ring.nonlinear_param * ring.radius) ** 2 * ring.signal_center * ring.idler_center


def compute_pump_convolution(ring: RingParams, pump: PumpParams, s_grid,
                             rtol: float = CONVOLUTION_RTOL) -> PumpConvolution:
    """Evaluate ``G(s) = int F_P-(w) F_P-(s - dw - w) A(w) A(s - dw - w) dw``.

    The integral is taken in the midpoint variable ``u = w - (s - dw)/2``, for
    which the product of the two pump envelopes is
    ``T^2 exp(-(s - dw)^2 T^2 / 4) exp(-u^2 T^2)`` and the window ``|u| < 9/T``
    holds the full support.  The step resolves both ``1/T`` and the
    linewidth.

    Raises
    ------
    NumericAccuracyError
        When the Richardson estimate of the Simpson error, relative to
        ``max |G|``, exceeds ``rtol``.
    """
    s = np.atleast_1d(np.asarray(s_grid, dtype=float))
    T = pump.duration
    gamma = ring.linewidth
    scale = ring.group_velocity, ring.coupling_eff, ring.radius

    half = _WINDOW / T
    step = min(gamma, 1.0 / T) / _SAMPLES_PER_SCALE
    n_u = odd_count(2 * half, step, multiple=4)
    u = np.linspace(-half, half, n_u)
    h = u[1] - u[0]

    x = s - ring.mismatch
    G = np.empty(x.shape, dtype=complex)
    err = np.empty(x.shape)
    rows = max(1, _CHUNK // n_u)
    gauss_u = np.exp(-(u * T) ** 2)
    for start in range(0, x.size, rows):
        xc = x[start:start + rows, None] / 2.0
        f = (field_enhancement(xc + u, gamma, *scale, EnhancementSign.Minus)
             * field_enhancement(xc - u, gamma, *scale, EnhancementSign.Minus))
        f *= gauss_u
        val, e = simpson_with_error(f, h, axis=-1)
        env = T**2 * np.exp(-((x[start:start + rows] * T) ** 2) / 4.0)
        G[start:start + rows] = val * env
        err[start:start + rows] = e * env

    peak = np.max(np.abs(G)) if G.size else 0.0
    rel = float(np.max(err) / peak) if peak > 0 else 0.0
    if rel > rtol:
        raise NumericAccuracyError(f"pump convolution error {rel:.3g} exceeds {rtol:.3g}", achieved=rel)
    return PumpConvolution(s, G, ring.mismatch, T, gamma, rel)


# ---------------------------------------------------------------------------
# square-grid wavefunction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JointSpectralAmplitude:
    """Normalised ``phi(Omega_i, Omega'_j)`` on a product grid.

    ``values[i, j]`` has signal detuning ``omega[i]`` and idler detuning
    ``omega[j]``.  ``weights`` are the one-dimensional Simpson weights, so
    ``sum(w_i w_j |phi_ij|^2) == 1``.
    """

    omega: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    beta_squared: float
    ring_id: int
    grid: GridSpec | None = None
    sum_profile: np.ndarray | None = None

    @property
    def spacing(self) -> float:
        return float(self.omega[1] - self.omega[0])

    def norm(self) -> float:
        return float(self.weights @ (np.abs(self.values) ** 2) @ self.weights)

    def inner(self, other: "JointSpectralAmplitude") -> complex:
        """``sum w_i w_j phi_ij conj(psi_ij)``."""
        return complex(self.weights @ (self.values * np.conj(other.values)) @ self.weights)

    def centroid(self) -> tuple:
        """``|phi|^2``-weighted mean signal and idler detunings."""
        p = (np.abs(self.values) ** 2) * np.outer(self.weights, self.weights)
        total = p.sum()
        return float(self.omega @ p.sum(axis=1) / total), float(self.omega @ p.sum(axis=0) / total)

    def write_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh)
            out.writerow(["omega_rad_s", "omega_prime_rad_s", "re_phi", "im_phi", "abs_phi"])
            for i, wi in enumerate(self.omega):
                for j, wj in enumerate(self.omega):
                    v = self.values[i, j]
                    out.writerow([f"{wi:.17g}", f"{wj:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}", f"{abs(v):.17g}"])

    def sidecar(self, params_hash: str) -> dict:
        return {
            "ring_id": self.ring_id,
            "beta_squared": self.beta_squared,
            "grid": {"half_width": float(self.omega[-1]), "n_points": int(self.omega.size)},
            "params_hash": params_hash,
        }

    def write_sidecar(self, path, params_hash: str) -> None:
        Path(path).write_text(json.dumps(self.sidecar(params_hash), indent=2, sort_keys=True), encoding="utf-8")


def check_grid(ring: RingParams, pump: PumpParams, grid: GridSpec) -> None:
    gamma = ring.linewidth
    if grid.half_width < 6.0 * gamma:
        raise GridResolutionError(
            f"grid half width {grid.half_width:.4g} rad/s is below 6 linewidths ({6 * gamma:.4g}) for ring {ring.ring_id}"
        )
    finest = min(gamma, 1.0 / pump.duration)
    if grid.spacing > finest / 8.0:
        raise GridResolutionError(
            f"grid spacing {grid.spacing:.4g} rad/s gives fewer than 8 samples across {finest:.4g} rad/s"
        )


def sample_jsa(ring: RingParams, pump: PumpParams, omega) -> JointSpectralAmplitude:
    """Normalised wavefunction on the product grid ``omega x omega``.

    No resolution checks are made, which lets coarse grids be sampled for
    the discrete-state checks; normalisation uses the Simpson rule on the
    given nodes.
    """
    omega = np.asarray(omega, dtype=float)
    n = omega.size
    if n < 3 or n % 2 == 0:
        raise ConfigError(f"need an odd number of detuning nodes, got {n}")
    h = omega[1] - omega[0]
    if not np.allclose(np.diff(omega), h, rtol=1e-9, atol=0):
        raise ConfigError("detuning nodes must be equispaced")
    if ring.coupling_eff == 0.0:
        raise ConfigError(f"ring {ring.ring_id} is uncoupled (eta = 0); its wavefunction is undefined")

    s = 2.0 * omega[0] + h * np.arange(2 * n - 1)
    conv = compute_pump_convolution(ring, pump, s)
    G = conv.G_values
    gamma = ring.linewidth
    scale = ring.group_velocity, ring.coupling_eff, ring.radius
    fs = np.conj(field_enhancement(omega, gamma, *scale, EnhancementSign.Plus))
    # signal and idler share one linewidth per ring
    fi = fs
    M = fs[:, None] * hankel(G[:n], G[n - 1:]) * fi[None, :]

    w = simpson_weights(n, h)
    integral = float(w @ (np.abs(M) ** 2) @ w)
    if not integral > 0:
        raise NumericAccuracyError(f"ring {ring.ring_id}: wavefunction vanishes on the grid", achieved=np.inf)
    root = np.sqrt(integral)
    values = 1j * M / root
    beta2 = _prefactor_squared(ring, pump) * integral
    return JointSpectralAmplitude(omega=omega, weights=w, values=values, beta_squared=beta2,
                                  ring_id=ring.ring_id, sum_profile=1j * G / root)


def compute_jsa(ring: RingParams, pump: PumpParams, grid: GridSpec) -> JointSpectralAmplitude:
    """Normalised joint spectral amplitude of ``ring`` and its pair probability.

    ``beta_squared`` is ``(hbar |alpha|^2 Lambda R)^2 omega_S omega_I`` times the
    unnormalised double integral of ``|F_S|^2 |F_I|^2 |G|^2`` on the grid.

    Raises
    ------
    GridResolutionError
        If the grid is narrower than six linewidths or has fewer than eight
        samples across ``min(linewidth, 1/T)``.
    """
    check_grid(ring, pump, grid)
    jsa = sample_jsa(ring, pump, grid.nodes())
    return JointSpectralAmplitude(jsa.omega, jsa.weights, jsa.values, jsa.beta_squared,
                                  jsa.ring_id, grid, jsa.sum_profile)


def _half_max_width(profile: np.ndarray, peak: int, step: float) -> float:
    half = profile[peak] / 2.0
    edges = []
    for direction in (-1, 1):
        k = peak
        while 0 <= k + direction < profile.size and profile[k + direction] > half:
            k += direction
        nxt = k + direction
        if not 0 <= nxt < profile.size:
            raise PeakOnBoundaryError("profile does not fall to half maximum inside the grid")
        frac = (profile[k] - half) / (profile[k] - profile[nxt])
        edges.append((k + direction * frac) * step)
    return abs(edges[1] - edges[0])


def jsa_widths(jsa: JointSpectralAmplitude) -> tuple:
    """Full widths at half maximum of ``|phi|`` through the peak sample.

    Returns ``(diagonal, antidiagonal)`` measured as distances along the
    ``Omega = Omega'`` and ``Omega = -Omega'`` directions (rad/s).
    """
    mag = np.abs(jsa.values)
    n = mag.shape[0]
    i0, j0 = np.unravel_index(np.argmax(mag), mag.shape)
    if i0 in (0, n - 1) or j0 in (0, n - 1):
        raise PeakOnBoundaryError(f"peak at grid edge ({i0}, {j0})")
    step = np.sqrt(2.0) * jsa.spacing

    lo = -min(i0, j0)
    hi = n - 1 - max(i0, j0)
    k = np.arange(lo, hi + 1)
    diag = mag[i0 + k, j0 + k]
    lo = -min(i0, n - 1 - j0)
    hi = min(n - 1 - i0, j0)
    k2 = np.arange(lo, hi + 1)
    anti = mag[i0 + k2, j0 - k2]
    return _half_max_width(diag, -k[0], step), _half_max_width(anti, -k2[0], step)


# ---------------------------------------------------------------------------
# sum-coordinate route
# ---------------------------------------------------------------------------

def _lorentz_pair_kernel(ka: float, a: float, kb: float, b: float, s):
    """``int dOmega F*_S,a(Omega) F*_I,a(s-Omega) F_S,b(Omega) F_I,b(s-Omega)``.

    Closed form by residues for plus-sign enhancement factors with
    half-widths ``a`` and ``b`` and on-resonance intensities ``ka`` and ``kb``.
    """
    return 4.0 * np.pi * ka * kb * a**2 * b**2 / ((a + b) * (s - 2j * b) * (s + 2j * a))


def _sum_grid(rings, pumps):
    lo, hi, step = np.inf, -np.inf, np.inf
    for ring, pump in zip(rings, pumps):
        T, gamma = pump.duration, ring.linewidth
        reach = min(12.0 / T, 200.0 * gamma)
        lo = min(lo, ring.mismatch - reach)
        hi = max(hi, ring.mismatch + reach)
        step = min(step, min(gamma, 1.0 / T) / 16.0)
    n = odd_count(hi - lo, step, multiple=4)
    return np.linspace(lo, hi, n)


def pair_probability(ring: RingParams, pump: PumpParams) -> float:
    """Pair-generation probability per pulse on the sum coordinate alone.

    The signal and idler Lorentzians are integrated in closed form, which
    leaves a one-dimensional Simpson integral over ``s``.  Independent of any
    detuning grid and agrees with :func:`compute_jsa` to within the grid
    truncation.
    """
    if pump.peak_power == 0 or ring.coupling_eff == 0:
        return 0.0
    s = _sum_grid([ring], [pump])
    G = compute_pump_convolution(ring, pump, s).G_values
    gamma = ring.linewidth
    k = enhancement_scale(ring.group_velocity, ring.coupling_eff, ring.radius, gamma)
    kernel = _lorentz_pair_kernel(k, gamma, k, gamma, s).real
    integral, err = simpson_with_error(np.abs(G) ** 2 * kernel, s[1] - s[0])
    if err > 1e-7 * integral:
        raise NumericAccuracyError("sum-coordinate integral did not converge", achieved=float(err / integral))
    return float(_prefactor_squared(ring, pump) * integral)


def sum_coordinate_overlaps(rings, pumps) -> np.ndarray:
    """Overlap matrix ``O[n, m] = int phi_n conj(phi_m)`` without a 2-D grid.

    Uses the same closed-form Lorentzian kernel as :func:`pair_probability`
    and a shared one-dimensional grid in ``s``.
    """
    rings, pumps = list(rings), list(pumps)
    s = _sum_grid(rings, pumps)
    h = s[1] - s[0]
    w = simpson_weights(s.size, h)
    G = [compute_pump_convolution(r, p, s).G_values for r, p in zip(rings, pumps)]
    gam = [r.linewidth for r in rings]
    ks = [enhancement_scale(r.group_velocity, r.coupling_eff, r.radius, g) for r, g in zip(rings, gam)]
    m = len(rings)
    raw = np.empty((m, m), dtype=complex)
    for a in range(m):
        for b in range(m):
            kern = _lorentz_pair_kernel(ks[a], gam[a], ks[b], gam[b], s)
            raw[a, b] = w @ (G[a] * np.conj(G[b]) * kern)
    d = np.sqrt(raw.diagonal().real)
    return raw / np.outer(d, d)
