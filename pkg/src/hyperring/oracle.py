"""Brute-force checks on an explicitly discretised two-photon state.

Each photon lives in ``pol (2) x bin (4) x detuning (n)`` with flat index
``(pol * 4 + bin) * n + i``, an exact Kronecker product of the three single
degree-of-freedom spaces.  Detuning modes are normalised with the Simpson
weights of the coarse grid, so the partial trace over detunings reproduces
the Simpson inner products used by :mod:`hyperring.state` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import sparse
from scipy.interpolate import RegularGridInterpolator

from .biphoton import JointSpectralAmplitude, sample_jsa
from .errors import ConfigError, DimensionOverflowError, SupportLeakError
from .model import FrequencyBin, GridSpec, Polarization, SystemConfig, ghz
from .quadrature import simpson_weights
from .state import BASIS, DOF, OverlapSet, ReducedDensity, build_reduced_density, marginal, purity

MAX_COARSE = 41
DEFAULT_COARSE = 21

POLS = (Polarization.H, Polarization.V)
BINS = (FrequencyBin.Sa, FrequencyBin.Ia, FrequencyBin.Sb, FrequencyBin.Ib)

# (pol, signal bin, idler bin) populated by rings 1..4
RING_MODES = (
    (Polarization.H, FrequencyBin.Sa, FrequencyBin.Ia),
    (Polarization.V, FrequencyBin.Sa, FrequencyBin.Ia),
    (Polarization.H, FrequencyBin.Sb, FrequencyBin.Ib),
    (Polarization.V, FrequencyBin.Sb, FrequencyBin.Ib),
)


@dataclass(frozen=True)
class ModeIndex:
    pol: Polarization
    bin: FrequencyBin
    omega_idx: int

    def flat(self, n: int) -> int:
        if not 0 <= self.omega_idx < n:
            raise IndexError(f"detuning index {self.omega_idx} outside 0..{n - 1}")
        return (POLS.index(self.pol) * 4 + BINS.index(self.bin)) * n + self.omega_idx


def single_photon_dim(n: int) -> int:
    return 2 * 4 * n


@dataclass(frozen=True)
class DiscreteTwoPhotonState:
    """Amplitude tensor indexed ``[pol_s, bin_s, i, pol_i, bin_i, j]``."""

    amplitudes: np.ndarray
    omega: np.ndarray
    spectra: tuple = ()

    @property
    def n(self) -> int:
        return self.omega.size

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def matrix(self) -> np.ndarray:
        """Amplitudes as a (signal index, idler index) matrix."""
        d = single_photon_dim(self.n)
        return self.amplitudes.reshape(d, d)


class StokesKind(Enum):
    Sigma0 = 0
    Sigma1 = 1
    Sigma2 = 2
    Sigma3 = 3


_POL_MATRICES = {
    StokesKind.Sigma0: np.eye(2),
    StokesKind.Sigma1: np.diag([1.0, -1.0]),
    StokesKind.Sigma2: np.array([[0.0, 1.0], [1.0, 0.0]]),
    StokesKind.Sigma3: np.array([[0.0, -1j], [1j, 0.0]]),
}


@dataclass(frozen=True)
class StokesOperator:
    kind: StokesKind
    bin: FrequencyBin
    matrix: sparse.coo_matrix


def _bin_projector(b: FrequencyBin) -> np.ndarray:
    p = np.zeros((4, 4))
    k = BINS.index(b)
    p[k, k] = 1.0
    return p


def _kron3(pol, bins, det) -> sparse.coo_matrix:
    return sparse.kron(sparse.kron(sparse.coo_matrix(pol), sparse.coo_matrix(bins)), det, format="coo")


def stokes_operator(kind: StokesKind, b: FrequencyBin, coarse_n: int) -> StokesOperator:
    """Single-photon Stokes operator of bin ``b`` on the discrete mode space.

    The detuning integral becomes a sum over orthonormal discrete modes, so
    ``Sigma0`` has eigenvalues 0 and 1.
    """
    kind = StokesKind(kind)
    m = _kron3(_POL_MATRICES[kind], _bin_projector(FrequencyBin(b)), sparse.identity(coarse_n, format="coo"))
    return StokesOperator(kind, FrequencyBin(b), m)


def polarization_operator(coarse_n: int) -> sparse.coo_matrix:
    """``P = sum_B Sigma1(B)``: +1 on H, -1 on V."""
    total = sum(stokes_operator(StokesKind.Sigma1, b, coarse_n).matrix.tocsr() for b in BINS)
    return total.tocoo()


def detuning_operator(omega) -> sparse.coo_matrix:
    """Detuning operator, diagonal with eigenvalue ``omega[i]`` on mode ``i``."""
    omega = np.asarray(omega, dtype=float)
    return _kron3(np.eye(2), np.eye(4), sparse.diags(omega, format="coo"))


def _commutator_norm(a, b) -> float:
    a, b = a.tocsr(), b.tocsr()
    c = (a @ b - b @ a).tocoo()
    return float(np.max(np.abs(c.data))) if c.nnz else 0.0


def check_commutators(coarse_n: int = DEFAULT_COARSE, omega=None) -> dict:
    """Largest entries of the commutators among bin number, polarization and
    detuning operators (all exactly zero), plus one non-commuting Stokes pair
    as a control."""
    if omega is None:
        omega = np.linspace(-1.0, 1.0, coarse_n)
    P = polarization_operator(coarse_n)
    W = detuning_operator(omega)
    s0 = [stokes_operator(StokesKind.Sigma0, b, coarse_n).matrix for b in BINS]
    report = {
        "sigma0_pol": max(_commutator_norm(s, P) for s in s0),
        "sigma0_detuning": max(_commutator_norm(s, W) for s in s0),
        "pol_detuning": _commutator_norm(P, W),
        "control_sigma1_sigma2": _commutator_norm(
            stokes_operator(StokesKind.Sigma1, FrequencyBin.Sa, coarse_n).matrix,
            stokes_operator(StokesKind.Sigma2, FrequencyBin.Sa, coarse_n).matrix,
        ),
    }
    return report


def expectation(state: DiscreteTwoPhotonState, op, photon: str = "signal") -> complex:
    """Expectation value of a single-photon operator acting on one photon
    (``"signal"`` or ``"idler"``) or on both (``"both"``)."""
    A = state.matrix()
    op = op.tocsr()
    if photon == "signal":
        return complex(np.vdot(A, op @ A))
    if photon == "idler":
        return complex(np.vdot(A.T, op @ A.T))
    if photon == "both":
        return expectation(state, op, "signal") + expectation(state, op, "idler")
    raise ValueError(f"unknown photon {photon!r}")


# ---------------------------------------------------------------------------
# state construction and partial trace
# ---------------------------------------------------------------------------

def resample_jsa(jsa: JointSpectralAmplitude, nodes) -> JointSpectralAmplitude:
    """Cubic interpolation of ``phi`` onto ``nodes x nodes``, renormalised with
    the Simpson weights of the new grid."""
    nodes = np.asarray(nodes, dtype=float)
    # the spline fit loses tiny-magnitude data, so interpolate an O(1) copy
    scaled = jsa.values / np.max(np.abs(jsa.values))
    re = RegularGridInterpolator((jsa.omega, jsa.omega), scaled.real, method="cubic")
    im = RegularGridInterpolator((jsa.omega, jsa.omega), scaled.imag, method="cubic")
    X, Y = np.meshgrid(nodes, nodes, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
    values = (re(pts) + 1j * im(pts)).reshape(X.shape)
    w = simpson_weights(nodes.size, nodes[1] - nodes[0])
    values /= np.sqrt(w @ (np.abs(values) ** 2) @ w)
    return JointSpectralAmplitude(nodes, w, values, jsa.beta_squared, jsa.ring_id)


def coarse_nodes(half_width: float, coarse_n: int = DEFAULT_COARSE) -> np.ndarray:
    return np.linspace(-half_width, half_width, coarse_n)


def coarse_jsas(system: SystemConfig, coarse_n: int = DEFAULT_COARSE, half_width: float | None = None) -> tuple:
    """Wavefunctions of all four rings sampled directly on a coarse grid."""
    hw = system.grid.half_width if half_width is None else half_width
    nodes = coarse_nodes(hw, coarse_n)
    return tuple(sample_jsa(r, p, nodes) for r, p in zip(system.rings, system.pumps))


def build_discrete_state(system: SystemConfig, jsas, coarse_n: int = DEFAULT_COARSE,
                         ring_weights=(1.0, 1.0, 1.0, 1.0)) -> DiscreteTwoPhotonState:
    """Superpose the four ring states on the discrete mode space.

    Ring ``n`` contributes ``weight_n * exp(2i theta) * phi_n`` to its
    (pol, signal bin; pol, idler bin) block.  Wavefunctions on a different
    grid are resampled onto ``coarse_n`` nodes over the same half width.
    The result is renormalised.
    """
    if coarse_n > MAX_COARSE:
        raise DimensionOverflowError(f"coarse_n={coarse_n} exceeds {MAX_COARSE}")
    if coarse_n < 3 or coarse_n % 2 == 0:
        raise ConfigError(f"coarse_n must be odd and >= 3, got {coarse_n}")
    jsas = list(jsas)
    if len(jsas) != 4:
        raise ConfigError("need one wavefunction per ring")
    nodes = coarse_nodes(float(jsas[0].omega[-1]), coarse_n)
    spectra = tuple(j if (j.omega.size == coarse_n and np.allclose(j.omega, nodes, rtol=1e-12, atol=0))
                    else resample_jsa(j, nodes) for j in jsas)

    phases = (1.0,) + tuple(np.exp(2j * t) for t in system.thetas)
    amp = np.zeros((2, 4, coarse_n, 2, 4, coarse_n), dtype=complex)
    for (pol, sb, ib), phase, weight, spec in zip(RING_MODES, phases, ring_weights, spectra):
        p = POLS.index(pol)
        root = np.sqrt(spec.weights)
        amp[p, BINS.index(sb), :, p, BINS.index(ib), :] += weight * phase * spec.values * np.outer(root, root)
    total = np.sqrt(np.sum(np.abs(amp) ** 2))
    if total == 0:
        raise ConfigError("all ring weights are zero")
    return DiscreteTwoPhotonState(amp / total, nodes, spectra)


_SUPPORT = tuple(
    (POLS.index(pol), BINS.index(sb), POLS.index(pol), BINS.index(ib))
    for pol, sb, ib in (RING_MODES[0], RING_MODES[2], RING_MODES[1], RING_MODES[3])
)  # ordered like state.BASIS


def trace_out_detuning(state: DiscreteTwoPhotonState, leak_tol: float = 1e-12) -> ReducedDensity:
    """Sum ``|psi><psi|`` over paired detuning indices and project onto the
    four populated (pol x bin) states.

    Raises
    ------
    SupportLeakError
        If more than ``leak_tol`` of the population lies outside the
        four-dimensional support.
    """
    n = state.n
    amp = state.amplitudes.transpose(0, 1, 3, 4, 2, 5).reshape(64, n * n)
    full = amp @ amp.conj().T
    idx = [np.ravel_multi_index(s, (2, 4, 2, 4)) for s in _SUPPORT]
    rho = full[np.ix_(idx, idx)]
    leak = float(np.trace(full).real - np.trace(rho).real)
    if leak > leak_tol:
        raise SupportLeakError(f"population {leak:.3g} outside the four basis states", achieved=leak)
    return ReducedDensity(rho)


def support_leak(state: DiscreteTwoPhotonState) -> float:
    n = state.n
    amp = state.amplitudes.transpose(0, 1, 3, 4, 2, 5).reshape(64, n * n)
    pops = np.sum(np.abs(amp) ** 2, axis=1)
    idx = [np.ravel_multi_index(s, (2, 4, 2, 4)) for s in _SUPPORT]
    return float(pops.sum() - pops[idx].sum())


# ---------------------------------------------------------------------------
# verification report
# ---------------------------------------------------------------------------

def oracle_difference(system: SystemConfig, coarse_n: int = DEFAULT_COARSE, jsas=None) -> tuple:
    """Max entrywise gap between the analytic and brute-force reduced density.

    Returns ``(max_abs_diff, state, analytic_rho, traced_rho)``.
    """
    if jsas is None:
        jsas = coarse_jsas(system, coarse_n)
    state = build_discrete_state(system, jsas, coarse_n)
    traced = trace_out_detuning(state)
    analytic = build_reduced_density(OverlapSet.from_jsas(state.spectra), *system.thetas)
    return float(np.max(np.abs(analytic.rho - traced.rho))), state, analytic, traced


def random_system(rng: np.random.Generator, base: SystemConfig) -> SystemConfig:
    """Perturb couplings, mismatches, pulse duration and phases of ``base``."""
    rings = [r.with_coupling(rng.uniform(0.3, 0.7)).with_mismatch(ghz(rng.uniform(-0.1, 0.1)))
             for r in base.rings]
    T = rng.uniform(0.5e-9, 5e-9)
    out = base.with_rings(rings).with_duration(T).with_phases(*rng.uniform(0, 2 * np.pi, size=3))
    hw = 10.0 * max(r.linewidth for r in out.rings)
    return out.with_grid(GridSpec(hw, base.grid.n_points))


def verify_report(system: SystemConfig, coarse_n: int = DEFAULT_COARSE, random_configs: int = 3,
                  seed: int = 2024) -> dict:
    """Oracle suite as a JSON-ready dictionary."""
    omega = coarse_nodes(system.grid.half_width, coarse_n)
    commutators = check_commutators(coarse_n, omega)

    diff, state, analytic, traced = oracle_difference(system, coarse_n)
    diffs = {"defaults": diff}
    rng = np.random.default_rng(seed)
    for k in range(random_configs):
        diffs[f"random_{k}"] = oracle_difference(random_system(rng, system), coarse_n)[0]

    s0 = sum(stokes_operator(StokesKind.Sigma0, b, coarse_n).matrix.tocsr()
             for b in (FrequencyBin.Sa, FrequencyBin.Sb))
    checks = {
        "signal_photon_number": expectation(state, s0, "signal").real,
        "polarization_signal": expectation(state, polarization_operator(coarse_n), "signal").real,
        "norm": state.norm,
        "trace": float(np.trace(traced.rho).real),
        "purity_pol_traced": purity(marginal(traced, DOF.Polarization).rho2),
        "purity_bin_traced": purity(marginal(traced, DOF.Bin).rho2),
    }
    return {
        "coarse_n": coarse_n,
        "basis": list(BASIS),
        "commutator_norms": commutators,
        "support_leak": support_leak(state),
        "oracle_max_abs_diff": max(diffs.values()),
        "oracle_diffs": diffs,
        "expectation_checks": checks,
    }
