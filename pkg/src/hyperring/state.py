"""Four-ring state: overlaps, the reduced polarization x frequency-bin
density operator, its marginals, purities and the hyperentangled fidelity.

Basis order of the 4x4 operator::

    0: (HH, SaIa)   1: (HH, SbIb)   2: (VV, SaIa)   3: (VV, SbIb)

Ring ``n`` populates basis state ``RING_TO_BASIS[n]`` with pump phase factor
``exp(2i theta)`` of that ring (``theta = 0`` for ring 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .biphoton import JointSpectralAmplitude
from .errors import ConsistencyError, GridMismatchError

BASIS = ("HH.SaIa", "HH.SbIb", "VV.SaIa", "VV.SbIb")
# ring 1 -> (H, a), ring 2 -> (V, a), ring 3 -> (H, b), ring 4 -> (V, b)
RING_TO_BASIS = (0, 2, 1, 3)


def _phase_vector(theta1: float, theta2: float, theta3: float) -> np.ndarray:
    """Weight of each basis state: ``(1, U2, U1, U3)`` with ``U_k = e^{2i theta_k}``."""
    u1, u2, u3 = (np.exp(2j * t) for t in (theta1, theta2, theta3))
    return np.array([1.0, u2, u1, u3])


@dataclass(frozen=True)
class OverlapSet:
    """``O[n, m] = int phi_n conj(phi_m)`` for rings ``n, m = 1..4`` (0-indexed)."""

    O: np.ndarray

    def __post_init__(self):
        O = np.asarray(self.O, dtype=complex)
        if O.shape != (4, 4):
            raise ValueError("overlap matrix must be 4x4")
        if np.max(np.abs(O.diagonal() - 1.0)) > 1e-9:
            raise ConsistencyError("self-overlaps must equal 1")
        if np.max(np.abs(O - O.conj().T)) > 1e-9:
            raise ConsistencyError("overlap matrix must be Hermitian")
        if np.max(np.abs(O)) > 1 + 1e-9:
            raise ConsistencyError("overlap magnitude exceeds 1")
        object.__setattr__(self, "O", O)

    def __getitem__(self, nm):
        """1-indexed access: ``overlaps[1, 2]`` is ``O_12``."""
        n, m = nm
        return self.O[n - 1, m - 1]

    @classmethod
    def from_jsas(cls, jsas) -> "OverlapSet":
        jsas = list(jsas)
        return cls(np.array([[overlap(a, b) for b in jsas] for a in jsas]))

    @classmethod
    def uniform(cls, value: complex) -> "OverlapSet":
        """All cross overlaps equal to ``value`` (a real number keeps it Hermitian)."""
        O = np.full((4, 4), value, dtype=complex)
        np.fill_diagonal(O, 1.0)
        return cls(O)


def overlap(jsa_n: JointSpectralAmplitude, jsa_m: JointSpectralAmplitude) -> complex:
    """Simpson inner product ``sum w_i w_j phi_n conj(phi_m)`` of two wavefunctions."""
    if jsa_n.omega.shape != jsa_m.omega.shape or not np.array_equal(jsa_n.omega, jsa_m.omega):
        raise GridMismatchError(f"rings {jsa_n.ring_id} and {jsa_m.ring_id} are sampled on different grids")
    return jsa_n.inner(jsa_m)


class DOF(Enum):
    Polarization = "pol"
    Bin = "bin"


@dataclass(frozen=True)
class ReducedDensity:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise ValueError("reduced density must be 4x4")
        object.__setattr__(self, "rho", rho)

    def check(self, herm_tol=1e-12, trace_tol=1e-12, psd_tol=1e-10) -> None:
        """Raise :class:`ConsistencyError` if ``rho`` is not a valid state."""
        if np.max(np.abs(self.rho - self.rho.conj().T)) > herm_tol:
            raise ConsistencyError("reduced density is not Hermitian")
        if abs(np.trace(self.rho) - 1.0) > trace_tol:
            raise ConsistencyError(f"trace {np.trace(self.rho).real} != 1")
        lowest = np.linalg.eigvalsh(self.rho).min()
        if lowest < -psd_tol:
            raise ConsistencyError(f"negative eigenvalue {lowest:.3g}")

    def to_json(self) -> dict:
        return {
            "basis": list(BASIS),
            "re": self.rho.real.tolist(),
            "im": self.rho.imag.tolist(),
            "purity_pol": purity(marginal(self, DOF.Polarization).rho2),
            "purity_bin": purity(marginal(self, DOF.Bin).rho2),
        }


@dataclass(frozen=True)
class Marginal:
    rho2: np.ndarray
    dof: DOF


def build_reduced_density(overlaps: OverlapSet, theta1: float, theta2: float, theta3: float) -> ReducedDensity:
    """Reduced density after tracing out both detunings, for equal ring rates.

    Entries are ``rho[i, j] = c_i conj(c_j) O[r_i, r_j] / 4`` where basis state
    ``i`` is fed by ring ``r_i`` with phase weight ``c_i``.
    """
    c = _phase_vector(theta1, theta2, theta3)
    ring_of = np.argsort(RING_TO_BASIS)  # basis index -> ring index
    O = overlaps.O[np.ix_(ring_of, ring_of)]
    rho = 0.25 * np.outer(c, c.conj()) * O
    out = ReducedDensity(rho)
    out.check(herm_tol=1e-12, trace_tol=1e-12, psd_tol=1e-10)
    return out


def marginal(rho: ReducedDensity, dof: DOF) -> Marginal:
    """Trace out the other degree of freedom.

    ``dof=Polarization`` keeps (HH, VV); ``dof=Bin`` keeps (SaIa, SbIb).
    """
    r = rho.rho.reshape(2, 2, 2, 2)  # (pol, bin, pol', bin')
    if dof is DOF.Polarization:
        rho2 = np.einsum("abcb->ac", r)
    else:
        rho2 = np.einsum("abad->bd", r)
    return Marginal(rho2, dof)


def purity(rho) -> float:
    """``Tr(rho^2) = sum |rho_ij|^2`` for a Hermitian matrix."""
    rho = np.asarray(rho)
    return float(np.sum(np.abs(rho) ** 2))


def _closed_form(o_x: complex, o_y: complex, theta1: float, theta2: float, theta3: float) -> float:
    phase = np.exp(2j * (theta3 - theta2 - theta1))
    return 0.5 + 0.125 * (abs(o_x) ** 2 + abs(o_y) ** 2 + 2.0 * (phase * o_x * np.conj(o_y)).real)


def closed_form_purity_pol(O12: complex, O34: complex, theta1: float, theta2: float, theta3: float) -> float:
    """Polarization purity from the two same-bin overlaps."""
    return _closed_form(O12, O34, theta1, theta2, theta3)


def closed_form_purity_bin(O13: complex, O24: complex, theta1: float, theta2: float, theta3: float) -> float:
    """Frequency-bin purity from the two same-polarization overlaps."""
    return _closed_form(O13, O24, theta1, theta2, theta3)


def hyperentangled_state(theta1: float, theta2: float) -> np.ndarray:
    """``(|HH> + U1|VV>) x (|SaIa> + U2|SbIb>) / 2`` in the 4-basis."""
    u1, u2 = np.exp(2j * theta1), np.exp(2j * theta2)
    return 0.5 * np.array([1.0, u2, u1, u1 * u2])


def hyper_fidelity(rho: ReducedDensity, theta1: float, theta2: float) -> float:
    psi = hyperentangled_state(theta1, theta2)
    return float((psi.conj() @ rho.rho @ psi).real)


def _bell_label(theta: float, tol: float = 1e-9) -> str:
    u = np.exp(2j * theta)
    if abs(u - 1) < tol:
        return "Phi+"
    if abs(u + 1) < tol:
        return "Phi-"
    return f"Phi({2 * theta:.6g})"


def bell_phase_report(theta1: float, theta2: float) -> tuple:
    """Names of the target Bell states of the polarization and bin marginals.

    ``Phi+`` when ``e^{2i theta} = 1``, ``Phi-`` when it is ``-1``, otherwise
    ``Phi(2 theta)``.
    """
    return _bell_label(theta1), _bell_label(theta2)


def density_report(rho: ReducedDensity, theta1: float, theta2: float) -> dict:
    out = rho.to_json()
    out["hyper_fidelity"] = hyper_fidelity(rho, theta1, theta2)
    return out


def write_density_json(path, rho: ReducedDensity, theta1: float, theta2: float, extra: dict | None = None) -> None:
    out = density_report(rho, theta1, theta2)
    if extra:
        out.update(extra)
    Path(path).write_text(json.dumps(out, indent=2, sort_keys=True), encoding="utf-8")
