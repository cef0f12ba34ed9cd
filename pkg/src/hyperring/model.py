"""Domain types, unit conventions and the default four-ring configuration.

All frequencies are angular (rad/s) and every detuning is measured from the
centre of the resonance it belongs to.  Times are in seconds, powers in watts,
lengths in metres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import ConfigError, InvalidCouplingError

HBAR = 1.054571817e-34  # J s
C_LIGHT = 2.99792458e8  # m/s

TWO_PI = 2.0 * math.pi


def thz(f: float) -> float:
    """Cyclic frequency in THz -> angular frequency in rad/s."""
    return TWO_PI * f * 1e12


def ghz(f: float) -> float:
    """Cyclic frequency in GHz -> angular frequency in rad/s."""
    return TWO_PI * f * 1e9


class Polarization(str, Enum):
    H = "H"
    V = "V"


class FrequencyBin(str, Enum):
    Sa = "Sa"
    Ia = "Ia"
    Sb = "Sb"
    Ib = "Ib"

    @property
    def partner(self) -> "FrequencyBin":
        return _PARTNER[self]

    @property
    def is_signal(self) -> bool:
        return self in (FrequencyBin.Sa, FrequencyBin.Sb)


_PARTNER = {
    FrequencyBin.Sa: FrequencyBin.Ia,
    FrequencyBin.Ia: FrequencyBin.Sa,
    FrequencyBin.Sb: FrequencyBin.Ib,
    FrequencyBin.Ib: FrequencyBin.Sb,
}


# ---------------------------------------------------------------------------
# scalar helpers
# ---------------------------------------------------------------------------

def coupling_from_qload(q_load: float, q_int: float) -> float:
    """Coupling efficiency ``1 - Q_load / Q_int``.

    Raises
    ------
    InvalidCouplingError
        If ``q_load > q_int`` (the efficiency would be negative) or either
        quality factor is not positive.
    """
    if q_int <= 0 or q_load <= 0:
        raise InvalidCouplingError(f"quality factors must be positive, got q_load={q_load}, q_int={q_int}")
    if q_load > q_int:
        raise InvalidCouplingError(f"q_load={q_load} exceeds q_int={q_int}")
    return 1.0 - q_load / q_int


def loaded_q(q_int: float, eta: float) -> float:
    """Inverse of :func:`coupling_from_qload`."""
    return q_int * (1.0 - eta)


def linewidth(omega0: float, q_load: float) -> float:
    """Resonance half-width ``omega0 / (2 Q_load)`` in rad/s."""
    if omega0 <= 0 or q_load <= 0:
        raise ConfigError(f"linewidth needs omega0 > 0 and q_load > 0, got {omega0}, {q_load}")
    return omega0 / (2.0 * q_load)


def fsr_estimate(group_index: float, radius: float) -> float:
    """Free spectral range ``c / (n_g 2 pi R)`` in Hz (cyclic)."""
    if group_index <= 0 or radius <= 0:
        raise ConfigError("group index and radius must be positive")
    return C_LIGHT / (group_index * TWO_PI * radius)


def mismatch_from_gvd(gvd: float, mode_gap: int, radius: float) -> float:
    """Frequency mismatch ``-2 GVD (m_P - m_S)^2 / R^2`` in rad/s.

    ``gvd`` is the curvature d^2 omega / dk^2 of the ring dispersion (m^2/s).
    Normal dispersion (``gvd > 0``) gives a negative mismatch.
    """
    if radius <= 0:
        raise ConfigError("radius must be positive")
    return -2.0 * gvd * float(mode_gap) ** 2 / radius**2


# ---------------------------------------------------------------------------
# parameter records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Symmetric detuning grid ``[-half_width, half_width]`` with an odd
    number of samples, so that zero detuning is always a node."""

    half_width: float
    n_points: int = 513

    MIN_POINTS = 33

    def __post_init__(self):
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise ConfigError(f"grid half_width must be positive, got {self.half_width}")
        if int(self.n_points) != self.n_points or self.n_points % 2 == 0 or self.n_points < self.MIN_POINTS:
            raise ConfigError(f"grid n_points must be an odd integer >= {self.MIN_POINTS}, got {self.n_points}")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n_points - 1)

    def nodes(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_points)


@dataclass(frozen=True)
class RingParams:
    ring_id: int
    radius: float
    group_velocity: float
    nonlinear_param: float
    q_intrinsic: float
    coupling_eff: float
    pump_center: float
    signal_center: float
    idler_center: float
    mismatch: float
    polarization: Polarization
    signal_bin: FrequencyBin
    idler_bin: FrequencyBin

    def __post_init__(self):
        object.__setattr__(self, "polarization", Polarization(self.polarization))
        object.__setattr__(self, "signal_bin", FrequencyBin(self.signal_bin))
        object.__setattr__(self, "idler_bin", FrequencyBin(self.idler_bin))
        if self.ring_id not in (1, 2, 3, 4):
            raise ConfigError(f"ring_id must be 1..4, got {self.ring_id}")
        if not 0.0 <= self.coupling_eff <= 1.0:
            raise InvalidCouplingError(f"coupling efficiency must lie in [0, 1], got {self.coupling_eff}")
        for name in ("radius", "group_velocity", "nonlinear_param", "q_intrinsic",
                     "pump_center", "signal_center", "idler_center"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"ring {self.ring_id}: {name} must be positive")
        if self.signal_bin.partner is not self.idler_bin:
            raise ConfigError(f"ring {self.ring_id}: bins {self.signal_bin.value}/{self.idler_bin.value} do not pair")
        implied = 2.0 * self.pump_center - self.signal_center - self.idler_center
        if abs(implied - self.mismatch) > 1e-9 * self.pump_center:
            raise ConfigError(
                f"ring {self.ring_id}: mismatch {self.mismatch:.6g} rad/s disagrees with "
                f"2*pump - signal - idler = {implied:.6g} rad/s"
            )

    @classmethod
    def from_centers(cls, ring_id, radius, group_velocity, nonlinear_param, q_intrinsic,
                     coupling_eff, pump_center, signal_center, idler_center,
                     polarization, signal_bin, idler_bin) -> "RingParams":
        """Build a ring whose mismatch is computed from the three centres."""
        return cls(ring_id, radius, group_velocity, nonlinear_param, q_intrinsic, coupling_eff,
                   pump_center, signal_center, idler_center,
                   2.0 * pump_center - signal_center - idler_center,
                   polarization, signal_bin, idler_bin)

    @property
    def q_load(self) -> float:
        return loaded_q(self.q_intrinsic, self.coupling_eff)

    @property
    def linewidth(self) -> float:
        if self.coupling_eff >= 1.0:
            raise InvalidCouplingError(f"ring {self.ring_id}: eta = 1 has no finite loaded Q")
        return linewidth(self.pump_center, self.q_load)

    def with_coupling(self, eta: float) -> "RingParams":
        return replace(self, coupling_eff=eta)

    def with_mismatch(self, mismatch: float) -> "RingParams":
        # keep signal fixed and move the idler so the centres stay consistent
        idler = 2.0 * self.pump_center - self.signal_center - mismatch
        return replace(self, mismatch=mismatch, idler_center=idler)


@dataclass(frozen=True)
class PumpParams:
    peak_power: float
    phase: float
    center: float
    duration: float

    def __post_init__(self):
        if not self.peak_power >= 0:
            raise ConfigError(f"pump peak power must be >= 0, got {self.peak_power}")
        if not self.duration > 0:
            raise ConfigError(f"pump duration must be > 0, got {self.duration}")
        if not self.center > 0:
            raise ConfigError("pump centre frequency must be positive")

    def with_power(self, power: float) -> "PumpParams":
        return replace(self, peak_power=power)

    def with_duration(self, duration: float) -> "PumpParams":
        return replace(self, duration=duration)


_EXPECTED_LAYOUT = {
    1: (Polarization.H, FrequencyBin.Sa, FrequencyBin.Ia),
    2: (Polarization.V, FrequencyBin.Sa, FrequencyBin.Ia),
    3: (Polarization.H, FrequencyBin.Sb, FrequencyBin.Ib),
    4: (Polarization.V, FrequencyBin.Sb, FrequencyBin.Ib),
}


def _phase_close(a: float, b: float, tol: float = 1e-9) -> bool:
    return abs(np.exp(1j * a) - np.exp(1j * b)) <= tol


@dataclass(frozen=True)
class SystemConfig:
    """Four rings, the pump incident on each, and the relative pump phases.

    ``theta1``, ``theta2`` and ``theta3`` are the phases of the pumps on rings
    2, 3 and 4 relative to ring 1.  The pump records carry the same
    information as absolute phases; both are kept consistent.
    """

    rings: tuple
    pumps: tuple
    theta1: float = 0.0
    theta2: float = 0.0
    theta3: float = 0.0
    grid: GridSpec = field(default=None)

    def __post_init__(self):
        rings = tuple(self.rings)
        pumps = tuple(self.pumps)
        object.__setattr__(self, "rings", rings)
        object.__setattr__(self, "pumps", pumps)
        if len(rings) != 4 or len(pumps) != 4:
            raise ConfigError("a system needs exactly four rings and four pumps")
        for n, ring in enumerate(rings, start=1):
            if ring.ring_id != n:
                raise ConfigError(f"ring at position {n} has ring_id {ring.ring_id}")
            if (ring.polarization, ring.signal_bin, ring.idler_bin) != _EXPECTED_LAYOUT[n]:
                raise ConfigError(f"ring {n} must be {_EXPECTED_LAYOUT[n][0].value} in bins "
                                  f"{_EXPECTED_LAYOUT[n][1].value}/{_EXPECTED_LAYOUT[n][2].value}")
        for ring, pump in zip(rings, pumps):
            if abs(pump.center - ring.pump_center) > 1e-9 * ring.pump_center:
                raise ConfigError(f"pump {ring.ring_id} is not centred on the ring's pump resonance")
        if pumps[0].center != pumps[1].center or pumps[2].center != pumps[3].center:
            raise ConfigError("rings 1,2 and rings 3,4 must share their pump frequency")
        zeta1 = pumps[0].phase
        for theta, pump in zip(self.thetas, pumps[1:]):
            # only e^{2i zeta} enters the state
            if not _phase_close(2 * (pump.phase - zeta1), 2 * theta):
                raise ConfigError("pump phases are inconsistent with theta1..theta3; use with_phases()")
        if self.grid is None:
            object.__setattr__(self, "grid", GridSpec(10.0 * max(r.linewidth for r in rings), 513))

    @property
    def thetas(self) -> tuple:
        return (self.theta1, self.theta2, self.theta3)

    def with_phases(self, theta1: float, theta2: float, theta3: float) -> "SystemConfig":
        zeta1 = self.pumps[0].phase
        pumps = (self.pumps[0],) + tuple(
            replace(p, phase=zeta1 + t) for p, t in zip(self.pumps[1:], (theta1, theta2, theta3))
        )
        return replace(self, pumps=pumps, theta1=theta1, theta2=theta2, theta3=theta3)

    def with_rings(self, rings) -> "SystemConfig":
        return replace(self, rings=tuple(rings))

    def with_pumps(self, pumps) -> "SystemConfig":
        return replace(self, pumps=tuple(pumps))

    def with_couplings(self, etas: dict) -> "SystemConfig":
        """Return a copy with ``{ring_id: eta}`` applied."""
        return self.with_rings(r.with_coupling(etas.get(r.ring_id, r.coupling_eff)) for r in self.rings)

    def with_duration(self, duration: float) -> "SystemConfig":
        return self.with_pumps(p.with_duration(duration) for p in self.pumps)

    def with_grid(self, grid: GridSpec) -> "SystemConfig":
        return replace(self, grid=grid)


# ---------------------------------------------------------------------------
# reference configuration
# ---------------------------------------------------------------------------

PUMP_A = thz(193.415)
PUMP_B = thz(192.175)
GROUP_INDEX = 2.10
Q_INTRINSIC = 1e6
MISMATCH_GHZ = (0.0166, 0.0267, 0.0174, 0.0279)


def default_system(peak_power: float = 1e-3, duration: float = 1e-9) -> SystemConfig:
    """The reference four-ring device: critically coupled SiN rings pumped
    at 193.415 THz (rings 1, 2) and 192.175 THz (rings 3, 4)."""
    radii = (80e-6 - 20e-9, 80e-6 + 60e-9, 80e-6 + 60e-9, 80e-6 - 20e-9)
    nonlinear = (1.48, 1.40, 1.48, 1.40)
    pumps_w = (PUMP_A, PUMP_A, PUMP_B, PUMP_B)
    v = C_LIGHT / GROUP_INDEX
    rings = []
    for n in range(1, 5):
        pol, sbin, ibin = _EXPECTED_LAYOUT[n]
        wp = pumps_w[n - 1]
        ws = wp + TWO_PI * fsr_estimate(GROUP_INDEX, radii[n - 1])
        dw = ghz(MISMATCH_GHZ[n - 1])
        rings.append(RingParams(
            ring_id=n, radius=radii[n - 1], group_velocity=v, nonlinear_param=nonlinear[n - 1],
            q_intrinsic=Q_INTRINSIC, coupling_eff=0.5, pump_center=wp, signal_center=ws,
            idler_center=2.0 * wp - ws - dw, mismatch=dw,
            polarization=pol, signal_bin=sbin, idler_bin=ibin,
        ))
    pumps = [PumpParams(peak_power=peak_power, phase=0.0, center=w, duration=duration) for w in pumps_w]
    return SystemConfig(rings=tuple(rings), pumps=tuple(pumps))
