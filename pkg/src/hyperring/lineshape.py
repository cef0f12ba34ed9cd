"""Ring field-enhancement factors and the Gaussian pump envelope, written in
detuning from the relevant resonance centre."""

from __future__ import annotations

from enum import Enum

import numpy as np

from .model import HBAR, PumpParams


class EnhancementSign(Enum):
    Plus = 1
    Minus = -1


def enhancement_scale(v: float, eta: float, radius: float, gamma: float) -> float:
    """On-resonance value of ``|F|^2``, i.e. ``v eta / (pi R Gamma)``."""
    return v * eta / (np.pi * radius * gamma)


def field_enhancement(omega, gamma: float, v: float, eta: float, radius: float,
                      sign: EnhancementSign = EnhancementSign.Plus):
    """Field enhancement factor of a point-coupled ring.

    ``F(Omega) = -i sqrt(v eta / (pi R Gamma)) / (i Omega / Gamma +/- 1)``

    Parameters
    ----------
    omega : float or ndarray
        Detuning from the resonance centre (rad/s).
    gamma : float
        Loaded half-width of the resonance (rad/s).
    v, eta, radius : float
        Group velocity (m/s), coupling efficiency and ring radius (m).
    sign : EnhancementSign
        ``Plus`` for the generated fields, ``Minus`` for the pump.
    """
    amp = np.sqrt(enhancement_scale(v, eta, radius, gamma))
    return -1j * amp / (1j * np.asarray(omega) / gamma + sign.value)


def pump_envelope(omega, duration: float):
    """Gaussian pump spectrum ``T exp(-Omega^2 T^2 / 2)`` (seconds)."""
    omega = np.asarray(omega, dtype=float)
    return duration * np.exp(-0.5 * (omega * duration) ** 2)


def pump_amplitude(pump: PumpParams) -> complex:
    """Pump amplitude ``exp(i zeta) sqrt(P / (hbar omega_P))``; ``|alpha|^2`` is a
    photon flux at peak power."""
    return np.exp(1j * pump.phase) * np.sqrt(pump.peak_power / (HBAR * pump.center))
