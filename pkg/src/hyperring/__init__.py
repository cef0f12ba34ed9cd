"""Simulator for polarization and frequency-bin hyperentangled photon pairs
generated by spontaneous four-wave mixing in four pulsed microrings."""

__version__ = "0.1.0"

from .errors import (ConfigError, ConsistencyError, HyperringError,  # noqa: E402
                     NumericAccuracyError)
from .model import (GridSpec, PumpParams, RingParams, SystemConfig,  # noqa: E402
                    default_system)
from .biphoton import JointSpectralAmplitude, compute_jsa, pair_probability  # noqa: E402
from .state import (DOF, OverlapSet, ReducedDensity, build_reduced_density,  # noqa: E402
                    hyper_fidelity, marginal, purity)
from .experiments import analyze_system, rate_report  # noqa: E402

__all__ = [
    "__version__", "HyperringError", "ConfigError", "NumericAccuracyError", "ConsistencyError",
    "GridSpec", "PumpParams", "RingParams", "SystemConfig", "default_system",
    "JointSpectralAmplitude", "compute_jsa", "pair_probability",
    "DOF", "OverlapSet", "ReducedDensity", "build_reduced_density", "hyper_fidelity", "marginal", "purity",
    "analyze_system", "rate_report",
]
