"""TOML configuration files and configuration hashing.

Layout::

    [system]            free-form metadata (name, ...)
    [ring.1] .. [ring.4]
    [pump.1] .. [pump.4]
    [grid]
    [phases]            theta1, theta2, theta3

Keys are the dataclass field names.  Frequency fields may instead be given
in cyclic units with a suffix (``pump_center_thz = 193.415``,
``mismatch_ghz = 0.0166``); they are converted to rad/s on load.  Sections
and keys that are omitted keep the values of :func:`default_system`.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import asdict, fields, replace
from enum import Enum
from pathlib import Path

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .model import (C_LIGHT, TWO_PI, GridSpec, PumpParams, RingParams, SystemConfig,
                    default_system)

_UNIT_SUFFIX = {"_thz": TWO_PI * 1e12, "_ghz": TWO_PI * 1e9, "_mhz": TWO_PI * 1e6}
_FREQ_FIELDS = {
    "ring": {"pump_center", "signal_center", "idler_center", "mismatch"},
    "pump": {"center"},
    "grid": {"half_width"},
}


def _plain(value):
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float):
        return float(value)
    return value


def config_to_dict(system: SystemConfig) -> dict:
    return {
        "system": {"name": "four-ring hyperentanglement source"},
        "ring": {str(r.ring_id): {k: _plain(v) for k, v in asdict(r).items()} for r in system.rings},
        "pump": {str(n): {k: float(v) for k, v in asdict(p).items()} for n, p in enumerate(system.pumps, 1)},
        "grid": {"half_width": float(system.grid.half_width), "n_points": int(system.grid.n_points)},
        "phases": {"theta1": float(system.theta1), "theta2": float(system.theta2), "theta3": float(system.theta3)},
    }


def dumps(system: SystemConfig) -> str:
    return tomli_w.dumps(config_to_dict(system))


def config_hash(system: SystemConfig) -> str:
    canon = json.dumps(config_to_dict(system), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _resolve_keys(section: str, raw: dict, allowed: set) -> dict:
    """Strip unit suffixes, convert to rad/s and reject unknown keys."""
    out = {}
    for key, value in raw.items():
        name, factor = key, None
        for suffix, f in _UNIT_SUFFIX.items():
            if key.endswith(suffix) and key[: -len(suffix)] in _FREQ_FIELDS.get(section, ()):
                name, factor = key[: -len(suffix)], f
        if section == "ring" and key == "group_index":
            name, value = "group_velocity", C_LIGHT / float(value)
        if name not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{section}]")
        if name in out:
            raise ConfigError(f"[{section}] sets {name!r} twice")
        out[name] = value * factor if factor is not None else value
    return out


def _apply_ring(ring: RingParams, over: dict) -> RingParams:
    over = dict(over)
    over.pop("ring_id", None)
    centres = {"pump_center", "signal_center", "idler_center"} & over.keys()
    if "mismatch" in over and not centres:
        mismatch = float(over.pop("mismatch"))
        return replace(ring, **over).with_mismatch(mismatch)
    if centres and "mismatch" not in over:
        p = over.get("pump_center", ring.pump_center)
        s = over.get("signal_center", ring.signal_center)
        i = over.get("idler_center", ring.idler_center)
        over["mismatch"] = 2.0 * p - s - i
    return replace(ring, **over)


def from_dict(data: dict, base: SystemConfig | None = None) -> SystemConfig:
    base = default_system() if base is None else base
    unknown = set(data) - {"system", "ring", "pump", "grid", "phases"}
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    try:
        ring_fields = {f.name for f in fields(RingParams)}
        rings = list(base.rings)
        for key, raw in data.get("ring", {}).items():
            n = int(key)
            if n not in (1, 2, 3, 4):
                raise ConfigError(f"[ring.{key}] is not a ring id 1..4")
            rings[n - 1] = _apply_ring(rings[n - 1], _resolve_keys("ring", raw, ring_fields))

        pump_fields = {f.name for f in fields(PumpParams)}
        pumps = list(base.pumps)
        explicit_phase = False
        for key, raw in data.get("pump", {}).items():
            n = int(key)
            if n not in (1, 2, 3, 4):
                raise ConfigError(f"[pump.{key}] is not a ring id 1..4")
            over = _resolve_keys("pump", raw, pump_fields)
            explicit_phase |= "phase" in over
            pumps[n - 1] = replace(pumps[n - 1], **over)

        phases = _resolve_keys("phases", data.get("phases", {}), {"theta1", "theta2", "theta3"})
        thetas = tuple(float(phases.get(k, getattr(base, k))) for k in ("theta1", "theta2", "theta3"))

        grid_over = _resolve_keys("grid", data.get("grid", {}), {"half_width", "n_points"})
        grid = replace(base.grid, **grid_over) if grid_over else None

        if not explicit_phase:
            zeta1 = pumps[0].phase
            pumps[1:] = [replace(p, phase=zeta1 + t) for p, t in zip(pumps[1:], thetas)]
        system = SystemConfig(rings=tuple(rings), pumps=tuple(pumps), theta1=thetas[0],
                              theta2=thetas[1], theta3=thetas[2], grid=base.grid)
        if grid is not None:
            system = system.with_grid(grid)
        elif data.get("ring"):
            system = system.with_grid(GridSpec(max(base.grid.half_width,
                                                   10.0 * max(r.linewidth for r in system.rings)),
                                               base.grid.n_points))
        return system
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def loads(text: str, base: SystemConfig | None = None) -> SystemConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    return from_dict(data, base)


def load(path, base: SystemConfig | None = None) -> SystemConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text, base)
