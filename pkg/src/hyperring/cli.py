"""Command-line front end.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical accuracy
failure.  Every command writes plot-ready CSV plus a JSON sidecar that
carries the configuration and its hash.
"""

from __future__ import annotations

import argparse
import json
import sys
from enum import Enum
from pathlib import Path

import numpy as np

from . import __version__
from .config import config_hash, config_to_dict, dumps, load
from .errors import ConfigError, ConsistencyError, NumericAccuracyError
from .experiments import (analyze_system, equalize_powers, jsa_map, rate_report, sweep_duration,
                          sweep_eta, sweep_power, sweep_rate, write_sweep)
from .model import GridSpec, SystemConfig, default_system, ghz
from .oracle import verify_report
from .state import write_density_json

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
ORACLE_TOL = 1e-8


class Command(str, Enum):
    Jsa = "jsa"
    State = "state"
    PuritySweepEta = "purity-sweep-eta"
    PuritySweepT = "purity-sweep-t"
    PowerSweep = "power-sweep"
    RateSweep = "rate-sweep"
    Equalize = "equalize"
    Verify = "verify"
    Defaults = "defaults"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


def _axis(lo: float, hi: float, points: int, log: bool) -> np.ndarray:
    if points < 1:
        raise ConfigError("--points must be at least 1")
    if points == 1:
        return np.array([lo])
    if hi <= lo:
        raise ConfigError("axis maximum must exceed its minimum")
    if log:
        if lo <= 0:
            raise ConfigError("log axis needs a positive minimum")
        return np.geomspace(lo, hi, points)
    return np.linspace(lo, hi, points)


def _ring_id(text: str) -> int:
    n = int(text)
    if n not in (1, 2, 3, 4):
        raise argparse.ArgumentTypeError("ring id must be 1..4")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML configuration (defaults otherwise)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--grid-n", type=int, help="grid points per axis (odd)")
    common.add_argument("--grid-halfwidth-ghz", type=float, help="grid half-width in GHz (cyclic)")
    for k in (1, 2, 3):
        common.add_argument(f"--theta{k}", type=float, help=f"pump phase difference theta{k} in rad")
    common.add_argument("--workers", type=int, default=1, help="threads for sweep points")

    parser = _Parser(prog="hyperring", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser(Command.Jsa.value, parents=[common], help="one ring's wavefunction on the grid")
    p.add_argument("--ring", type=_ring_id, default=1)
    p.add_argument("--mismatch-ghz", type=float, help="override the frequency mismatch (cyclic GHz)")

    p = sub.add_parser(Command.State.value, parents=[common], help="reduced density and purities")
    p.add_argument("--method", choices=("grid", "sum"), default="grid")

    p = sub.add_parser(Command.PuritySweepEta.value, parents=[common], help="purities vs coupling")
    p.add_argument("--vary", default="3,4", help="comma-separated ring ids to vary")
    p.add_argument("--eta-min", type=float, default=0.3)
    p.add_argument("--eta-max", type=float, default=0.7)
    p.add_argument("--points", type=int, default=9)
    p.add_argument("--method", choices=("grid", "sum"), default="grid")

    p = sub.add_parser(Command.PuritySweepT.value, parents=[common], help="purities vs pulse duration")
    p.add_argument("--tmin", type=float, default=1e-9)
    p.add_argument("--tmax", type=float, default=1e-8)
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--log", action="store_true", help="logarithmic spacing")
    p.add_argument("--method", choices=("auto", "grid", "sum"), default="auto")

    p = sub.add_parser(Command.PowerSweep.value, parents=[common], help="pair probability vs peak power")
    p.add_argument("--ring", type=_ring_id, default=1)
    p.add_argument("--pmin", type=float, default=0.0)
    p.add_argument("--pmax", type=float, default=2e-3)
    p.add_argument("--points", type=int, default=21)
    p.add_argument("--log", action="store_true")
    p.add_argument("--method", choices=("grid", "sum"), default="sum")

    p = sub.add_parser(Command.RateSweep.value, parents=[common], help="pair rate vs pulse duration")
    p.add_argument("--ring", type=_ring_id, default=1)
    p.add_argument("--tmin", type=float, default=1e-9)
    p.add_argument("--tmax", type=float, default=1e-7)
    p.add_argument("--points", type=int, default=21)
    p.add_argument("--linear", action="store_true", help="linear instead of logarithmic spacing")
    p.add_argument("--method", choices=("grid", "sum"), default="sum")

    p = sub.add_parser(Command.Equalize.value, parents=[common], help="equal pair probability per ring")
    p.add_argument("--target", type=float, required=True, help="total pair probability per pulse")
    p.add_argument("--max-power", type=float, default=0.1, help="largest allowed peak power in W")

    p = sub.add_parser(Command.Verify.value, parents=[common], help="oracle comparison report")
    p.add_argument("--coarse-n", type=int, default=21)
    p.add_argument("--random-configs", type=int, default=3)
    p.add_argument("--seed", type=int, default=2024)

    sub.add_parser(Command.Defaults.value, parents=[common], help="print the default configuration")
    return parser


def _system(args) -> SystemConfig:
    system = load(args.config) if args.config else default_system()
    thetas = [args.theta1, args.theta2, args.theta3]
    if any(t is not None for t in thetas):
        system = system.with_phases(*(t if t is not None else old for t, old in zip(thetas, system.thetas)))
    if args.grid_n is not None or args.grid_halfwidth_ghz is not None:
        hw = ghz(args.grid_halfwidth_ghz) if args.grid_halfwidth_ghz is not None else system.grid.half_width
        n = args.grid_n if args.grid_n is not None else system.grid.n_points
        system = system.with_grid(GridSpec(hw, n))
    return system


def _write_json(path: Path, data: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True), encoding="utf-8")


def _meta(system: SystemConfig, **extra) -> dict:
    return {"config": config_to_dict(system), "config_hash": config_hash(system),
            "software_version": __version__, **extra}


def _run_jsa(args, system):
    n = args.ring
    mismatch = ghz(args.mismatch_ghz) if args.mismatch_ghz is not None else None
    grid = system.grid if (args.grid_n or args.grid_halfwidth_ghz) else None
    jsa = jsa_map(system.rings[n - 1], system.pumps[n - 1], mismatch, grid)
    args.out.mkdir(parents=True, exist_ok=True)
    jsa.write_csv(args.out / f"jsa_ring{n}.csv")
    side = jsa.sidecar(config_hash(system))
    side.update(_meta(system, mismatch_override_rad_s=mismatch, centroid=list(jsa.centroid())))
    _write_json(args.out / f"jsa_ring{n}.json", side)
    print(f"ring {n}: |beta|^2 = {jsa.beta_squared:.6g}, centroid = {jsa.centroid()}")


def _run_state(args, system):
    a = analyze_system(system, args.method)
    overlaps = {"re": a.overlaps.O.real.tolist(), "im": a.overlaps.O.imag.tolist()}
    args.out.mkdir(parents=True, exist_ok=True)
    write_density_json(args.out / "density.json", a.rho, system.theta1, system.theta2,
                       _meta(system, method=args.method, overlaps=overlaps))
    print(f"gamma_pol = {a.gamma_pol:.8f}\ngamma_bin = {a.gamma_bin:.8f}\nhyper_fidelity = {a.fidelity:.8f}")


def _report(result, args, system, name):
    csv_path, _ = write_sweep(result, args.out, name, system)
    print(f"wrote {csv_path} ({len(result.x)} rows)")


def _run_sweep_eta(args, system):
    try:
        vary = [int(v) for v in args.vary.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--vary: {exc}") from exc
    etas = _axis(args.eta_min, args.eta_max, args.points, False)
    res = sweep_eta(system, vary, etas, method=args.method, workers=args.workers)
    _report(res, args, system, "purity_vs_eta_" + "".join(str(v) for v in sorted(set(vary))))


def _run_sweep_t(args, system):
    res = sweep_duration(system, _axis(args.tmin, args.tmax, args.points, args.log), args.method, args.workers)
    _report(res, args, system, "purity_vs_duration")


def _run_power(args, system):
    n = args.ring
    res = sweep_power(system.rings[n - 1], system.pumps[n - 1],
                      _axis(args.pmin, args.pmax, args.points, args.log), args.method)
    _report(res, args, system, f"probability_vs_power_ring{n}")


def _run_rate(args, system):
    n = args.ring
    res = sweep_rate(system.rings[n - 1], system.pumps[n - 1],
                     _axis(args.tmin, args.tmax, args.points, not args.linear), args.method, args.workers)
    _report(res, args, system, f"rate_vs_duration_ring{n}")


def _run_equalize(args, system):
    out = equalize_powers(system, args.target, args.max_power)
    report = rate_report(out)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "equalized.toml").write_text(dumps(out), encoding="utf-8")
    _write_json(args.out / "equalized.json", _meta(out, target_total_prob=args.target,
                                                   peak_powers_w=[p.peak_power for p in out.pumps],
                                                   per_ring_prob=list(report.per_ring_prob),
                                                   total_rate_hz=report.total_rate,
                                                   warn_multipair=report.warn_multipair))
    for n, p in enumerate(out.pumps, 1):
        print(f"ring {n}: P = {p.peak_power:.6g} W")


def _run_verify(args, system):
    report = verify_report(system, args.coarse_n, args.random_configs, args.seed)
    report["config_hash"] = config_hash(system)
    print(json.dumps(report, indent=2, sort_keys=True))
    if report["oracle_max_abs_diff"] > ORACLE_TOL:
        raise NumericAccuracyError("oracle and analytic densities disagree",
                                   achieved=report["oracle_max_abs_diff"])


def _run_defaults(args, system):
    sys.stdout.write(dumps(system))


_DISPATCH = {
    Command.Jsa: _run_jsa,
    Command.State: _run_state,
    Command.PuritySweepEta: _run_sweep_eta,
    Command.PuritySweepT: _run_sweep_t,
    Command.PowerSweep: _run_power,
    Command.RateSweep: _run_rate,
    Command.Equalize: _run_equalize,
    Command.Verify: _run_verify,
    Command.Defaults: _run_defaults,
}


def run(argv=None) -> int:
    try:
        try:
            args = build_parser().parse_args(argv)
        except SystemExit as exc:  # --help / --version
            return int(exc.code or 0)
        system = _system(args)
        _DISPATCH[Command(args.command)](args, system)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericAccuracyError, ConsistencyError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
