"""Command-line front end: JSON config in, CSV out.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .errors import ConfigError, SctraceError
from .methods import METHODS, Evaluator, OrbitOptions, supported
from .model import (
    DoubleWell,
    PolynomialWell,
    QuarticUV,
    SpinField,
    reference_omega,
)
from .orbits import TRM_MODES, find_librations, trivial_contributions
from .thermo import sweep as thermo_sweep

CSV_SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

SWEEP_COLUMNS = ("T", "T_star", "method", "Z", "log_Z", "f", "u", "s", "c",
                 "Z_harmonic", "Z_tunneling", "status")
ORBIT_COLUMNS = ("kind", "well", "q", "n", "E_shell", "S_bar", "trM", "term", "mode")
SPECTRUM_COLUMNS = ("n", "E", "error")
COMPARE_COLUMNS = ("method", "Z", "log_Z", "f", "u", "s", "c", "rel_f", "rel_u", "status")

# kind -> (constructor, required params, optional params with defaults)
_SYSTEMS = {
    "polynomial": (PolynomialWell, ("coeffs",), {}),
    "harmonic": (None, (), {"omega": 1.0}),
    "double_well": (DoubleWell, ("delta_e", "a"), {}),
    "quartic_uv": (QuarticUV, ("alpha",), {"omega": 1.0}),
    "spin": (SpinField, ("s",), {"omega": 1.0}),
}
_TOP_KEYS = {"system", "sweep", "methods", "orbits", "output"}
_SWEEP_KEYS = {"t_min", "t_max", "points", "scale", "variable"}
_ORBIT_KEYS = {"n_max", "trm_mode", "trm_floor"}


@dataclass(frozen=True)
class SweepConfig:
    t_min: float
    t_max: float
    points: int
    scale: str = "log"
    variable: str = "T"  # or "T_star": bounds given in units of hbar omega / k_B

    def temperatures(self, energy_unit=1.0, k_b=1.0):
        if self.scale == "log":
            grid = np.geomspace(self.t_min, self.t_max, self.points)
        else:
            grid = np.linspace(self.t_min, self.t_max, self.points)
        if self.variable == "T_star":
            grid = grid * energy_unit / k_b
        return [float(t) for t in grid]


@dataclass(frozen=True)
class RunConfig:
    system: object
    sweep: Optional[SweepConfig] = None
    methods: tuple = ()
    orbits: OrbitOptions = field(default_factory=OrbitOptions)
    output: Optional[str] = None


def _number(value, path, *, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("expected a number", path)
    if integer and not float(value).is_integer():
        raise ConfigError("expected an integer", path)
    if not math.isfinite(value):
        raise ConfigError("must be finite", path)
    if positive and not value > 0:
        raise ConfigError(f"must be positive, got {value!r}", path)
    return int(value) if integer else float(value)


def _object(value, path, allowed):
    if not isinstance(value, dict):
        raise ConfigError("expected an object", path or "<document>")
    for k in value:
        if k not in allowed:
            raise ConfigError("unknown key", f"{path}.{k}" if path else k)
    return value


def _parse_system(block):
    if not isinstance(block, dict):
        raise ConfigError("expected an object", "system")
    kind = block.get("kind")
    if kind not in _SYSTEMS:
        raise ConfigError(f"expected one of {sorted(_SYSTEMS)}, got {kind!r}", "system.kind")
    ctor, required, optional = _SYSTEMS[kind]
    allowed = {"kind", "hbar", "k_b", *required, *optional}
    _object(block, "system", allowed)
    consts = {k: _number(block.get(k, 1.0), f"system.{k}", positive=True)
              for k in ("hbar", "k_b")}
    params = {}
    for k in required:
        if k not in block:
            raise ConfigError("missing required field", f"system.{k}")
    for k in (*required, *optional):
        v = block.get(k, optional.get(k))
        if k == "coeffs":
            if not isinstance(v, list) or len(v) < 3:
                raise ConfigError("expected a list of at least three numbers", "system.coeffs")
            params[k] = tuple(_number(c, f"system.coeffs[{i}]") for i, c in enumerate(v))
        else:
            params[k] = _number(v, f"system.{k}", positive=True)
    try:
        if kind == "harmonic":
            w = params["omega"]
            return PolynomialWell((0.0, 0.0, 0.5 * w * w), **consts)
        return ctor(**params, **consts)
    except (ValueError, TypeError) as exc:
        key = next((k for k in (*required, *optional) if k in str(exc)), "kind")
        raise ConfigError(str(exc), f"system.{key}") from None


def _parse_sweep(block):
    _object(block, "sweep", _SWEEP_KEYS)
    for k in ("t_min", "t_max", "points"):
        if k not in block:
            raise ConfigError("missing required field", f"sweep.{k}")
    t_min = _number(block["t_min"], "sweep.t_min", positive=True)
    t_max = _number(block["t_max"], "sweep.t_max", positive=True)
    points = _number(block["points"], "sweep.points", integer=True)
    if not t_min < t_max:
        raise ConfigError("t_min must be below t_max", "sweep.t_max")
    if points < 2:
        raise ConfigError("need at least 2 points", "sweep.points")
    scale = block.get("scale", "log")
    if scale not in ("linear", "log"):
        raise ConfigError("expected 'linear' or 'log'", "sweep.scale")
    variable = block.get("variable", "T")
    if variable not in ("T", "T_star"):
        raise ConfigError("expected 'T' or 'T_star'", "sweep.variable")
    return SweepConfig(t_min, t_max, points, scale, variable)


def _parse_orbits(block):
    _object(block, "orbits", _ORBIT_KEYS)
    n_max = _number(block.get("n_max", 3), "orbits.n_max", integer=True)
    if n_max < 1:
        raise ConfigError("must be >= 1", "orbits.n_max")
    mode = block.get("trm_mode", "floored")
    if mode not in TRM_MODES:
        raise ConfigError(f"expected one of {list(TRM_MODES)}", "orbits.trm_mode")
    floor = _number(block.get("trm_floor", 1e-6), "orbits.trm_floor")
    if mode == "floored" and not floor > 0:
        raise ConfigError("must be positive in floored mode", "orbits.trm_floor")
    return OrbitOptions(n_max, mode, floor)


def parse_config(text: str) -> RunConfig:
    """Validate a JSON run configuration; every problem names its key path."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc.msg} (line {exc.lineno})", "<document>") from None
    _object(raw, "", _TOP_KEYS)
    if "system" not in raw:
        raise ConfigError("missing required block", "system")
    system = _parse_system(raw["system"])
    sweep = _parse_sweep(raw["sweep"]) if "sweep" in raw else None
    methods = raw.get("methods")
    if methods is None:
        methods = [m for m in METHODS if supported(system, m)]
    if not isinstance(methods, list) or not methods:
        raise ConfigError("expected a non-empty list", "methods")
    for i, m in enumerate(methods):
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}", f"methods[{i}]")
        if not supported(system, m):
            raise ConfigError(f"{m} is not defined for system kind "
                              f"{type(system).__name__}", f"methods[{i}]")
    orbits = _parse_orbits(raw.get("orbits", {}))
    output = raw.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("expected a path string", "output")
    return RunConfig(system, sweep, tuple(methods), orbits, output)


# CSV emission

def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def _write_csv(path, columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    if path in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())


def _warn(msg):
    print(f"sctrace: {msg}", file=sys.stderr)


def _point_row(p, status="ok"):
    extra = dict(p.extra)
    return {"T": p.T, "T_star": p.T_star, "method": p.method, "Z": p.Z, "log_Z": p.log_z,
            "f": p.f, "u": p.u, "s": p.s, "c": p.c, "Z_harmonic": extra.get("Z_harmonic"),
            "Z_tunneling": extra.get("Z_tunneling"), "status": status}


def run_sweep(config: RunConfig, out=None):
    """Rows are temperature-major, methods in configured order. Returns the failure count."""
    if config.sweep is None:
        raise ConfigError("missing required block for the sweep command", "sweep")
    spec = config.system
    unit = config.system.hbar * reference_omega(spec)
    ev = Evaluator(spec, config.orbits)
    temps = config.sweep.temperatures(unit, spec.k_b)
    rows, failures = [], 0
    for t in temps:
        for m in config.methods:
            try:
                p = thermo_sweep(lambda b, m=m: ev.point(m, b), [t], spec.k_b, unit)[0]
                rows.append(_point_row(p))
            except (SctraceError, ArithmeticError) as exc:
                failures += 1
                _warn(f"T={t:.6g} method={m}: {type(exc).__name__}: {exc}")
                rows.append({"T": t, "T_star": spec.k_b * t / unit, "method": m,
                             "status": "failed"})
    _write_csv(out or config.output, SWEEP_COLUMNS, rows)
    return failures


def _orbit_row(c, mode):
    return {"kind": c.kind, "well": c.well if c.kind != "trivial" else None, "q": c.q,
            "n": c.n,
            "E_shell": c.e_shell, "S_bar": c.s_bar, "trM": c.trm,
            "term": math.exp(c.log_term) if math.isfinite(c.log_term) else math.nan,
            "mode": mode}


def run_orbits(config: RunConfig, beta, out=None):
    """Trivial orbits, then librations under both amplitude modes."""
    spec = config.system
    ev = Evaluator(spec, config.orbits)
    rows = []
    if ev.potential is None:
        rows += [_orbit_row(c, "") for c in ev.contributions(beta)]
    else:
        rows += [_orbit_row(c, "") for c in trivial_contributions(ev.potential, beta, spec.hbar)]
        if len(rows) > 1:
            o = config.orbits
            modes = [o.trm_mode] + [m for m in TRM_MODES if m != o.trm_mode]
            for mode in modes:
                libs = find_librations(ev.potential, beta, o.n_max, spec.hbar, mode,
                                       o.trm_floor if o.trm_floor > 0 else 1e-6)
                rows += [_orbit_row(c, mode) for c in libs]
    _write_csv(out or config.output, ORBIT_COLUMNS, rows)
    return 0


def run_spectrum(config: RunConfig, K, out=None):
    ev = Evaluator(config.system, config.orbits)
    sp = ev.levels(K)
    errors = sp.errors or (0.0,) * len(sp.levels)
    rows = [{"n": i, "E": e, "error": err} for i, (e, err) in enumerate(zip(sp.levels, errors))]
    _write_csv(out or config.output, SPECTRUM_COLUMNS, rows)
    return 0


def run_compare(config: RunConfig, beta, out=None):
    """All configured methods at one beta, with deviations from the exact result."""
    spec = config.system
    ev = Evaluator(spec, config.orbits)
    ref = ev.point("exact", beta)
    rows, failures = [], 0
    for m in config.methods:
        try:
            p = ev.point(m, beta)
        except (SctraceError, ArithmeticError) as exc:
            failures += 1
            _warn(f"method={m}: {type(exc).__name__}: {exc}")
            rows.append({"method": m, "status": "failed"})
            continue
        row = _point_row(p)
        row["rel_f"] = (p.f - ref.f) / abs(ref.f) if ref.f else math.nan
        row["rel_u"] = (p.u - ref.u) / abs(ref.u) if ref.u else math.nan
        rows.append(row)
    _write_csv(out or config.output, COMPARE_COLUMNS, rows)
    return failures


def _build_parser():
    ap = argparse.ArgumentParser(prog="sctrace", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version",
                    version=f"sctrace {__version__} (csv schema {CSV_SCHEMA_VERSION})")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="CSV destination; '-' or omitted uses config.output/stdout")

    common(sub.add_parser("sweep", help="thermodynamics over a temperature grid"))
    p = sub.add_parser("orbits", help="stationary orbits at one beta")
    common(p)
    p.add_argument("--beta", type=float, required=True)
    p = sub.add_parser("spectrum", help="lowest energy levels")
    common(p)
    p.add_argument("--levels", type=int, required=True)
    p = sub.add_parser("compare", help="all methods at one beta against the exact result")
    common(p)
    p.add_argument("--beta", type=float, required=True)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            config = parse_config(fh.read())
        if getattr(args, "beta", 1.0) <= 0:
            raise ConfigError("must be positive", "--beta")
        if getattr(args, "levels", 1) < 1:
            raise ConfigError("must be >= 1", "--levels")
    except OSError as exc:
        _warn(f"cannot read config: {exc}")
        return EXIT_CONFIG
    except ConfigError as exc:
        _warn(f"config error: {exc}")
        return EXIT_CONFIG
    try:
        if args.command == "sweep":
            failures = run_sweep(config, args.out)
        elif args.command == "orbits":
            failures = run_orbits(config, args.beta, args.out)
        elif args.command == "spectrum":
            failures = run_spectrum(config, args.levels, args.out)
        else:
            failures = run_compare(config, args.beta, args.out)
    except ConfigError as exc:
        _warn(f"config error: {exc}")
        return EXIT_CONFIG
    except (SctraceError, ArithmeticError) as exc:
        _warn(f"numerical failure: {type(exc).__name__}: {exc}")
        return EXIT_NUMERICAL
    if failures:
        _warn(f"{failures} cell(s) failed")
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
