"""Command-line front end.

Exit codes: 0 success / scenario passed, 1 scenario failed, 2 invalid
input, 3 I/O failure, 4 numerical instability.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from . import __version__
from .core import ExperimentGeometry, PhysicalConstants, ValidationError
from .diagnostics import CLOSED_FORMS
from .pde import StabilityError
from .scenarios import SCENARIOS, run_scenario
from .svgplot import witness_svg

log = logging.getLogger("gie_lab")

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_IO, EXIT_UNSTABLE = 0, 1, 2, 3, 4
MODEL_ORDER = ("N", "NS", "NSB")


class CLIError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _fmt(v) -> str:
    v = float(v)
    if v == 0:
        v = 0.0  # no "-0"
    return f"{v:.12g}"


def workers() -> int | None:
    raw = os.environ.get("GIE_LAB_THREADS", "").strip()
    try:
        n = int(raw) if raw else 0
    except ValueError:
        n = 0
    return n if n > 0 else None


def _write(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CLIError(f"cannot write {path}: {exc}", EXIT_IO) from exc


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(c if isinstance(c, str) else _fmt(c) for c in row))
    return "\n".join(lines) + "\n"


def _resolved(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}


def _geometry(d, delta, m1, m2) -> ExperimentGeometry:
    try:
        return ExperimentGeometry(d=d, delta=delta, m1=m1, m2=m2)
    except ValidationError as exc:
        raise CLIError(str(exc), EXIT_INVALID) from exc


def _models(text: str):
    items = [s.strip().upper() for s in text.split(",") if s.strip()]
    bad = [s for s in items if s not in MODEL_ORDER]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"models must be a subset of {','.join(MODEL_ORDER)}")
    return [m for m in MODEL_ORDER if m in items]


def _provenance(command, args, consts=None) -> dict:
    out = {"tool": "gie-lab", "version": __version__, "command": command, "parameters": _resolved(args)}
    if consts is not None:
        out["constants"] = {"G": consts.G, "hbar": consts.hbar}
    return out


# -- witness ------------------------------------------------------------------


def cmd_witness(args) -> int:
    geom = _geometry(args.d, args.delta, args.m1, args.m2)
    consts = PhysicalConstants()
    if args.t_max < 0 or args.samples < 1:
        raise CLIError("t-max >= 0 and samples >= 1 required", EXIT_INVALID)
    t = np.array([0.0]) if args.t_max == 0 else np.linspace(0.0, args.t_max, args.samples)
    columns = {f"W_{m}": CLOSED_FORMS[m](geom, consts, t) for m in args.models}
    stem = Path(args.out)
    formats = ("csv", "json", "svg") if args.format == "all" else (args.format,)
    meta = _provenance("witness", args, consts)
    written = []
    if "csv" in formats:
        header = ["t"] + list(columns)
        rows = zip(t, *columns.values())
        _write(stem.with_suffix(".csv"), _csv(header, rows))
        written.append(str(stem.with_suffix(".csv")))
    if "svg" in formats:
        svg = witness_svg(t, columns, guide_t=2.0, metadata=json.dumps(meta, sort_keys=True))
        _write(stem.with_suffix(".svg"), svg)
        written.append(str(stem.with_suffix(".svg")))
    if "json" in formats:
        meta["outputs"] = written
        meta["summary"] = {name: {"min": float(v.min()), "max": float(v.max())} for name, v in columns.items()}
        _write(stem.with_suffix(".json"), _json(meta))
    return EXIT_OK


# -- sweep --------------------------------------------------------------------


def first_crossing(geom, consts, level: float, t_max: float, samples: int = 20000) -> float:
    """First t in (0, t_max] where the Newton witness drops below ``level``."""
    f = CLOSED_FORMS["N"]
    t = np.linspace(0.0, t_max, samples + 1)
    w = f(geom, consts, t) - level
    below = np.nonzero(w[1:] < 0)[0]
    if below.size == 0:
        return float("nan")
    i = below[0] + 1
    if w[i - 1] <= 0:
        return float(t[i - 1])
    return float(brentq(lambda s: f(geom, consts, s) - level, t[i - 1], t[i], xtol=1e-14, rtol=1e-13))


def _sweep_row(args, consts, value):
    kw = dict(d=args.d, delta=args.delta, m1=args.m1, m2=args.m2)
    if args.var == "m":
        kw["m1"] = kw["m2"] = value
    else:
        kw[args.var] = value
    try:
        geom = ExperimentGeometry(**kw)
    except ValidationError:
        return [value, "", "invalid"]
    if args.objective == "witness":
        return [value, float(CLOSED_FORMS[args.model](geom, consts, args.t)), "ok"]
    tc = first_crossing(geom, consts, args.level, args.t_max)
    return [value, "" if np.isnan(tc) else tc, "ok" if np.isfinite(tc) else "no-crossing"]


def cmd_sweep(args) -> int:
    if args.num < 1:
        raise CLIError("sweep needs num >= 1 points", EXIT_INVALID)
    if args.spacing == "log":
        if args.start <= 0 or args.stop <= 0:
            raise CLIError("log spacing needs start > 0 and stop > 0", EXIT_INVALID)
        values = np.geomspace(args.start, args.stop, args.num)
    else:
        values = np.linspace(args.start, args.stop, args.num)
    consts = PhysicalConstants()
    with ThreadPoolExecutor(max_workers=workers()) as pool:
        rows = list(pool.map(lambda v: _sweep_row(args, consts, float(v)), values))
    name = f"W_{args.model}(t={args.t:g})" if args.objective == "witness" else f"first_crossing_W_N({args.level:g})"
    stem = Path(args.out)
    _write(stem.with_suffix(".csv"), _csv([args.var, name, "status"], rows))
    meta = _provenance("sweep", args, consts)
    meta["invalid_rows"] = sum(r[2] == "invalid" for r in rows)
    _write(stem.with_suffix(".json"), _json(meta))
    return EXIT_OK


# -- pde-verify ---------------------------------------------------------------


def cmd_pde_verify(args) -> int:
    try:
        verdict = run_scenario(args.scenario, n=args.n, dt=args.dt, steps=args.steps, g=args.g, seed=args.seed)
    except StabilityError as exc:
        raise CLIError(f"numerical instability: {exc}", EXIT_UNSTABLE) from exc
    except ValidationError as exc:
        raise CLIError(str(exc), EXIT_INVALID) from exc
    stem = Path(args.out)
    header = ["run", "t", "norm", "entropy", "X1", "X2", "energy"]
    rows = [[r["run"], r["t"], r["norm"], r["entropy"], r["X1"], r["X2"], r["energy"]] for r in verdict.rows]
    _write(stem.with_suffix(".csv"), _csv(header, rows))
    out = _provenance("pde-verify", args)
    out.update(verdict.as_dict())
    _write(stem.with_suffix(".json"), _json(out))
    print(f"{verdict.scenario}: {'PASS' if verdict.passed else 'FAIL'}")
    return EXIT_OK if verdict.passed else EXIT_FAIL


# -- config + parser ----------------------------------------------------------


def load_config(path, valid_keys) -> dict:
    """Read ``key=value`` lines; '#' starts a comment. Keys use flag names
    with either dashes or underscores."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CLIError(f"cannot read config {path}: {exc}", EXIT_IO) from exc
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CLIError(f"{path}:{lineno}: expected key=value", EXIT_INVALID)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in valid_keys:
            valid = ", ".join(sorted(k.replace("_", "-") for k in valid_keys))
            raise CLIError(f"{path}:{lineno}: unknown key '{key}' (valid keys: {valid})", EXIT_INVALID)
        if key in values:
            log.warning("%s:%d: duplicate key '%s', last value wins", path, lineno, key)
        values[key] = value
    return values


def _add_geometry(p):
    p.add_argument("--d", type=float, default=450e-6, help="separation (m)")
    p.add_argument("--delta", type=float, default=250e-6, help="superposition split (m)")
    p.add_argument("--m1", type=float, default=1e-14, help="mass 1 (kg)")
    p.add_argument("--m2", type=float, default=1e-14, help="mass 2 (kg)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gie-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="key=value file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("witness", help="witness curves W(t) for the closed-form models")
    _add_geometry(p)
    p.add_argument("--t-max", type=float, default=4.0)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--models", type=_models, default="N,NS,NSB")
    p.add_argument("--out", default="witness")
    p.add_argument("--format", choices=("csv", "json", "svg", "all"), default="all")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("sweep", help="sweep one geometry parameter")
    _add_geometry(p)
    p.add_argument("--var", choices=("d", "delta", "m"), required=True)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--num", type=int, default=21)
    p.add_argument("--spacing", choices=("lin", "log"), default="lin")
    p.add_argument("--objective", choices=("witness", "first-crossing"), default="witness")
    p.add_argument("--model", choices=MODEL_ORDER, default="N")
    p.add_argument("--t", type=float, default=1.0, help="evaluation time for the witness objective (s)")
    p.add_argument("--level", type=float, default=-0.05, help="threshold for first-crossing")
    p.add_argument("--t-max", type=float, default=10.0, help="search horizon for first-crossing (s)")
    p.add_argument("--out", default="sweep")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pde-verify", help="run a grid-solver verification scenario")
    p.add_argument("--scenario", choices=SCENARIOS, required=True)
    p.add_argument("--n", type=int, default=None, help="grid points per axis (scenario default if omitted)")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--g", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="pde-verify")
    p.set_defaults(func=cmd_pde_verify)
    return parser


def _subparser(parser, command):
    for action in parser._subparsers._group_actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s", stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_INVALID
    try:
        if args.config:
            sp = _subparser(parser, args.command)
            valid = {a.dest for a in sp._actions if a.dest not in ("help", "func")}
            sp.set_defaults(**load_config(args.config, valid))
            try:
                args = parser.parse_args(argv)
            except SystemExit as exc:
                return int(exc.code or 0) and EXIT_INVALID
        return args.func(args)
    except CLIError as exc:
        print(f"gie-lab: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
