"""Command-line front end.

Each subcommand writes a table (CSV or JSON) or a JSON report to stdout or
``--out``.  Output is fully determined by the flags, so reruns are
byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .critical import DEFAULT_EPS, DEFAULT_N, level_curve
from .mc import X_RULES, MCConfig, validate
from .phase import CITED_BOUNDS, boundary_peak, pt_boundary
from .rivdist import (
    Triplet,
    convergence_estimate,
    left_riv_cdf,
    left_riv_cdf_asym,
    left_riv_logpdf,
    left_riv_logpdf_asym,
    left_support,
    right_riv_cdf,
    right_riv_cdf_asym,
    right_riv_logpdf,
    right_riv_logpdf_asym,
)
from .specfun import ConvergenceError, DomainError

SEED_ENV = "RIV_LAB_SEED"


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# formatting


def _num(x):
    """Value as it appears in output: 12 significant digits, None for non-finite."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return float("%.12g" % x)
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    return x


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "%.12g" % x if math.isfinite(x) else repr(x)
    return str(x)


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def render_json(obj) -> str:
    return json.dumps(_num(obj), sort_keys=True, indent=2) + "\n"


def _table(args, command, config, columns, rows) -> str:
    if args.format == "csv":
        return render_csv(columns, rows)
    return render_json({
        "version": __version__,
        "command": command,
        "config": config,
        "columns": list(columns),
        "rows": [{c: r[c] for c in columns} for r in rows],
    })


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# argument parsing


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:count`` (linear) or ``start:stop:count:log`` (geometric)."""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise UsageError(f"grid must be start:stop:count[:log], got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}") from exc
    if count < 1:
        raise UsageError("grid count must be >= 1")
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise UsageError("grid ends must be finite")
    if len(parts) == 4:
        if parts[3] != "log":
            raise UsageError(f"unknown grid spacing {parts[3]!r}")
        if start <= 0 or stop <= 0:
            raise UsageError("log grid needs positive ends")
        return np.geomspace(start, stop, count)
    return np.linspace(start, stop, count)


def _prob(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("must lie in (0, 1)")
    return v


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _triplet(text: str) -> Triplet:
    try:
        return Triplet.parse(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rivlab",
        description="Distributions of restricted-isometry random variables and derived curves.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("dist", help="PDF/CDF of the left or right RIV on a grid")
    p.add_argument("--triplet", type=_triplet, required=True, help="K,M,N")
    p.add_argument("--which", choices=("left", "right"), default="left")
    p.add_argument("--form", choices=("exact", "asymptotic"), default="exact")
    p.add_argument("--grid", help="start:stop:count (default 0:1:201 left, 0:2:201 right)")
    common(p)

    p = sub.add_parser("support", help="effective support of the limiting left RIV over delta")
    fixed = p.add_mutually_exclusive_group(required=True)
    fixed.add_argument("--m", type=_pos_int, help="hold the number of measurements fixed")
    fixed.add_argument("--n", type=_pos_int, help="hold the ambient dimension fixed")
    p.add_argument("--rho", type=_positive, required=True)
    p.add_argument("--grid", default="0.05:0.5:10", help="delta grid start:stop:count[:log]")
    p.add_argument("--eps", type=_prob, default=DEFAULT_EPS)
    common(p)

    p = sub.add_parser("critical", help="level curve of the left critical function")
    p.add_argument("--level", type=_prob, required=True)
    p.add_argument("--n", type=_positive, default=DEFAULT_N)
    p.add_argument("--eps", type=_prob, default=DEFAULT_EPS)
    p.add_argument("--grid", default="0.01:1:100:log")
    common(p)

    p = sub.add_parser("phase", help="recovery boundaries and measurement bounds")
    p.add_argument("--methods", default="riv,gfa")
    p.add_argument("--n", type=_positive, default=DEFAULT_N)
    p.add_argument("--eps", type=_prob, default=DEFAULT_EPS)
    p.add_argument("--grid", default="0.01:1:100:log")
    p.add_argument("--out", help="directory for boundary CSVs and summary.json (default: summary to stdout)")

    p = sub.add_parser("validate", help="Monte Carlo validation report (JSON)")
    p.add_argument("--triplet", type=_triplet, required=True)
    p.add_argument("--trials", type=_pos_int, default=10_000)
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    p.add_argument("--x-rule", choices=X_RULES, default="equal-entries")
    p.add_argument("--sigma2", type=_positive, default=None)
    common(p, fmt=False)
    return parser


# ---------------------------------------------------------------------------
# subcommands


_DIST = {
    ("left", "exact"): (left_riv_cdf, left_riv_logpdf),
    ("left", "asymptotic"): (left_riv_cdf_asym, left_riv_logpdf_asym),
    ("right", "exact"): (right_riv_cdf, right_riv_logpdf),
    ("right", "asymptotic"): (right_riv_cdf_asym, right_riv_logpdf_asym),
}


def cmd_dist(args) -> int:
    t = args.triplet
    grid = parse_grid(args.grid or ("0:1:201" if args.which == "left" else "0:2:201"))
    cdf, logpdf = _DIST[(args.which, args.form)]
    F = np.atleast_1d(cdf(t, grid))
    lp = np.atleast_1d(logpdf(t, grid))
    x = "u" if args.which == "left" else "v"
    rows = [{x: g, "pdf": math.exp(l), "cdf": f, "log_pdf": l} for g, f, l in zip(grid, F, lp)]
    config = {"triplet": [t.K, t.M, t.N], "which": args.which, "form": args.form,
              "grid": args.grid, "convergence_estimate": convergence_estimate(t)}
    _emit(_table(args, "dist", config, [x, "pdf", "cdf", "log_pdf"], rows), args.out)
    return 0


def cmd_support(args) -> int:
    grid = parse_grid(args.grid)
    rows = []
    for delta in grid:
        row = {"delta": delta, "rho": args.rho, "K": None, "M": None, "N": None,
               "lesp": None, "uesp": None, "width": None, "status": "ok"}
        try:
            if not 0.0 < delta <= 1.0:
                raise DomainError("delta outside (0, 1]")
            if args.m is not None:
                M = args.m
                N = int(round(M / delta))
            else:
                N = args.n
                M = int(round(delta * N))
            K = int(round(args.rho * M))
            t = Triplet(K, M, N)
            lo, hi = left_support(t, args.eps)
            row.update(K=K, M=M, N=N, lesp=lo, uesp=hi, width=hi - lo)
        except DomainError:
            row["status"] = "invalid"
        rows.append(row)
    config = {"fixed": "M" if args.m is not None else "N", "m": args.m, "n": args.n,
              "rho": args.rho, "eps": args.eps, "grid": args.grid}
    cols = ["delta", "rho", "K", "M", "N", "lesp", "uesp", "width", "status"]
    _emit(_table(args, "support", config, cols, rows), args.out)
    return 0


def cmd_critical(args) -> int:
    grid = parse_grid(args.grid)
    curve = level_curve(args.level, args.n, args.eps, grid)
    found = {d: (r, res) for (d, r), res in zip(curve.points, curve.residuals)}
    rows = []
    for delta in grid:
        delta = float(delta)
        if delta in found:
            rho, res = found[delta]
            rows.append({"delta": delta, "rho": rho, "residual": res, "status": "ok"})
        else:
            rows.append({"delta": delta, "rho": None, "residual": None, "status": "no-root"})
    config = {"level": args.level, "n": args.n, "eps": args.eps, "grid": args.grid}
    _emit(_table(args, "critical", config, ["delta", "rho", "residual", "status"], rows), args.out)
    return 0


def cmd_phase(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods or any(m not in ("riv", "gfa") for m in methods):
        raise UsageError("--methods must be a comma list drawn from riv, gfa")
    grid = parse_grid(args.grid)
    out_dir = Path(args.out) if args.out else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)

    bounds = {}
    for m in methods:
        b = pt_boundary(m, args.n, args.eps, grid)
        if len(b.curve) == 0:
            raise UsageError(f"no {m} boundary points on this grid")
        delta_star, rho_star = boundary_peak(b)
        bounds[f"c_{m}"] = {"value": 1.0 / rho_star, "provenance": "computed",
                            "argmax_delta": delta_star, "max_rho": rho_star}
        if out_dir is not None:
            found = dict(zip(b.curve.deltas.tolist(), zip(b.curve.values, b.curve.residuals)))
            rows = []
            for delta in grid:
                rho, res = found.get(float(delta), (None, None))
                rows.append({"delta": delta, "rho": rho, "residual": res,
                             "status": "ok" if rho is not None else "no-root"})
            _emit(render_csv(["delta", "rho", "residual", "status"], rows),
                  out_dir / f"boundary_{m}.csv")
    for name, entry in CITED_BOUNDS.items():
        bounds[name] = dict(entry)
    if "c_riv" in bounds:
        bounds["ev_over_riv"] = {"value": CITED_BOUNDS["ev"]["value"] / bounds["c_riv"]["value"],
                                 "provenance": "computed"}
    summary = {
        "version": __version__,
        "command": "phase",
        "config": {"methods": methods, "n": args.n, "eps": args.eps, "grid": args.grid},
        "bounds": bounds,
    }
    text = render_json(summary)
    _emit(text, None if out_dir is None else out_dir / "summary.json")
    return 0


def cmd_validate(args) -> int:
    seed = _default_seed() if args.seed is None else args.seed
    cfg = MCConfig(args.triplet, args.trials, seed=seed, sigma2=args.sigma2, x_rule=args.x_rule)
    report = validate(cfg)
    t = cfg.triplet
    doc = {
        "version": __version__,
        "command": "validate",
        "config": {"triplet": [t.K, t.M, t.N], "trials": cfg.trials, "seed": cfg.seed,
                   "sigma2": cfg.sigma2, "x_rule": cfg.x_rule},
        "report": report.to_dict(),
        "deterministic_ok": report.deterministic_ok,
    }
    _emit(render_json(doc), args.out)
    return 0 if report.deterministic_ok else 1


_COMMANDS = {
    "dist": cmd_dist,
    "support": cmd_support,
    "critical": cmd_critical,
    "phase": cmd_phase,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return _COMMANDS[args.command](args)
    except (DomainError, UsageError, ConvergenceError) as exc:
        print(f"rivlab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"rivlab {args.command}: I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
