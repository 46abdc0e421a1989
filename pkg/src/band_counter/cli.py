"""Command-line front end: ``band-counter <subcommand> [flags]``.

Exit status is 0 on success, 1 when a solve fails and 2 on usage errors.
Tables go to stdout (or ``--out-dir``); JSON summaries go to stderr (or
``--out-dir``).
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Sequence

from . import records
from .annulus import count_annulus, crossover_from_count
from .core_types import SCHEMA_VERSION, DEFAULT_CONFIG, Annulus, Grid, SolverConfig, Strip, Variant, make_fiber_problem
from .halfline import splitting_sweep
from .oracle import oracle_sweep
from .predictions import FormulaId, predict, r_tilde_sq
from .scan import default_jobs, scan_fibers
from .strip import count_strip
from .svg import Plot
from .tridiag import discretize, relative_eigenvalue

_NEG_VALUE = re.compile(r"^-[\d.]")


class UsageError(Exception):
    pass


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return v


def _ratios(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from exc


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", choices=("csv", "json"), default="csv", help="table format")
    p.add_argument("--out-dir", type=Path, help="write files here instead of stdout/stderr")
    p.add_argument("--plot", type=Path, help="SVG file for a diagnostic plot")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
    p.add_argument("--jobs", type=_positive_int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--resolution", type=_positive, default=DEFAULT_CONFIG.resolution, help="grid points per sqrt(h)")
    p.add_argument("--truncation", type=_positive, default=DEFAULT_CONFIG.truncation, help="cut-off in units of sqrt(h)")
    p.add_argument("--tol", type=_positive, default=DEFAULT_CONFIG.rtol, help="relative bisection tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="band-counter", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("strip-count", help="count strip fibers below h")
    p.add_argument("--L", type=_positive, default=1.0)
    p.add_argument("--h", type=_positive, required=True)
    p.add_argument("--bc", choices=("dn", "nd", "nn"), default="dn")
    _common(p)

    p = sub.add_parser("annulus-count", help="count annulus fibers below h")
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--h", type=_positive, required=True)
    p.add_argument("--bc", choices=("dn", "nn"), default="dn")
    _common(p)

    p = sub.add_parser("band-scan", help="lambda_0 and lambda_1 against m")
    p.add_argument("--geometry", choices=("strip", "annulus"), required=True)
    p.add_argument("--L", type=_positive, default=1.0)
    p.add_argument("--R", type=float, default=0.5)
    p.add_argument("--h", type=_positive, required=True)
    p.add_argument("--bc", choices=("dn", "nn"), default="dn")
    _common(p)

    p = sub.add_parser("halfline-sweep", help="half-line splittings along xi/sqrt(h)")
    p.add_argument("--kind", choices=("neu", "dir"), required=True)
    p.add_argument("--ratios", type=_ratios, required=True)
    p.add_argument("--h", type=_positive, default=1.0)
    _common(p)

    p = sub.add_parser("convergence", help="grid-refinement study of lambda_0")
    p.add_argument("--geometry", choices=("strip", "annulus"), required=True)
    p.add_argument("--L", type=_positive, default=1.0)
    p.add_argument("--R", type=float, default=0.5)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--h", type=_positive, required=True)
    p.add_argument("--bc", choices=("dn", "nn"), default="dn")
    p.add_argument("--levels", type=_positive_int, default=4)
    p.add_argument("--scheme", choices=("fitted", "standard"), default="fitted")
    _common(p)

    p = sub.add_parser("oracle-check", help="Sturm counts against Pruefer shooting")
    p.add_argument("--count", type=_positive_int, default=100)
    _common(p)

    p = sub.add_parser("predict", help="closed-form leading terms")
    p.add_argument("--formula", choices=[f.value for f in FormulaId], required=True)
    p.add_argument("--L", type=_positive, default=1.0)
    p.add_argument("--R", type=float, default=0.5)
    p.add_argument("--h", type=_positive, required=True)
    p.add_argument("--xi", type=float)
    _common(p)
    return parser


def _config(args) -> SolverConfig:
    res = args.resolution
    return replace(
        DEFAULT_CONFIG,
        resolution=res,
        min_resolution=min(DEFAULT_CONFIG.min_resolution, res),
        truncation=args.truncation,
        rtol=args.tol,
    )


def _jobs(args) -> int:
    return default_jobs() if args.jobs is None else args.jobs


def _emit(args, name: str, columns, rows, summary: dict[str, Any], json_body: dict[str, Any] | None = None) -> None:
    summary = {"schema_version": SCHEMA_VERSION, **summary}
    if args.out == "csv":
        body = records.write_table(columns, rows)
        suffix = ".csv"
    else:
        payload = json_body or {"columns": list(columns), "rows": [list(r) for r in rows]}
        body = json.dumps({"schema_version": SCHEMA_VERSION, **payload}, sort_keys=True) + "\n"
        suffix = ".json"
    summary_text = records.dumps(summary) + "\n"
    if args.out_dir is not None:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        (args.out_dir / f"{name}{suffix}").write_text(body, encoding="utf-8", newline="\n")
        (args.out_dir / f"{name}.summary.json").write_text(summary_text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(body)
        sys.stderr.write(summary_text)


def _write_plot(path: Path, plot: Plot) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(plot.render(), encoding="utf-8", newline="\n")


def _band_plot(xs, ys, xlabel: str, title: str, vline: float | None = None) -> Plot:
    ylim = (0.0, max(3.0, 1.1))
    plot = Plot((min(xs), max(xs)), ylim, title=title, xlabel=xlabel, ylabel="lambda0 / h")
    plot.polyline(xs, ys)
    plot.markers(xs, ys)
    plot.hline(1.0)
    if vline is not None:
        plot.vline(vline)
    return plot


def _count_output(args, name: str, result, xscale) -> None:
    amb = set(result.ambiguous_m)
    rows = []
    for m in sorted(result.ground_values):
        lam = result.ground_values[m]
        rows.append((m, lam, lam / result.h, result.below[m], m in amb, result.shifts[m], result.excited_values[m]))
    summary = records.count_summary(result)
    _emit(args, name, records.COUNT_COLUMNS, rows, summary, result.to_record())
    if args.plot is not None:
        xs = [xscale(m) for m in sorted(result.ground_values)]
        ys = [r[2] for r in rows]
        vline = r_tilde_sq(result.geometry.R) if isinstance(result.geometry, Annulus) else None
        xlabel = "2 m h" if vline is not None else "m h"
        _write_plot(args.plot, _band_plot(xs, ys, xlabel, f"{name}, h = {result.h:g}", vline))


def cmd_strip_count(args) -> int:
    variant = Variant.PURE_NN if args.bc == "nn" else Variant.MIXED_DN
    result = count_strip(args.L, args.h, variant, args.tol, _config(args), _jobs(args), reverse=args.bc == "nd")
    _count_output(args, "strip_count", result, lambda m: m * args.h)
    return 0


def cmd_annulus_count(args) -> int:
    if not 0 < args.R < 1:
        raise UsageError("--R must lie in (0, 1)")
    variant = Variant.PURE_NN if args.bc == "nn" else Variant.MIXED_DN
    result = count_annulus(args.R, args.h, args.tol, _config(args), _jobs(args), variant)
    _count_output(args, "annulus_count", result, lambda m: 2 * m * args.h)
    if variant is Variant.MIXED_DN and any(result.below.values()):
        sys.stderr.write(records.dumps({"crossover_m": crossover_from_count(result)}) + "\n")
    return 0


def cmd_band_scan(args) -> int:
    from .predictions import AnnulusPrediction, strip_rough_momenta

    variant = Variant.PURE_NN if args.bc == "nn" else Variant.MIXED_DN
    if args.geometry == "strip":
        geometry, momenta = Strip(args.L), strip_rough_momenta(args.L, args.h)
    else:
        if not 0 < args.R < 1:
            raise UsageError("--R must lie in (0, 1)")
        geometry, momenta = Annulus(args.R), AnnulusPrediction(args.R).momenta(args.h)
    recs = scan_fibers(geometry, momenta, args.h, variant, _config(args), _jobs(args))
    columns = ("m", "lambda0", "lambda1", "shift0", "shift1", "err0", "err1")
    rows = [(m, r.lambda0, r.lambda1, r.shift0, r.shift1, r.err0, r.err1) for m, r in recs.items()]
    _emit(args, "band_scan", columns, rows, {"geometry": args.geometry, "h": args.h, "fibers": len(rows)})
    if args.plot is not None:
        scale = (lambda m: m * args.h) if args.geometry == "strip" else (lambda m: 2 * m * args.h)
        xs = [scale(m) for m in recs]
        plot = _band_plot(xs, [r.lambda0 / args.h for r in recs.values()], "m h", f"bands, h = {args.h:g}")
        plot.polyline(xs, [r.lambda1 / args.h for r in recs.values()], color="#ff7f0e")
        _write_plot(args.plot, plot)
    return 0


def cmd_halfline_sweep(args) -> int:
    if any(r > -2 for r in args.ratios):
        raise UsageError("--ratios must all be <= -2")
    table = splitting_sweep(args.kind, args.ratios, args.h, _config(args))
    columns = ("ratio", "mu0", "splitting", "predicted", "rel_error")
    rows = [(q, r.mu0, r.splitting, r.predicted_splitting, r.relative_error) for q, r in zip(args.ratios, table)]
    _emit(args, "halfline_sweep", columns, rows, {"kind": args.kind, "h": args.h, "rows": len(rows)})
    return 0


def cmd_convergence(args) -> int:
    variant = Variant.PURE_NN if args.bc == "nn" else Variant.MIXED_DN
    geometry = Strip(args.L) if args.geometry == "strip" else Annulus(args.R)
    config = _config(args)
    problem = make_fiber_problem(geometry, args.m, args.h, variant)
    grid = Grid.for_problem(problem, config)
    rows = []
    prev = prev_diff = None
    for _ in range(max(args.levels, 2)):
        op = discretize(problem, grid, config, args.scheme)
        value = relative_eigenvalue(op, 0, config.rtol)
        diff = None if prev is None else value - prev
        ratio = None if diff in (None, 0.0) or prev_diff is None else prev_diff / diff
        rows.append((grid.n, grid.spacing, value, "" if diff is None else diff, "" if ratio is None else ratio))
        prev, prev_diff = value, diff
        grid = grid.refined()
    _emit(args, "convergence", ("n", "spacing", "value", "difference", "ratio"), rows, {"scheme": args.scheme})
    return 0


def cmd_oracle_check(args) -> int:
    cases = oracle_sweep(args.count, args.seed, _config(args))
    columns = ("index", "geometry", "param", "h", "m", "bc", "threshold", "sturm", "shoot", "ambiguous", "agree")
    rows = []
    for c in cases:
        p = c.problem
        geom = "annulus" if p.weight.value == "Radial" else "strip"
        param = p.interval[0] if geom == "annulus" else p.interval[1]
        rows.append((c.index, geom, param, p.h, int(p.m), p.bc.code, c.threshold, c.sturm, c.shoot, c.ambiguous, c.agree))
    failures = sum(1 for c in cases if not c.agree and not c.ambiguous)
    summary = {"cases": len(cases), "ambiguous": sum(c.ambiguous for c in cases), "failures": failures, "seed": args.seed}
    _emit(args, "oracle_check", columns, rows, summary)
    return 0 if failures == 0 else 1


def cmd_predict(args) -> int:
    fid = FormulaId(args.formula)
    if fid in (FormulaId.ANNULUS_DN, FormulaId.ANNULUS_NN):
        if not 0 < args.R < 1:
            raise UsageError("--R must lie in (0, 1)")
        geometry = Annulus(args.R)
    else:
        geometry = Strip(args.L)
    if fid in (FormulaId.HALFLINE_NEU_SPLIT, FormulaId.HALFLINE_DIR_SPLIT) and (args.xi is None or args.xi >= 0):
        raise UsageError("--xi must be given and negative for splitting laws")
    rep = predict(fid, geometry, args.h, args.xi)
    summary = {
        "formula_id": rep.formula_id.value,
        "h": rep.h,
        "predicted": rep.predicted_count,
        "window": list(rep.window),
        "transition": rep.transition,
    }
    columns = ("formula_id", "h", "predicted", "window_lo", "window_hi")
    _emit(args, "predict", columns, [(fid.value, rep.h, rep.predicted_count, rep.window[0], rep.window[1])], summary)
    return 0


COMMANDS = {
    "strip-count": cmd_strip_count,
    "annulus-count": cmd_annulus_count,
    "band-scan": cmd_band_scan,
    "halfline-sweep": cmd_halfline_sweep,
    "convergence": cmd_convergence,
    "oracle-check": cmd_oracle_check,
    "predict": cmd_predict,
}


def _glue_negative_values(argv: Sequence[str]) -> list[str]:
    """Let ``--ratios -2.5,-3`` through: argparse would read the value as a flag."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in ("--ratios", "--xi"):
            nxt = next(it, None)
            if nxt is not None and _NEG_VALUE.match(nxt):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"band-counter {args.command}: error: {exc}\n")
        return 2
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        sys.stderr.write(f"band-counter {args.command}: solver error: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
