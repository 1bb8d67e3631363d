"""Command-line front end.

Subcommands::

    fuzzcalc eval   problem.json --x X          cut table of the output
    fuzzcalc derive problem.json --x X          derivative cuts + verdict
    fuzzcalc solve  problem.json                stationary points + checks
    fuzzcalc plot   problem.json --what f|f1p|f2p   plot-ready CSV

The problem file is JSON::

    {"objective": "X*X - 4*X",
     "family": {"kind": "triangular_offset", "l": 1, "r": 1},
     "domain": [1, 5],
     "grid": 101,
     "config": {"root_tol": 1e-10}}

``grid`` and ``config`` are optional; unknown keys anywhere are
rejected.  Level-count precedence: ``--levels`` flag, then the file's
``grid``, then the ``FUZZCALC_LEVELS`` environment variable, then 101.

Results go to stdout (CSV by default, ``--json`` for JSON); all
diagnostics go to stderr.  Exit codes: 0 success; 1 unreadable file,
malformed JSON or expression, schema or level errors; 2 evaluation
errors; 3 negative derivative verdict under ``--strict``; 4 no
stationary point under ``--require-solution``; 5 unwritable ``--out``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from .calculus import (
    derivative,
    eval_fuzzy,
    second_derivative,
)
from .core import DEFAULT_LEVELS, default_grid
from .errors import (
    EvaluationError,
    FuzzyCalcError,
    InvalidParameterError,
    NotDifferentiableError,
    UnsupportedFamilyError,
)
from .expr import ParseError, parse
from .family import family_from_dict
from .optimize import Problem, SolverConfig, solve

__all__ = ["main"]

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_EVAL = 2
EXIT_VERDICT = 3
EXIT_NO_SOLUTION = 4
EXIT_OUT = 5

ENV_LEVELS = "FUZZCALC_LEVELS"

_TOP_KEYS = {"objective", "family", "domain", "grid", "config"}
_CONFIG_KEYS = {"x_scan_points", "root_tol", "dominance_tol"}


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fail(code: int, message: str) -> "_CliError":
    return _CliError(code, message)


# ---------------------------------------------------------------------------
# problem loading
# ---------------------------------------------------------------------------


def _resolve_levels(flag_levels, file_grid) -> int:
    if flag_levels is not None:
        n = flag_levels
    elif file_grid is not None:
        n = file_grid
    elif os.environ.get(ENV_LEVELS):
        raw = os.environ[ENV_LEVELS]
        try:
            n = int(raw)
        except ValueError:
            raise _fail(
                EXIT_PARSE, f"{ENV_LEVELS} must be an integer, got {raw!r}"
            )
    else:
        n = DEFAULT_LEVELS
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise _fail(
            EXIT_PARSE, f"level count must be an integer >= 2, got {n!r}"
        )
    return n


def _load_problem(path: str, flag_levels) -> Problem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _fail(EXIT_PARSE, f"cannot read problem file {path}: {exc}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _fail(
            EXIT_PARSE, f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}"
        )
    if not isinstance(data, dict):
        raise _fail(EXIT_PARSE, f"{path}: problem file must be a JSON object")

    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise _fail(
            EXIT_PARSE,
            f"{path}: unknown keys {sorted(unknown)}; allowed: {sorted(_TOP_KEYS)}",
        )
    for key in ("objective", "family", "domain"):
        if key not in data:
            raise _fail(EXIT_PARSE, f"{path}: missing required key {key!r}")

    if not isinstance(data["objective"], str):
        raise _fail(EXIT_PARSE, f"{path}: objective must be a string")
    if not isinstance(data["family"], dict):
        raise _fail(EXIT_PARSE, f"{path}: family must be an object")
    domain = data["domain"]
    if (not isinstance(domain, list) or len(domain) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                       for v in domain)):
        raise _fail(EXIT_PARSE, f"{path}: domain must be [lo, hi] numbers")

    file_grid = data.get("grid")
    if file_grid is not None and (not isinstance(file_grid, int)
                                  or isinstance(file_grid, bool)):
        raise _fail(EXIT_PARSE, f"{path}: grid must be an integer level count")
    levels = _resolve_levels(flag_levels, file_grid)
    grid = default_grid(levels)

    cfg_data = data.get("config", {})
    if not isinstance(cfg_data, dict):
        raise _fail(EXIT_PARSE, f"{path}: config must be an object")
    unknown = set(cfg_data) - _CONFIG_KEYS
    if unknown:
        raise _fail(
            EXIT_PARSE,
            f"{path}: unknown config keys {sorted(unknown)}; "
            f"allowed: {sorted(_CONFIG_KEYS)}",
        )

    try:
        objective = parse(data["objective"], grid=grid)
    except ParseError as exc:
        detail = exc.caret_diagram() if exc.span is not None else str(exc)
        raise _fail(EXIT_PARSE, f"{path}: bad objective: {exc}\n{detail}")
    try:
        fam = family_from_dict(data["family"])
    except (InvalidParameterError, UnsupportedFamilyError) as exc:
        raise _fail(EXIT_PARSE, f"{path}: bad family: {exc}")
    try:
        config = SolverConfig(**cfg_data)
        return Problem(objective=objective, fam=fam, domain=tuple(domain),
                       grid=grid, config=config)
    except (InvalidParameterError, TypeError) as exc:
        raise _fail(EXIT_PARSE, f"{path}: bad problem: {exc}")


# ---------------------------------------------------------------------------
# emission helpers
# ---------------------------------------------------------------------------


def _csv_table(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([
            repr(float(v)) if isinstance(v, (float, np.floating)) else v
            for v in row
        ])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(payload: str, out_path) -> None:
    if out_path is None:
        sys.stdout.write(payload)
        return
    try:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
    except OSError as exc:
        raise _fail(EXIT_OUT, f"cannot write {out_path}: {exc}")


def _diag(message: str) -> None:
    print(message, file=sys.stderr)


def _need_x(args) -> float:
    if args.x is None:
        raise _fail(EXIT_PARSE, "--x is required for this command")
    return float(args.x)


def _event_lines(verdict):
    for ev in verdict.events:
        yield (
            f"  {ev.kind}: node {ev.node_id} {ev.side}-endpoint "
            f"alpha={ev.alpha:.10g} value={ev.value:.10g} "
            f"gap={ev.gap:.4g} (order {ev.gap_order}) {ev.detail}"
        )


def _verdict_dict(verdict) -> dict:
    return {
        "status": verdict.status.value,
        "events": [
            {
                "kind": ev.kind,
                "node_id": ev.node_id,
                "side": ev.side,
                "alpha": ev.alpha,
                "value": ev.value,
                "gap": ev.gap,
                "gap_order": ev.gap_order,
                "detail": ev.detail,
            }
            for ev in verdict.events
        ],
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_eval(args) -> int:
    p = _load_problem(args.problem, args.levels)
    x = _need_x(args)
    try:
        value = eval_fuzzy(p.objective, p.fam, x, p.grid)
    except EvaluationError as exc:
        _diag(f"evaluation failed: {exc}" + (
            f" (span {exc.span.start}:{exc.span.end})" if exc.span else ""
        ))
        return EXIT_EVAL
    if args.json:
        payload = _json_text({
            "x": x,
            "levels": value.levels.tolist(),
            "cuts": value.cuts.tolist(),
        })
    else:
        payload = _csv_table(
            ("alpha", "lower", "upper"),
            zip(value.levels, value.lo, value.hi),
        )
    _emit(payload, args.out)
    return EXIT_OK


def _cmd_derive(args) -> int:
    p = _load_problem(args.problem, args.levels)
    x = _need_x(args)
    fn = derivative if args.order == 1 else second_derivative
    try:
        result = fn(p.objective, p.fam, x, p.grid, domain=p.domain_pair())
    except NotDifferentiableError as exc:
        _diag(f"not differentiable: {exc}")
        if exc.result is not None:
            for line in _event_lines(exc.result.verdict):
                _diag(line)
        return EXIT_VERDICT if args.strict else EXIT_OK
    except EvaluationError as exc:
        _diag(f"evaluation failed: {exc}")
        return EXIT_EVAL

    verdict = result.verdict
    if args.json:
        payload = _json_text({
            "x": x,
            "order": result.order,
            "verdict": _verdict_dict(verdict),
            "levels": result.levels.tolist(),
            "cuts_raw": result.cuts_raw.tolist(),
            "fuzzy": result.fuzzy.to_dict() if result.fuzzy is not None else None,
            "fd_max_rel": result.fd.max_rel if result.fd is not None else None,
        })
    else:
        assembled_lo = np.minimum(result.raw_lo, result.raw_hi)
        assembled_hi = np.maximum(result.raw_lo, result.raw_hi)
        payload = _csv_table(
            ("alpha", "lower_raw", "upper_raw", "cut_lower", "cut_upper"),
            zip(result.levels, result.raw_lo, result.raw_hi,
                assembled_lo, assembled_hi),
        )
        _diag(f"verdict: {verdict.summary()}")
        if not verdict.ok:
            for line in _event_lines(verdict):
                _diag(line)
    _emit(payload, args.out)
    if not verdict.ok and args.strict:
        return EXIT_VERDICT
    return EXIT_OK


def _cmd_solve(args) -> int:
    p = _load_problem(args.problem, args.levels)
    try:
        report = solve(p)
    except EvaluationError as exc:
        _diag(f"evaluation failed: {exc}")
        return EXIT_EVAL
    for msg in report.warnings:
        _diag(f"warning: {msg}")
    if args.json:
        payload = _json_text(report.to_dict())
    else:
        rows = []
        for s, suff, brute in zip(report.stationary, report.sufficiency,
                                  report.brute_check):
            rows.append((
                s.x_star, s.witness.endpoint, s.witness.alpha,
                s.witness.residual, suff.verdict.value,
                "" if suff.min_lower_d2 is None else suff.min_lower_d2,
                brute.passed,
                "" if brute.counterexample is None else brute.counterexample,
            ))
        payload = _csv_table(
            ("x_star", "witness_endpoint", "witness_alpha", "witness_residual",
             "sufficiency", "min_lower_d2", "brute_passed", "counterexample"),
            rows,
        )
    _emit(payload, args.out)
    if args.require_solution and not report.stationary:
        _diag("no stationary point found")
        return EXIT_NO_SOLUTION
    return EXIT_OK


def _cmd_plot(args) -> int:
    p = _load_problem(args.problem, args.levels)
    if args.json:
        raise _fail(EXIT_PARSE, "plot emits CSV only; --json is not supported")
    if args.what == "f":
        x = _need_x(args)
        try:
            value = eval_fuzzy(p.objective, p.fam, x, p.grid)
        except EvaluationError as exc:
            _diag(f"evaluation failed: {exc}")
            return EXIT_EVAL
        points = [
            (v, a) for v, a in zip(value.lo, value.levels)
        ] + [
            (v, a) for v, a in zip(value.hi[::-1], value.levels[::-1])
        ]
        payload = _csv_table(("value", "membership"), points)
    else:
        from . import calculus

        xs = np.linspace(p.domain.lo, p.domain.hi, 201)
        try:
            jets, _, _ = calculus._batch_jets(p.objective, p.fam, xs, p.grid)
        except EvaluationError as exc:
            _diag(f"evaluation failed: {exc}")
            return EXIT_EVAL
        surface = jets[1] if args.what == "f1p" else jets[4]
        rows = (
            (xs[i], p.grid.levels[j], surface[i, j])
            for i in range(surface.shape[0])
            for j in range(surface.shape[1])
        )
        payload = _csv_table(("x", "alpha", "value"), rows)
    _emit(payload, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuzzcalc",
        description="Fuzzy-variable calculus and optimization toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("problem", help="path to a JSON problem file")
        sp.add_argument("--levels", type=int, default=None,
                        help="override the membership-level count (>= 2)")
        sp.add_argument("--json", action="store_true",
                        help="emit JSON instead of CSV")
        sp.add_argument("--out", default=None,
                        help="write results to this file instead of stdout")

    sp = sub.add_parser("eval", help="evaluate the objective at a crisp x")
    common(sp)
    sp.add_argument("--x", type=float, default=None, help="crisp input")
    sp.set_defaults(func=_cmd_eval)

    sp = sub.add_parser("derive", help="differentiate the objective at x")
    common(sp)
    sp.add_argument("--x", type=float, default=None, help="crisp input")
    sp.add_argument("--order", type=int, choices=(1, 2), default=1)
    sp.add_argument("--strict", action="store_true",
                    help="exit 3 when the verdict is negative")
    sp.set_defaults(func=_cmd_derive)

    sp = sub.add_parser("solve", help="stationary points with checks")
    common(sp)
    sp.add_argument("--require-solution", action="store_true",
                    help="exit 4 when no stationary point is found")
    sp.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("plot", help="plot-ready CSV series")
    common(sp)
    sp.add_argument("--x", type=float, default=None,
                    help="crisp input (required for --what f)")
    sp.add_argument("--what", choices=("f", "f1p", "f2p"), default="f",
                    help="membership polyline (f) or level-function surface")
    sp.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        _diag(str(exc))
        return exc.code
    except FuzzyCalcError as exc:
        _diag(f"error: {exc}")
        return EXIT_EVAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
