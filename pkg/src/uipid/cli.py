"""Command-line front end.

Exit codes: 0 on success, 2 on input or validation errors, 3 on solver or
resource failures.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys

from .deltap import EPS_INT
from .distributions import load
from .errors import DistributionFormatError, InvalidShape, NegativeEntry, NotNormalized, UipidError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3

INPUT_ERRORS = (NegativeEntry, NotNormalized, InvalidShape, DistributionFormatError, OSError)


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    def d(v):
        return argparse.SUPPRESS if suppress else v

    p.add_argument("--seed", type=int, default=d(0), help="seed for restarts and sampling")
    p.add_argument("--tol-interior", type=float, default=d(EPS_INT), help="atoms above this count as interior")
    p.add_argument("--restarts", type=int, default=d(8), help="random restarts of the generic solver")
    p.add_argument("--max-iter", type=int, default=d(10000), help="Newton iteration budget")
    p.add_argument("--format", choices=("json", "csv", "text"), default=d("json"), help="output format")
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uipid", description="Unique information of a trivariate distribution.")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="minimize I(T:X|Y) over the domain and print the solver report")
    c.add_argument("file", help="distribution file (.json or .csv, '-' for stdin)")
    c.add_argument("--decompose", action="store_true", help="also print the full decomposition")
    c.add_argument("-o", "--output", help="write to this file instead of stdout")

    d = sub.add_parser("decompose", help="print unique, shared and synergistic information")
    d.add_argument("file")
    d.add_argument("-o", "--output")

    g = sub.add_parser("diagnose", help="run the non-uniqueness and support checks")
    g.add_argument("file")
    g.add_argument("-o", "--output")

    s = sub.add_parser("stats", help="interior and uniqueness statistics of uniform samples")
    s.add_argument("--shape", action="append", required=True, help="T,X,Y cardinalities; repeatable")
    s.add_argument("-n", "--samples", type=int, default=1000)
    s.add_argument("--csv", dest="csv_path", help="also write the per-shape CSV here")
    s.add_argument("--json", dest="json_path", help="also write the JSON summary here")
    s.add_argument("-o", "--output")

    v = sub.add_parser("viz223", help="polygon and projection data for a 2x2x3 distribution")
    v.add_argument("file")
    v.add_argument("-o", "--output")

    for sp in (c, d, g, s, v):
        _add_globals(sp, suppress=True)
    return parser


def _options(args):
    from .solver import SolveOptions

    return SolveOptions(restarts=args.restarts, max_iter=args.max_iter, seed=args.seed, eps_int=args.tol_interior)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    elif isinstance(obj, list):
        yield prefix, " ".join(repr(v) for v in obj)
    else:
        yield prefix, obj


def _csv_kv(obj) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in _flatten(obj):
        w.writerow([k, v])
    return buf.getvalue()


def _emit(args, obj, text: str) -> None:
    if args.format == "json":
        out = _dumps(obj)
    elif args.format == "csv":
        out = _csv_kv(obj)
    else:
        out = text
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _report_text(r) -> str:
    lines = [
        f"UI(T:X\\Y) = {r.ui_bits:.10g} bits",
        f"path: {r.path}",
        f"location: {r.location.kind} (min atom {r.location.min_atom:.3e})",
        f"uniqueness: {r.uniqueness.verdict} ({r.uniqueness.reason})",
        f"T _||_ X | Y: {r.ci_flags.t_x_given_y}   T _||_ Y | X: {r.ci_flags.t_y_given_x}",
    ]
    if r.all_binary_case is not None:
        lines.append(f"all-binary case: {r.all_binary_case}")
    return "\n".join(lines) + "\n"


def _decomp_text(d) -> str:
    return (
        f"UI(T:X\\Y) = {d.ui_x:.10g}\nUI(T:Y\\X) = {d.ui_y:.10g}\n"
        f"shared    = {d.shared:.10g}\nsynergy   = {d.synergy:.10g}\n"
        f"I(T:X) = {d.mi_tx:.10g}  I(T:Y) = {d.mi_ty:.10g}  I(T:XY) = {d.mi_txy:.10g}\n"
    )


def cmd_compute(args) -> int:
    from .solver import decompose, solve

    P = load(args.file)
    r = solve(P, _options(args))
    obj = r.to_json_obj()
    text = _report_text(r)
    if args.decompose:
        dec = decompose(P, report=r)
        obj["decomposition"] = dec.as_dict()
        text += _decomp_text(dec)
    _emit(args, obj, text)
    if args.format == "json":
        sys.stderr.write(text)
    return EXIT_OK


def cmd_decompose(args) -> int:
    from .solver import decompose, solve

    P = load(args.file)
    r = solve(P, _options(args))
    dec = decompose(P, report=r)
    obj = {**dec.as_dict(), "path": r.path, "uniqueness": r.uniqueness.verdict}
    _emit(args, obj, _decomp_text(dec))
    return EXIT_OK


def cmd_diagnose(args) -> int:
    from .diagnostics import diagnose
    from .solver import solve

    P = load(args.file)
    r = solve(P, _options(args))
    rep = diagnose(P, r)
    obj = {"path": r.path, "uiBits": r.ui_bits, "verdict": r.uniqueness.verdict, **rep.to_json_obj()}
    if r.path == "SingletonDomain":
        obj["note"] = "the domain is a single point"
    lines = [f"path: {r.path}  verdict: {r.uniqueness.verdict}"]
    for key in ("cardinalityNonUnique", "ciCardinalityNonUnique", "doubleIndependenceNonUnique",
                "blockwiseNonUnique", "innerUniquenessVeto"):
        f = obj[key]
        lines.append(f"{key}: {'RAISED' if f['raised'] else 'no'} - {f['reason']}")
    if rep.binary_t_interior_ci is not None:
        lines.append("binary-T expectation: " + "; ".join(rep.binary_t_interior_ci.statements))
    for c in rep.checks:
        lines.append(f"check {c.name}: {'pass' if c.passed else 'FAIL'} {c.detail}")
    _emit(args, obj, "\n".join(lines) + "\n")
    return EXIT_OK


def _parse_shape(s: str):
    try:
        shape = tuple(int(v) for v in s.replace("x", ",").split(","))
    except ValueError:
        raise InvalidShape(f"bad shape {s!r}; expected T,X,Y") from None
    if len(shape) != 3 or min(shape) < 1:
        raise InvalidShape(f"bad shape {s!r}; expected three positive cardinalities")
    return shape


def cmd_stats(args) -> int:
    from .sampling import MAX_ATOMS, ExperimentConfig, results_csv, results_json, run_experiment

    shapes = [_parse_shape(s) for s in args.shape]
    if args.samples < 1:
        raise InvalidShape("-n must be >= 1")
    for sh in shapes:
        if sh[0] * sh[1] * sh[2] > MAX_ATOMS:
            raise ResourceGuard(f"shape {sh} exceeds the {MAX_ATOMS}-atom guard")
    results = []
    for sh in shapes:
        cfg = ExperimentConfig(sh, args.samples, args.seed, args.tol_interior, args.restarts, args.max_iter)
        results.append(run_experiment(cfg))
    if args.csv_path:
        with open(args.csv_path, "w") as fh:
            fh.write(results_csv(results))
    if args.json_path:
        with open(args.json_path, "w") as fh:
            fh.write(results_json(results) + "\n")
    if args.format == "csv":
        out = results_csv(results)
    elif args.format == "json":
        out = results_json(results) + "\n"
    else:
        out = "".join(
            f"{'x'.join(map(str, r.shape))}: interior {r.interior_fraction:.1f}%  "
            f"unique(of interior) {r.unique_fraction:.1f}%  marginal {r.n_marginal}  "
            f"failed {r.n_failed}\n"
            for r in results
        )
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return EXIT_OK


def cmd_viz223(args) -> int:
    from .viz import build_viz223

    P = load(args.file)
    payload = build_viz223(P, opts=_options(args))
    obj = payload.to_json_obj()
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "kind", "index", "g_t00", "g_t01"])
        for f in obj["factors"]:
            for i, (a, b) in enumerate(f["polygon"]):
                w.writerow([f["t"], "vertex", i, a, b])
            for i, (a, b) in enumerate(f["projection"]["points"]):
                w.writerow([f["t"], f["projection"]["kind"], i, a, b])
        text = buf.getvalue()
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    lines = [f"verdict {obj['metadata']['verdict']}, UI {obj['metadata']['uiBits']:.10g} bits"]
    for f in obj["factors"]:
        lines.append(f"t={f['t']}: {len(f['polygon'])} vertices, projection {f['projection']['kind']} "
                     f"{f['projection']['points']}")
    _emit(args, obj, "\n".join(lines) + "\n")
    return EXIT_OK


class ResourceGuard(UipidError):
    pass


COMMANDS = {
    "compute": cmd_compute,
    "decompose": cmd_decompose,
    "diagnose": cmd_diagnose,
    "stats": cmd_stats,
    "viz223": cmd_viz223,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except INPUT_ERRORS as exc:
        _fail(exc)
        return EXIT_INPUT
    except UipidError as exc:
        _fail(exc)
        return EXIT_SOLVER


def _fail(exc: Exception) -> None:
    name = type(exc).__name__
    msg = str(exc)
    sys.stderr.write(f"error: {msg}\n" if msg.startswith(name) else f"error: {name}: {msg}\n")


if __name__ == "__main__":
    sys.exit(main())
