"""Command-line interface: ``arithdyn <command> [flags]``.

Exit codes: 0 success / pass, 1 residual over budget, 2 invalid input,
3 unsupported size or geometry, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

from .archplaces import green_grid
from .dynmodel import bad_reduction_primes, check_negativity_conditions, load_model
from .equilibrium import build_tree, integrate_log
from .errors import CapabilityError, IndeterminateError, InputError, NumericFailure, UnsupportedGeometry
from .exactcore.numbers import require_prime
from .exactcore.parser import parse_form, parse_point
from .finiteplaces import finite_local_height
from .heights import canonical_height_divisor, canonical_height_point
from .mahler import MahlerConfig, corollary_check, mahler_report

EXIT_OK, EXIT_RESIDUAL, EXIT_INPUT, EXIT_CAPABILITY, EXIT_NUMERIC = 0, 1, 2, 3, 4


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive finite number")
    return v


def _nonneg_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def _window(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("window is re_min,re_max,im_min,im_max")
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad window {text!r}") from None
    if not (vals[0] < vals[1] and vals[2] < vals[3]):
        raise argparse.ArgumentTypeError("window needs re_min < re_max and im_min < im_max")
    return vals


def _resolution(text):
    parts = text.split(",")
    try:
        vals = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad resolution {text!r}") from None
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2 or min(vals) < 1 or vals[0] * vals[1] > 4_000_000:
        raise argparse.ArgumentTypeError("resolution is nx[,ny] with 1 <= nx*ny <= 4e6")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="arithdyn", description="Canonical heights, local heights and the dynamical Mahler formula.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, poly=False):
        p.add_argument("--model", required=True, help="model JSON file with a 'lift' list")
        p.add_argument("--format", choices=("table", "json", "csv"), default="table")
        p.add_argument("--json", action="store_true", help="same as --format json")
        if poly:
            p.add_argument("--poly", help="binary form in x, y (or a polynomial in x)")
        return p

    common(sub.add_parser("check", help="validate a model and report bad reduction"))
    p = common(sub.add_parser("localheight", help="local height at a prime"))
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--point", required=True, help="a:b or a:b:c")
    p.add_argument("--tol", type=_positive_float, default=1e-12)
    p = common(sub.add_parser("height", help="canonical height of a point or divisor"), poly=True)
    p.add_argument("--point")
    p.add_argument("--tol", type=_positive_float, default=1e-10)
    p.add_argument("--depth", type=_nonneg_int, help="pushforward depth for divisors")
    p = common(sub.add_parser("measure", help="integral of log|F| against the equilibrium measure"), poly=True)
    p.add_argument("--depth", type=_nonneg_int)
    p.add_argument("--seed", type=int, default=0)
    p = common(sub.add_parser("grid", help="escape-rate grid as CSV"))
    p.add_argument("--window", type=_window, default=(-2.0, 2.0, -2.0, 2.0))
    p.add_argument("--res", type=_resolution, default=(64, 64))
    p.add_argument("--depth", type=_nonneg_int, default=30)
    p = common(sub.add_parser("mahler", help="both sides of the Mahler formula"), poly=True)
    p.add_argument("--minus", help="second form of equal degree (difference formula)")
    p.add_argument("--depth", type=_nonneg_int, help="preimage tree depth")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("auto", "strict", "residual"), default="auto")
    p.add_argument("--tol", type=_positive_float, default=1e-10)
    return ap


def _form(text, model):
    if not text:
        raise InputError("--poly is required")
    names = list(model.variables) if model.n == 1 else ["x", "y"]
    return parse_form(text, names, homogenize=True)


def _emit(out, data, fmt, table_rows):
    if fmt == "json":
        out.write(json.dumps(data, indent=2, sort_keys=True) + "\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["field", "value"])
        for k, v in table_rows:
            w.writerow([k, v])
    else:
        width = max((len(k) for k, _ in table_rows), default=0)
        for k, v in table_rows:
            out.write(f"{k.ljust(width)}  {v}\n")


def _dec(x) -> str:
    return format(float(x), ".15g")


def cmd_check(args, out):
    model = load_model(args.model)
    rep = bad_reduction_primes(model)
    rows = [("lift", ", ".join(f.to_string(model.variables) for f in model.lift)),
            ("degree", str(model.d)), ("resultant", str(model.resultant))]
    if rep.good_everywhere:
        rows.append(("status", "valid, good reduction everywhere"))
    else:
        rows.append(("status", "valid"))
        rows.append(("bad primes", ", ".join(str(p) for p in rep.primes)))
        if rep.cofactor != 1:
            rows.append(("unfactored", str(rep.cofactor)))
    for p, pts in sorted(rep.indeterminacy.items()):
        rows.append((f"indeterminacy mod {p}", " ".join("(" + ":".join(map(str, q)) + ")" for q in pts)))
    data = {
        "valid": True,
        "degree": model.d,
        "n": model.n,
        "resultant": str(model.resultant),
        "bad_primes": rep.primes,
        "cofactor": str(rep.cofactor),
        "indeterminacy": {str(p): [list(q) for q in pts] for p, pts in sorted(rep.indeterminacy.items())},
    }
    if model.n <= 2:
        try:
            cert = check_negativity_conditions(model)
            data["negativity"] = {"holds": cert.holds, "all_k": cert.all_k, "verified_up_to": cert.verified_up_to}
            rows.append(("negativity conditions", "hold" if cert.holds else "fail"))
        except CapabilityError as exc:
            rows.append(("negativity conditions", f"not checked ({exc})"))
    _emit(out, data, args.format, rows)
    return EXIT_OK


def cmd_localheight(args, out):
    model = load_model(args.model)
    p = require_prime(args.prime)
    pt = parse_point(args.point)
    est = finite_local_height(model, p, pt, Fraction(args.tol).limit_denominator(10**18))
    data = est.to_dict()
    data["contribution_nats"] = _dec(float(est.value) * math.log(p))
    rows = [("prime", str(p)), ("point", args.point), ("local height", str(est.value)),
            ("bounds", f"[{est.lower_bound}, {est.upper_bound}]"), ("exact", str(est.exact)),
            ("contribution", f"{data['contribution_nats']} nats")]
    _emit(out, data, args.format, rows)
    return EXIT_OK


def cmd_height(args, out):
    model = load_model(args.model)
    if (args.point is None) == (args.poly is None):
        raise InputError("give exactly one of --point and --poly")
    if args.point is not None:
        hv = canonical_height_point(model, parse_point(args.point), args.tol)
    else:
        hv = canonical_height_divisor(model, _form(args.poly, model), args.depth, args.tol)
    data = hv.to_dict()
    rows = [("height", data["value"]), ("error bound", data["error_bound"]), ("archimedean", data["arch"]),
            ("finite", str(hv.finite))]
    _emit(out, data, args.format, rows)
    return EXIT_OK


def cmd_measure(args, out):
    model = load_model(args.model)
    F = _form(args.poly, model)
    tree = build_tree(model, depth=args.depth, seed=args.seed)
    est = integrate_log(tree, F)
    data = {"value": _dec(est.value), "spread": _dec(est.spread), "depth": est.depth, "singular": est.singular,
            "level_values": [_dec(v) for v in est.level_values]}
    rows = [("integral", data["value"]), ("spread", data["spread"]), ("depth", str(est.depth))]
    _emit(out, data, args.format, rows)
    return EXIT_OK


def cmd_grid(args, out):
    model = load_model(args.model)
    rows = green_grid(model, args.window, args.res, args.depth)
    if args.format == "json":
        out.write(json.dumps([{"re": _dec(a), "im": _dec(b), "green": _dec(g)} for a, b, g in rows], indent=2) + "\n")
        return EXIT_OK
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["re", "im", "green"])
    for a, b, g in rows:
        w.writerow([_dec(a), _dec(b), _dec(g)])
    return EXIT_OK


def cmd_mahler(args, out):
    model = load_model(args.model)
    F = _form(args.poly, model)
    config = MahlerConfig(tree_depth=args.depth, seed=args.seed, e_mode=args.mode, target_error=args.tol)
    if args.minus is not None:
        rep = corollary_check(model, F, _form(args.minus, model), config)
        data = rep.to_dict()
        rows = [("lhs", data["lhs"]), ("integral", data["integral"]), ("E difference", str(rep.E_difference)),
                ("residual", data["residual"]), ("budget", data["budget"]), ("result", "pass" if rep.passed else "FAIL")]
    else:
        rep = mahler_report(model, F, config)
        data = rep.to_dict()
        rows = [("lhs height", data["lhs_height"]["value"]), ("integral", data["arch_integral"]["value"]),
                ("E", f"{str(rep.E_term)} = {data['E_term']['value']}"), ("infinity term", data["infinity_term"]),
                ("residual", data["residual"]), ("budget", data["budget"]),
                ("result", "pass" if rep.passed else "FAIL"), ("notes", rep.notes)]
        if rep.heuristic is not None:
            rows.append(("heuristic", f"residual ~ {rep.heuristic.ratio} log {rep.heuristic.prime}"))
    _emit(out, data, args.format, rows)
    return EXIT_OK if rep.passed else EXIT_RESIDUAL


COMMANDS = {
    "check": cmd_check,
    "localheight": cmd_localheight,
    "height": cmd_height,
    "measure": cmd_measure,
    "grid": cmd_grid,
    "mahler": cmd_mahler,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.json:
        args.format = "json"
    buf = io.StringIO()
    try:
        code = COMMANDS[args.command](args, buf)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CapabilityError, UnsupportedGeometry, IndeterminateError) as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    sys.stdout.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
