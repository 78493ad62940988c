"""Command-line front end: one subcommand per module plus the acceptance
runner.  Exit codes: 0 success, 2 validation error, 3 numerical
non-convergence, 4 resource limit.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, circle, expsums, meansquare, optimizer, rational, search
from .errors import (ConvergenceError, PrimeArcsError, ResourceLimitError,
                     ValidationError)
from .primes import build_table, load_table, save_table


@dataclass
class RunConfig:
    command: str
    instance_path: str | None = None
    table_path: str | None = None
    out_path: str | None = None
    fmt: str = "csv"
    tol_scale: float = 1.0
    threads: int = 1


def load_instance(path: str) -> circle.ProblemInstance:
    """Parse a key=value instance file into a validated ProblemInstance.

    Coefficient values may be exact expression strings (sqrt(2), 7/3,
    decimal literals).  Rejects a coefficient set that shares one sign;
    warns (stderr) when k falls outside the supported exponent range.
    """
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"instance file not found: {path}")
    raw: dict[str, str] = {}
    for line in p.read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"bad instance line (need key=value): {line!r}")
        key, val = line.split("=", 1)
        raw[key.strip()] = val.strip()
    for req in ("lambda1", "lambda2", "lambda3", "k"):
        if req not in raw:
            raise ValidationError(f"instance file missing required field {req!r}")
    hi_vals = {key: rational.parse_hireal(raw[key])
               for key in ("lambda1", "lambda2", "lambda3")}
    lam = {key: v.to_float() for key, v in hi_vals.items()}
    if 0.0 in lam.values():
        raise ValidationError("all three coefficients must be nonzero")
    signs = [v > 0 for v in lam.values()]
    if all(signs) or not any(signs):
        raise ValidationError(
            "coefficients must not all be of the same sign (the inequality "
            "has no solutions otherwise)")
    if "lambda_ratio" in raw:
        ratio = rational.parse_hireal(raw["lambda_ratio"])
    else:
        try:
            ratio = hi_vals["lambda1"] / hi_vals["lambda2"]
        except (ValidationError, ZeroDivisionError):
            ratio = None
    inst = circle.ProblemInstance(
        lambda1=lam["lambda1"], lambda2=lam["lambda2"], lambda3=lam["lambda3"],
        k=float(rational.parse_hireal(raw["k"]).to_float()),
        varpi=float(raw.get("varpi", 0.0)),
        eps=float(raw.get("eps", 0.01)),
        delta=float(raw.get("delta", 0.1)),
        lambda_ratio=ratio)
    for warning in inst.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return inst


def _meta(quantity: str, **params) -> dict:
    out = {"quantity": quantity, "version": __version__}
    out.update({k: v for k, v in params.items()})
    return out


def _write_csv(path: str | None, meta: dict, header: list[str], rows):
    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_json(path: str | None, payload: dict):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# ------------------------------- subcommands ---------------------------------

def _cmd_sieve(args) -> int:
    table = build_table(int(float(args.limit)), segment_size=args.segment)
    save_table(table, args.out)
    print(f"wrote {table.count} primes up to {table.limit} -> {args.out}")
    return 0


def _parse_grid(spec: str):
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValidationError("--alpha-grid expects lo:hi:n")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1 or hi < lo:
        raise ValidationError("bad alpha grid")
    return np.linspace(lo, hi, n)


def _cmd_expsum(args) -> int:
    table = load_table(args.table) if args.which.upper() != "U" else None
    w = expsums.WindowSpec(X=float(args.X), k=float(args.k), delta=args.delta)
    grid = _parse_grid(args.alpha_grid)
    which = args.which.upper()

    def evaluate(chunk):
        if which == "S":
            return [expsums.eval_S(table, w, a) for a in chunk]
        if which == "U":
            return [expsums.eval_U(w, a) for a in chunk]
        if which == "T":
            return [expsums.eval_T(w, a, args.tol) for a in chunk]
        raise ValidationError(f"--which must be S, U or T, got {args.which}")

    if args.threads > 1:
        chunks = np.array_split(grid, args.threads * 4)
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            vals = [v for part in pool.map(evaluate, chunks) for v in part]
    else:
        vals = evaluate(grid)
    meta = _meta(f"exp_sum_{which}", X=args.X, k=args.k, delta=args.delta)
    rows = [(a, v.real, v.imag, abs(v)) for a, v in zip(grid, vals)]
    _write_csv(args.out, meta, ["alpha", "re", "im", "abs"], rows)
    return 0


def _cmd_meansquare(args) -> int:
    table = load_table(args.table)
    given = [v is not None for v in (args.h, args.rel_delta, args.Y)]
    if sum(given) != 1:
        raise ValidationError("give exactly one of --h, --rel-delta, --Y")
    q = meansquare.MeanSquareQuery(
        X=float(args.X), k=float(args.k), h=args.h, rel_delta=args.rel_delta,
        Y=args.Y, use_psi=args.psi, C_density=args.C, rh_mode=args.rh)
    if args.Y is not None:
        w = expsums.WindowSpec(X=q.X, k=q.k)
        rep = meansquare.l2_diff(table, w, q.Y)
        param = q.Y
    elif args.rel_delta is not None:
        rep = meansquare.selberg_J_relative(table, q)
        param = q.rel_delta
    else:
        rep = meansquare.selberg_J(table, q)
        param = q.h
    meta = _meta("mean_square", psi=args.psi, rh=args.rh)
    _write_csv(args.out, meta,
               ["X", "k", "param", "value", "comparator", "ratio", "method"],
               [(q.X, q.k, param, rep.value, rep.comparator, rep.ratio,
                 rep.method)])
    return 0


def _cmd_approx(args) -> int:
    x = rational.parse_hireal(args.lambda_ratio)
    convs = rational.continued_fraction(x, args.terms)
    payload = {
        "meta": _meta("continued_fraction", expression=args.lambda_ratio,
                      terms=args.terms),
        "convergents": [{"a": c.a, "q": c.q, "err": c.err_float}
                        for c in convs],
    }
    _write_json(args.out, payload)
    return 0


def _cmd_arcs(args) -> int:
    inst = load_instance(args.instance)
    table = load_table(args.table)
    X = float(args.X)
    w = expsums.WindowSpec(X=X, k=inst.k, delta=inst.delta)
    arc = circle.arc_params(inst, X)
    eta = arc.eta if args.eta is None else args.eta
    payload = {"meta": _meta("arc_decomposition", X=X, k=inst.k, eta=eta),
               "params": {"P": arc.P, "eta": arc.eta, "R": arc.R,
                          "major": list(arc.major),
                          "minor": [list(arc.minor[0]), list(arc.minor[1])],
                          "trivial": arc.trivial}}
    piece = args.piece
    if piece in ("major", "all"):
        out = circle.major_arc_split(inst, table, w, eta, tol=args.tol)
        payload["major"] = {k2: v for k2, v in out.items() if k2 != "arc"}
    if piece in ("minor", "all"):
        rows = circle.minor_arc_l2(inst, table, w, eta, arc)
        holder_comp = eta * X ** ((65 * inst.k + 39) / (72 * inst.k) + inst.eps)
        payload["minor"] = {"l2_majorants": rows,
                            "holder_comparator": holder_comp}
    if piece in ("trivial", "all"):
        tails = circle.trivial_tails(inst, table, w, arc.R, tol=args.tol * 1e3)
        payload["trivial"] = {"values": list(tails.values),
                              "comparators": list(tails.comparators),
                              "ratios": list(tails.ratios)}
    _write_json(args.out, payload)
    return 0


def _cmd_search(args) -> int:
    inst = load_instance(args.instance)
    table = load_table(args.table)
    X = float(args.X)
    if args.threshold == "auto":
        threshold = search.admissible_threshold(inst, X)
    else:
        threshold = float(args.threshold)
    rep = search.find_solutions(inst, table, X, threshold,
                                cap=args.emit_solutions, window=args.window)
    meta = _meta("solution_search", X=X, threshold=threshold,
                 count=rep.count, truncated=rep.truncated,
                 window=args.window)
    rows = [(r.p1, r.p2, r.p3, r.residual) for r in rep.records]
    _write_csv(args.out, meta, ["p1", "p2", "p3", "residual"], rows)
    return 0


def _cmd_exponents(args) -> int:
    k = Fraction(args.k)
    sol = optimizer.solve(k)
    ok, slacks, flags = optimizer.verify_closed_form(k)
    payload = {
        "meta": _meta("exponent_program", k=str(k)),
        "solution": {
            "inv_a": str(sol.inv_a), "b": str(sol.b), "c": str(sol.c),
            "feasible": sol.feasible,
            "active_constraints": list(sol.active_constraints),
            "violated": list(sol.violated),
        },
        "closed_form_check": {"ok": ok, "flags": flags,
                              "slacks": {k2: str(v) for k2, v in slacks.items()}},
    }
    _write_json(args.out, payload)
    return 0


def _cmd_verify_all(args) -> int:
    from . import acceptance
    results = acceptance.run_all(table_limit=int(float(args.table_limit)),
                                 tol_scale=args.tol_scale)
    width = max(len(r.name) for r in results)
    all_pass = True
    for r in results:
        flag = "PASS" if r.passed else "FAIL"
        all_pass &= r.passed
        print(f"[{flag}] {r.name:<{width}}  {r.detail}  ({r.elapsed:.1f} s)")
    if args.out:
        _write_json(args.out, {
            "meta": _meta("acceptance", tol_scale=args.tol_scale),
            "results": [r.as_dict() for r in results],
        })
    print("acceptance:", "ALL PASS" if all_pass else "FAILURES PRESENT")
    return 0 if all_pass else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="primearcs",
        description="Numerics for ternary prime-power inequalities")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sieve", help="build and save a prime table")
    p.add_argument("--limit", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--segment", type=int, default=1 << 20)
    p.set_defaults(func=_cmd_sieve)

    p = sub.add_parser("expsum", help="exponential sums on an alpha grid")
    p.add_argument("--table")
    p.add_argument("--X", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--alpha-grid", required=True)
    p.add_argument("--which", required=True, choices="SUTsut")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_expsum)

    p = sub.add_parser("meansquare", help="short-interval mean squares")
    p.add_argument("--table", required=True)
    p.add_argument("--X", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--h", type=float)
    p.add_argument("--rel-delta", type=float, dest="rel_delta")
    p.add_argument("--Y", type=float)
    p.add_argument("--psi", action="store_true")
    p.add_argument("--rh", action="store_true")
    p.add_argument("--C", type=float, default=12.0 / 5.0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_meansquare)

    p = sub.add_parser("approx", help="continued-fraction convergents")
    p.add_argument("--lambda-ratio", required=True, dest="lambda_ratio")
    p.add_argument("--terms", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_approx)

    p = sub.add_parser("arcs", help="arc decomposition integrals")
    p.add_argument("--instance", required=True)
    p.add_argument("--table", required=True)
    p.add_argument("--X", required=True)
    p.add_argument("--piece", default="all",
                   choices=["major", "minor", "trivial", "all"])
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_arcs)

    p = sub.add_parser("search", help="prime-triple solution search")
    p.add_argument("--instance", required=True)
    p.add_argument("--table", required=True)
    p.add_argument("--X", required=True)
    p.add_argument("--threshold", default="auto")
    p.add_argument("--emit-solutions", type=int, default=1000,
                   dest="emit_solutions")
    p.add_argument("--window", default="delta",
                   choices=["delta", "dyadic"])
    p.add_argument("--out")
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("exponents", help="solve the exponent program")
    p.add_argument("--k", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_exponents)

    p = sub.add_parser("verify-all", help="run the acceptance criteria")
    p.add_argument("--table-limit", default="1050000", dest="table_limit")
    p.add_argument("--tol-scale", type=float, default=1.0, dest="tol_scale")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_verify_all)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return 3
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 4
    except PrimeArcsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
