"""cosrays command line.

Exit status: 0 on success, 1 on domain errors (JSON on stderr), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
from typing import Iterable, Optional, Sequence

from .address import (
    AddressSyntaxError,
    ExternalAddress,
    Side,
    SignedAddress,
    Symbol,
    compare_symbols,
    cyclic_between,
    lex_compare,
    parse_address,
    parse_signed,
)
from .cosine import CosineMap, NormalizedMap, SkeletonMap, inverse_branch, asymptotic_residual, parse_complex
from .errors import DomainError
from .model import Member, ModelPoint, NonMember, OutOfSpace, in_JF, step, t_min
from .raytrace import (
    RayPolyline,
    default_jobs,
    endpoint_estimate,
    get_map,
    mu_bound,
    phi,
    phi_n,
    project,
    trace_ray,
)

SCHEMA = "v1"


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False)


def _parse_range(text: str) -> tuple[float, float]:
    try:
        a, b = text.split(":")
        lo, hi = float(a), float(b)
    except ValueError:
        raise UsageError(f"--t expects LO:HI, got {text!r}") from None
    if not lo < hi:
        raise UsageError("--t needs LO < HI")
    return lo, hi


def _signed(text: str) -> SignedAddress:
    return parse_signed(text)


def _skeleton_kind(spec: str) -> str:
    kind = spec.strip()
    if kind not in ("cosh", "cosh2"):
        raise UsageError("this command needs --map cosh or --map cosh2")
    return kind


def _write(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# --- svg -------------------------------------------------------------------------------

def _fmt(x: float) -> str:
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def emit_svg(polylines: Sequence[RayPolyline], partition: bool = False, map_kind: Optional[str] = None,
             width: int = 800) -> str:
    """Static SVG of the polylines; identical input gives identical bytes."""
    pts = [p for pl in polylines for p in pl.points()]
    if not polylines or not pts:
        raise ValueError("nothing to draw")
    xs = [p.real for p in pts]
    ys = [p.imag for p in pts]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span_x = max(x1 - x0, 1e-9)
    span_y = max(y1 - y0, 1e-9)
    mx, my = 0.05 * span_x, 0.05 * span_y
    x0, x1, y0, y1 = x0 - mx, x1 + mx, y0 - my, y1 + my
    vb_w, vb_h = x1 - x0, y1 - y0
    height = max(1, round(width * vb_h / vb_w))
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="{_fmt(x0)} {_fmt(-y1)} {_fmt(vb_w)} {_fmt(vb_h)}">',
    ]
    stroke = _fmt(vb_w / width)
    if partition and map_kind in ("cosh", "cosh2"):
        h = math.pi if map_kind == "cosh" else math.pi / 2
        out.append(f'<g class="partition" stroke="#999999" stroke-width="{stroke}" stroke-dasharray="{_fmt(4 * vb_w / width)}">')
        for k in range(math.ceil(y0 / h), math.floor(y1 / h) + 1):
            y = -k * h
            out.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(y)}" x2="{_fmt(x1)}" y2="{_fmt(y)}"/>')
        out.append("</g>")
    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")
    for i, pl in enumerate(polylines):
        zs = pl.points()
        if not zs:
            continue
        d = "M" + " L".join(f"{_fmt(z.real)},{_fmt(-z.imag)}" for z in zs)
        out.append(
            f'<path d="{d}" fill="none" stroke="{palette[i % len(palette)]}" '
            f'stroke-width="{_fmt(2 * vb_w / width)}" data-address="{pl.addr}"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


# --- verification suites -----------------------------------------------------------

def random_symbol(rng: random.Random, bound: int = 3) -> Symbol:
    return Symbol(rng.randint(-bound, bound), rng.choice((Side.L, Side.R)))


def random_address(rng: random.Random, bound: int = 3, max_pre: int = 2, max_per: int = 2) -> ExternalAddress:
    pre = [random_symbol(rng, bound) for _ in range(rng.randint(0, max_pre))]
    per = [random_symbol(rng, bound) for _ in range(rng.randint(1, max_per))]
    return ExternalAddress(pre, per)


def random_member(rng: random.Random, lo: float = 0.1, hi: float = 3.0, **kw) -> ModelPoint:
    s = random_address(rng, **kw)
    return ModelPoint(t_min(s) + rng.uniform(lo, hi), s)


def suite_contraction(nm: NormalizedMap, count: int = 100, depth: int = 30, seed: int = 1) -> dict:
    rng = random.Random(seed)
    mu = mu_bound(nm)
    violations, worst = 0, 0.0
    for _ in range(count):
        x = random_member(rng)
        prev = phi_n(nm, x, 0)
        for k in range(depth + 1):
            cur = phi_n(nm, x, k + 1)
            ratio = abs(cur - prev) * 2 ** k / mu
            worst = max(worst, ratio)
            violations += ratio > 1
            prev = cur
    return {"suite": "contraction", "points": count, "violations": violations, "worst_ratio": worst}


def suite_conjugacy(nm: NormalizedMap, count: int = 100, tol: float = 1e-8, seed: int = 1) -> dict:
    rng = random.Random(seed)
    violations, worst = 0, 0.0
    for _ in range(count):
        x = random_member(rng)
        z, err = phi(nm, x, tol)
        y = step(x)
        z1, _ = phi(nm, y, tol)
        r = abs(nm(z) - z1)
        worst = max(worst, r / (2 * err))
        violations += r > 2 * err
    return {"suite": "conjugacy", "points": count, "violations": violations, "worst_ratio": worst}


def suite_sandwich(nm: NormalizedMap, count: int = 10000, seed: int = 1) -> dict:
    rng = random.Random(seed)
    violations = 0
    for _ in range(count):
        x = random_member(rng, lo=0.0, hi=5.0)
        y = step(x)
        if isinstance(y, OutOfSpace):
            violations += 1
            continue
        F = math.expm1(x.t)
        c = abs(project(y, nm.A))
        violations += not ((F + nm.A) / math.sqrt(2) <= c <= F + nm.A)
    return {"suite": "sandwich", "points": count, "violations": violations}


def suite_branches(nm: NormalizedMap, count: int = 1000, seed: int = 1) -> dict:
    rng = random.Random(seed)
    violations, worst_rt, worst_r = 0, 0.0, 0.0
    for _ in range(count):
        s = Symbol(rng.randint(-5, 5), rng.choice((Side.L, Side.R)))
        while True:
            w = complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) * nm.R_tract * 10 ** rng.uniform(0.01, 3)
            if abs(w) > nm.R_tract and nm.delta.distance(w) > 1e-6:
                break
        z = inverse_branch(nm, s, w)
        rt = abs(nm(z) - w) / (1 + abs(w))
        r = abs(asymptotic_residual(nm, s, w))
        worst_rt, worst_r = max(worst_rt, rt), max(worst_r, r)
        violations += rt > 1e-10 or r >= 1
    return {"suite": "branches", "points": count, "violations": violations,
            "worst_roundtrip": worst_rt, "worst_residual": worst_r}


def suite_order(count: int = 1000, seed: int = 1) -> dict:
    rng = random.Random(seed)
    syms = [Symbol(n, s) for n in range(-10, 11) for s in (Side.L, Side.R)]
    violations = 0
    for a in syms:
        for b in syms:
            ab, ba = compare_symbols(a, b), compare_symbols(b, a)
            violations += ab != -ba or ((ab == 0) != (a == b))
            for c in syms[::3]:
                if ab < 0 and compare_symbols(b, c) < 0 and compare_symbols(a, c) >= 0:
                    violations += 1
    for _ in range(count):
        a, b, c = (random_address(rng, bound=4, max_per=3) for _ in range(3))
        if len({a, b, c}) < 3:
            continue
        if cyclic_between(a, b, c) != cyclic_between(b, c, a):
            violations += 1
        if cyclic_between(a, b, c) and cyclic_between(c, b, a):
            violations += 1
        if lex_compare(a, b) != -lex_compare(b, a):
            violations += 1
    return {"suite": "order", "points": count, "violations": violations}


SUITES = ("contraction", "conjugacy", "sandwich", "branches", "order")


# --- commands ------------------------------------------------------------------------

def _cmd_trace(args) -> int:
    sa = _signed(args.address)
    lo, hi = _parse_range(args.t)
    pl = trace_ray(args.map, sa, (lo, hi), args.samples, args.tol, region=args.region, jobs=args.jobs)
    if args.format == "csv":
        _write(pl.to_csv(), args.out)
    elif args.format == "json":
        _write(_dump(pl.to_json()) + "\n", args.out)
    else:
        _write(emit_svg([pl], args.partition, args.map.strip()), args.out)
    return 0


def _cmd_plot(args) -> int:
    lo, hi = _parse_range(args.t)
    lines = [trace_ray(args.map, _signed(a), (lo, hi), args.samples, args.tol, region=args.region,
                       jobs=args.jobs) for a in args.address]
    _write(emit_svg(lines, args.partition, args.map.strip()), args.out)
    return 0


def _cmd_endpoint(args) -> int:
    sa = _signed(args.address)
    z = endpoint_estimate(args.map, sa, args.tol)
    _write(_dump({"schema": SCHEMA, "map": args.map, "address": str(sa), "endpoint": [z.real, z.imag]}) + "\n", None)
    return 0


def _cmd_itinerary(args) -> int:
    from .coshcomb import itinerary

    it = itinerary(_skeleton_kind(args.map), _signed(args.address))
    out = {"schema": SCHEMA, **it.to_json()}
    _write(_dump(out) + "\n", None)
    return 0


def _cmd_overlap(args) -> int:
    from .coshcomb import lands_together, overlap

    kind = _skeleton_kind(args.map)
    a, b = _signed(args.a), _signed(args.b)
    out = {"schema": SCHEMA, **overlap(kind, a, b).to_json(), "lands_together": lands_together(kind, a, b)}
    _write(_dump(out) + "\n", None)
    return 0


def _cmd_addresses_at(args) -> int:
    from .coshcomb import signed_addresses_at

    try:
        z = parse_complex(args.z)
    except ValueError as e:
        raise UsageError(str(e)) from None
    found = sorted(str(s) for s in signed_addresses_at(_skeleton_kind(args.map), z, args.depth))
    _write(_dump({"schema": SCHEMA, "z": [z.real, z.imag], "addresses": found}) + "\n", None)
    return 0


def _cmd_model(args) -> int:
    s = parse_address(args.address)
    out: dict = {"schema": SCHEMA, "op": args.op, "addr": str(s)}
    if args.op == "ts":
        out["t_min"] = t_min(s, args.tol)
    else:
        if args.t is None:
            raise UsageError(f"model {args.op} needs --t")
        x = ModelPoint(args.t, s)
        if args.op == "eval":
            y = step(x)
            out["result"] = {"out_of_space": y.deficit} if isinstance(y, OutOfSpace) else y.to_json()
        else:
            r = in_JF(x)
            out["member"] = isinstance(r, Member)
            if isinstance(r, NonMember):
                out["step"] = r.step
    _write(_dump(out) + "\n", None)
    return 0


def _cmd_verify(args) -> int:
    if args.suite == "order":
        res = suite_order()
    else:
        nm = get_map(args.map)
        if not isinstance(nm, NormalizedMap):
            raise UsageError(f"suite {args.suite} needs a general map a=..,b=..")
        fn = {"contraction": suite_contraction, "conjugacy": suite_conjugacy,
              "sandwich": suite_sandwich, "branches": suite_branches}[args.suite]
        res = fn(nm)
    _write(_dump({"schema": SCHEMA, "map": args.map, **res}) + "\n", None)
    return 0 if res["violations"] == 0 else 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 2 with a JSON line
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cosrays", description="Dynamic rays of cosine maps.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def tracing(sp, many=False):
        sp.add_argument("--map", required=True)
        if many:
            sp.add_argument("--address", required=True, action="append")
        else:
            sp.add_argument("--address", required=True)
        sp.add_argument("--t", required=True, help="LO:HI potential range")
        sp.add_argument("--samples", type=int, default=100)
        sp.add_argument("--tol", type=float, default=1e-8)
        sp.add_argument("--region", choices=("certified", "continue"), default="continue")
        sp.add_argument("--jobs", type=int, default=default_jobs())
        sp.add_argument("--partition", action="store_true")
        sp.add_argument("--out")

    t = sub.add_parser("trace", help="sample a ray")
    tracing(t)
    t.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    pl = sub.add_parser("plot", help="SVG of one or more rays")
    tracing(pl, many=True)

    e = sub.add_parser("endpoint", help="landing point estimate")
    e.add_argument("--map", required=True)
    e.add_argument("--address", required=True)
    e.add_argument("--tol", type=float, default=1e-10)

    it = sub.add_parser("itinerary")
    it.add_argument("--map", required=True)
    it.add_argument("--address", required=True)

    ov = sub.add_parser("overlap")
    ov.add_argument("--map", required=True)
    ov.add_argument("--a", required=True)
    ov.add_argument("--b", required=True)

    aa = sub.add_parser("addresses-at")
    aa.add_argument("--map", required=True)
    aa.add_argument("--z", required=True)
    aa.add_argument("--depth", type=int, choices=(0, 1, 2), default=2)

    m = sub.add_parser("model")
    m.add_argument("op", choices=("eval", "ts", "membership"))
    m.add_argument("--address", required=True)
    m.add_argument("--t", type=float)
    m.add_argument("--tol", type=float, default=1e-12)

    v = sub.add_parser("verify")
    v.add_argument("--suite", choices=SUITES, required=True)
    v.add_argument("--map", default="a=0.5,b=0.5")
    return p


_COMMANDS = {
    "trace": _cmd_trace,
    "plot": _cmd_plot,
    "endpoint": _cmd_endpoint,
    "itinerary": _cmd_itinerary,
    "overlap": _cmd_overlap,
    "addresses-at": _cmd_addresses_at,
    "model": _cmd_model,
    "verify": _cmd_verify,
}


def _fail(code: str, message: str, at, status: int) -> int:
    sys.stderr.write(_dump({"error": code, "message": message, "at": at}) + "\n")
    return status


def run(argv: Optional[Iterable[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] in ("-h", "--help"):
        build_parser().print_help()
        return 0
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "samples", 2) < 2:
            raise UsageError("--samples must be at least 2")
        if getattr(args, "tol", 1.0) is not None and getattr(args, "tol", 1.0) <= 0:
            raise UsageError("--tol must be positive")
        return _COMMANDS[args.command](args)
    except UsageError as e:
        return _fail("usage", str(e), None, 2)
    except AddressSyntaxError as e:
        return _fail("syntax", str(e), e.offset, 2)
    except DomainError as e:
        sys.stderr.write(_dump(e.to_json()) + "\n")
        return 1
    except ValueError as e:
        return _fail("domain", str(e), None, 1)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
