"""Ray points by inverse-branch pullback.

For disjoint-type maps the limit of the pullbacks is certified by a
geometric tail bound.  For cosh and cosh^2 the same pullback is run with the
maps' own branches; sign hints choose the side when an iterate falls on a
slit, and samples whose pullback orbit leaves the expansion region are
reported rather than trusted.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence, Union

from .address import ExternalAddress, Side, Sign, SignedAddress, Symbol, shift_n
from .cosine import (
    AnyMap,
    NormalizedMap,
    SkeletonMap,
    inverse_branch,
    inverse_branch_log,
    resolve_map,
)
from .errors import BelowMinimalPotential, DomainError, NonStabilizationError, PrecisionLossError
from .model import ModelPoint, potential_step, t_min

_EPS = 2.0 ** -52
# above this potential the next level is only handled through its logarithm
LOG_SWITCH = 700.0


def project(x: ModelPoint, A: float) -> complex:
    s0 = x.addr.first
    re = x.t + A
    return complex(re if s0.side is Side.R else -re, 2 * math.pi * s0.n)


def mu_bound(nm: NormalizedMap, conservative: bool = False) -> float:
    """Uniform bound on |Phi_1 - Phi_0|.

    ``conservative`` replaces |ln M| by the larger of |ln|a||, |ln|b||, which
    is what the estimate needs when |a| != |b|.
    """
    a, b = abs(nm.base.a), abs(nm.base.b)
    lm = max(abs(math.log(a)), abs(math.log(b))) if conservative else abs(math.log(max(a, b)))
    return nm.A + math.log(math.sqrt(2)) + lm + 2 + 3 * math.pi


def _top_log(t: float, nxt: Symbol, A: float) -> complex:
    """log of project(F(x)) when F(t) is beyond double range (t > LOG_SWITCH)."""
    re = t + math.log1p((A - 1 - 2 * math.pi * nxt.magnitude) * math.exp(-t))
    return complex(re, 0.0 if nxt.side is Side.R else math.pi)


def phi_n(nm: NormalizedMap, x: ModelPoint, n: int) -> complex:
    if n < 0:
        raise ValueError("n must be >= 0")
    s = x.addr
    ts = [x.t]
    for j in range(n):
        if ts[-1] > LOG_SWITCH:
            # deeper levels change the result by far less than one ulp
            z = inverse_branch_log(nm, s.symbol_at(j), _top_log(ts[-1], s.symbol_at(j + 1), nm.A))
            return _pull_back(nm, s, z, j)
        T = potential_step(ts[-1], s.symbol_at(j + 1))
        if T < 0:
            raise BelowMinimalPotential(f"model orbit leaves the space at step {j + 1}", j + 1)
        ts.append(T)
    w = project(ModelPoint(ts[n], shift_n(s, n)), nm.A)
    return _pull_back(nm, s, w, n)


def _pull_back(nm: NormalizedMap, s: ExternalAddress, w: complex, level: int) -> complex:
    for j in range(level - 1, -1, -1):
        w = inverse_branch(nm, s.symbol_at(j), w)
    return w


def phi_depth(nm: NormalizedMap, x: ModelPoint, tol: float) -> tuple[int, float]:
    mu = mu_bound(nm, conservative=True)
    eps = 64 * _EPS * (1 + abs(project(x, nm.A)) + 2 * mu)
    if tol <= eps:
        raise PrecisionLossError(f"tol {tol:.3g} is below the evaluation error {eps:.3g}", tol)
    n = max(1, math.ceil(math.log2(2 * mu / (tol - eps))))
    return n, mu / 2 ** (n - 1) + eps


def phi(nm: NormalizedMap, x: ModelPoint, tol: float = 1e-8) -> tuple[complex, float]:
    """Phi(x) with a certified error bound err <= tol."""
    if x.t < t_min(x.addr) - 1e-12:
        raise BelowMinimalPotential(f"t = {x.t} is below t_min", x.t)
    n, err = phi_depth(nm, x, tol)
    return phi_n(nm, x, n), err


# --- cosh and cosh^2 ----------------------------------------------------------------

@dataclass(frozen=True)
class SkeletonPoint:
    z: complex
    err: float
    q_ok: bool
    depth: int
    v: complex = field(default=1 + 0j, compare=False)


def _start_scale(sm: SkeletonMap) -> tuple[float, float]:
    # far out the ray at potential T sits near c*T + d
    return (1.0, math.log(2)) if sm.kind == "cosh" else (0.5, 0.5 * math.log(2))


def _start_point(sm: SkeletonMap, T: float, s: Symbol) -> complex:
    c, d = _start_scale(sm)
    re = c * T + d
    return complex(re if s.side is Side.R else -re, sm.period * s.n)


def _start_direction(s: Symbol, sign: Sign) -> complex:
    return complex(0, sign.unit if s.side is Side.R else -sign.unit)


def pull_back_step(sm: SkeletonMap, s: Symbol, w: complex, v: complex) -> tuple[complex, complex]:
    """One signed pullback: the preimage in F_s and the carried direction."""
    z = sm.branch(s, w, v)
    d = sm.deriv(z)
    if abs(d) > 1e-12 * (1 + abs(w)):
        nv = v / d
    else:
        # critical point: f(z + h) - f(z) ~ f''(z) h^2 / 2
        h = cmath.sqrt(v / sm.deriv2(z))
        nv = h
        for cand in (h, -h):
            eps = 1e-6
            probe = z + eps * cand / abs(cand)
            if abs(sm.branch(s, sm(probe), v) - probe) < 1e-9:
                nv = cand
                break
    return z, nv / abs(nv) if nv != 0 else v


def _skeleton_chain(sm: SkeletonMap, s: ExternalAddress, sign: Sign, level: int, top: complex,
                    top_is_log: bool) -> tuple[complex, complex, bool]:
    """Pull a start point at ``level`` back to level 0, tracking the Q condition."""
    v = _start_direction(s.symbol_at(level), sign)
    if top_is_log:
        w = sm.branch_log(s.symbol_at(level - 1), top)
        v = v / abs(sm.deriv(w)) if abs(w.real) < 300 else v
        start = level - 2
    else:
        w = top
        start = level - 1
    q_ok = True
    for j in range(start, -1, -1):
        if j + 1 >= 1 and not sm.in_expansion_region(w):
            q_ok = False
        w, v = pull_back_step(sm, s.symbol_at(j), w, v)
    return w, v, q_ok


def skeleton_point(sm: SkeletonMap, sa: SignedAddress, t: float, threshold: float = 30.0,
                   max_levels: int = 20000) -> SkeletonPoint:
    s = sa.addr
    ts = [t]
    while ts[-1] <= threshold:
        if len(ts) > max_levels:
            raise NonStabilizationError(f"potential stays below {threshold} for {max_levels} steps", t)
        T = potential_step(ts[-1], s.symbol_at(len(ts)))
        if T < 0:
            raise BelowMinimalPotential(f"t = {t} is below t_min", t)
        ts.append(T)
    m = len(ts) - 1
    z1, v1, q1 = _skeleton_chain(sm, s, sa.sign, m, _start_point(sm, ts[m], s.symbol_at(m)), False)
    # second estimate one level deeper
    T_next = potential_step(ts[m], s.symbol_at(m + 1))
    nxt = s.symbol_at(m + 1)
    if math.isfinite(T_next) and T_next < 1e300:
        z2, _, q2 = _skeleton_chain(sm, s, sa.sign, m + 1, _start_point(sm, T_next, nxt), False)
    else:
        c, d = _start_scale(sm)
        lt = ts[m] + math.log(c) + math.log1p(-(1 + 2 * math.pi * nxt.magnitude) * math.exp(-ts[m]))
        top = complex(lt, 0.0 if nxt.side is Side.R else math.pi)
        z2, _, q2 = _skeleton_chain(sm, s, sa.sign, m + 1, top, True)
    err = abs(z1 - z2) + 64 * _EPS * (1 + abs(z1))
    return SkeletonPoint(z1, err, q1 and q2, m, v1)


# --- polylines ------------------------------------------------------------------------

@dataclass(frozen=True)
class RaySample:
    t: float
    z: complex
    err: float
    q_ok: bool = True


@dataclass(frozen=True)
class RayPolyline:
    map_id: str
    addr: Union[SignedAddress, ExternalAddress]
    samples: tuple[RaySample, ...]
    depth_used: int
    rejected: tuple[float, ...] = ()

    def points(self) -> list[complex]:
        return [p.z for p in self.samples]

    def to_csv(self) -> str:
        rows = ["t,re,im,err"]
        for p in self.samples:
            rows.append(f"{p.t!r},{p.z.real!r},{p.z.imag!r},{p.err!r}")
        return "\n".join(rows) + "\n"

    def to_json(self) -> dict:
        return {
            "schema": "v1",
            "map": self.map_id,
            "address": str(self.addr),
            "depth_used": self.depth_used,
            "samples": [
                {"t": p.t, "re": p.z.real, "im": p.z.imag, "err": p.err, "q_ok": p.q_ok}
                for p in self.samples
            ],
            "rejected": list(self.rejected),
        }


@lru_cache(maxsize=32)
def _cached_map(spec: str) -> AnyMap:
    return resolve_map(spec)


def get_map(map_spec: Union[str, AnyMap]) -> AnyMap:
    if isinstance(map_spec, str):
        return _cached_map(map_spec.strip())
    return map_spec


def _map_id(map_spec) -> str:
    if isinstance(map_spec, str):
        return map_spec.strip()
    if isinstance(map_spec, NormalizedMap):
        return map_spec.source.spec() if map_spec.source is not None else map_spec.base.spec()
    return map_spec.spec()


def t_grid(t_range: tuple[float, float], n_samples: int) -> list[float]:
    t0, t1 = map(float, t_range)
    if not t0 < t1:
        raise ValueError("t range must satisfy t_min < t_max")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    return [t0 + (t1 - t0) * i / (n_samples - 1) for i in range(n_samples)]


def ray_point(map_spec, sa: Union[SignedAddress, ExternalAddress], t: float, tol: float = 1e-8):
    """One sample: (z, err, q_ok, depth)."""
    m = get_map(map_spec)
    if isinstance(m, NormalizedMap):
        s = sa.addr if isinstance(sa, SignedAddress) else sa
        x = ModelPoint(t, s)
        z, err = phi(m, x, tol)
        return z, err, True, phi_depth(m, x, tol)[0]
    if not isinstance(sa, SignedAddress):
        sa = SignedAddress(sa, Sign.PLUS)
    p = skeleton_point(m, sa, t)
    if p.err > tol:
        raise PrecisionLossError(f"pullback error {p.err:.3g} exceeds tol at t = {t}", t)
    return p.z, p.err, p.q_ok, p.depth


def _sample_job(args):
    spec, sa_text, signed, t, tol = args
    from .address import parse_address, parse_signed

    sa = parse_signed(sa_text) if signed else parse_address(sa_text)
    try:
        return ("ok", t, ray_point(spec, sa, t, tol))
    except DomainError as e:
        return ("error", t, e)


def _run_jobs(tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) < 2:
        return [_sample_job(a) for a in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        # map preserves submission order, so the merge is by t
        return list(ex.map(_sample_job, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("COSRAYS_JOBS", "1")))
    except ValueError:
        return 1


def trace_ray(map_spec, sa: Union[SignedAddress, ExternalAddress], t_range: tuple[float, float],
              n_samples: int, tol: float = 1e-8, region: str = "certified",
              jobs: Optional[int] = None) -> RayPolyline:
    """Sample a ray on an evenly spaced t-grid.

    ``region="certified"`` moves samples whose pullback orbit leaves the
    expansion region into ``rejected``; ``"continue"`` keeps them with
    ``q_ok=False``.
    """
    if region not in ("certified", "continue"):
        raise ValueError("region must be 'certified' or 'continue'")
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = get_map(map_spec)
    ts = t_grid(t_range, n_samples)
    s = sa.addr if isinstance(sa, SignedAddress) else sa
    if isinstance(m, NormalizedMap) and ts[0] < t_min(s) - 1e-12:
        raise BelowMinimalPotential(f"t range starts below t_min = {t_min(s):.12g}", ts[0])
    jobs = default_jobs() if jobs is None else jobs
    if isinstance(map_spec, str):
        spec = map_spec
    else:
        spec = None
    if spec is not None:
        tasks = [(spec, str(sa), isinstance(sa, SignedAddress), t, tol) for t in ts]
        results = _run_jobs(tasks, jobs)
    else:
        results = []
        for t in ts:
            try:
                results.append(("ok", t, ray_point(m, sa, t, tol)))
            except DomainError as e:
                results.append(("error", t, e))
    samples, rejected, depth = [], [], 0
    for kind, t, payload in results:
        if kind == "error":
            raise payload
        z, err, q_ok, d = payload
        depth = max(depth, d)
        if not q_ok and region == "certified":
            rejected.append(t)
            continue
        samples.append(RaySample(t, z, err, q_ok))
    return RayPolyline(_map_id(map_spec), sa, tuple(samples), depth, tuple(rejected))


# --- endpoints -----------------------------------------------------------------------

def _period_map(sm: SkeletonMap, word: Sequence[Symbol], z: complex, v: complex) -> tuple[complex, complex]:
    for sym in reversed(word):
        z, v = pull_back_step(sm, sym, z, v)
    return z, v


def endpoint_estimate(map_spec, sa: Union[SignedAddress, ExternalAddress], tol: float = 1e-10,
                      budget: int = 500, t_start: Optional[float] = None) -> complex:
    """Limit of the ray as t decreases to t_min.

    The periodic part is handled by iterating the composed period branches
    from a ray point; each iterate is the ray point at the next potential of
    the backward recursion.  Stabilization means three consecutive moves
    below ``tol``.
    """
    m = get_map(map_spec)
    if not isinstance(sa, SignedAddress):
        sa = SignedAddress(sa, Sign.PLUS)
    s = sa.addr
    per = ExternalAddress((), s.period)
    if isinstance(m, NormalizedMap):
        return _endpoint_disjoint(m, s, tol, budget)
    t0 = t_min(per) + 1.0 if t_start is None else t_start
    p = skeleton_point(m, SignedAddress(per, sa.sign), t0)
    z, v = p.z, p.v
    calm = 0
    for _ in range(budget):
        z_new, v = _period_map(m, per.period, z, v)
        calm = calm + 1 if abs(z_new - z) < tol else 0
        z = z_new
        if calm >= 3:
            break
    else:
        raise NonStabilizationError(f"endpoint did not stabilize within {budget} period steps", z)
    for sym in reversed(s.preperiod):
        z, v = pull_back_step(m, sym, z, v)
    return z


def _endpoint_disjoint(nm: NormalizedMap, s: ExternalAddress, tol: float, budget: int) -> complex:
    per = ExternalAddress((), s.period)
    z, _ = phi(nm, ModelPoint(t_min(per) + 1.0, per), 1e-10)
    calm = 0
    for _ in range(budget):
        z_new = z
        for sym in reversed(per.period):
            z_new = inverse_branch(nm, sym, z_new)
        calm = calm + 1 if abs(z_new - z) < tol else 0
        z = z_new
        if calm >= 3:
            break
    else:
        raise NonStabilizationError(f"endpoint did not stabilize within {budget} period steps", z)
    for sym in reversed(s.preperiod):
        z = inverse_branch(nm, sym, z)
    return z
