"""Cosine maps g(z) = a e^z + b e^-z.

Two families live here.  ``CosineMap`` / ``NormalizedMap`` cover general
parameters, scaled into disjoint type, with tracts outside a disk of radius
``R_tract`` and a vertical cut ``delta`` through a critical value.  The
``SkeletonMap`` objects cover cosh and cosh^2, whose inverse branches are
taken on the complement of the slit ``[v-, v+] U iR>=0`` instead.

Inverse branches are evaluated in closed form from the quadratic in e^z,
arranged so that only log|w| is needed.  That keeps pullbacks of points with
astronomically large modulus exact in double precision.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Union

from .address import Side, Symbol
from .errors import (
    BoundaryError,
    BranchDomainError,
    DomainError,
    EvalOverflow,
    OrbitEscapeError,
    OutsideTractError,
    PrecisionLossError,
    SearchExhausted,
    VerificationError,
)

TWO_PI = 2.0 * math.pi
EXP_LIMIT = 700.0
# distance below which a point counts as on delta or on a cut
CUT_TOL = 1e-9
_EPS = 2.0 ** -52


# --- plain cosine maps -------------------------------------------------------

@dataclass(frozen=True)
class CosineMap:
    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        if self.a == 0 or self.b == 0:
            raise ValueError("cosine map needs a*b != 0")

    def __call__(self, z: complex) -> complex:
        return eval(self, z)

    def deriv(self, z: complex) -> complex:
        _check_range(z)
        return self.a * cmath.exp(z) - self.b * cmath.exp(-z)

    def scaled(self, lam: complex) -> "CosineMap":
        return CosineMap(lam * self.a, lam * self.b)

    def spec(self) -> str:
        return f"a={_fmt_complex(self.a)},b={_fmt_complex(self.b)}"


def _check_range(z: complex) -> None:
    if abs(z.real) > EXP_LIMIT:
        raise EvalOverflow(f"|Re z| = {abs(z.real):.6g} exceeds {EXP_LIMIT}", z)


def eval(m: CosineMap, z: complex) -> complex:  # noqa: A001 - mirrors the operation name
    z = complex(z)
    _check_range(z)
    return m.a * cmath.exp(z) + m.b * cmath.exp(-z)


@dataclass(frozen=True)
class SingularData:
    v1: complex
    v2: complex
    crit_base: complex


def crit_base(m: CosineMap) -> complex:
    """Critical point solving e^{2z} = b/a; the principal Log gives |Im| <= pi/2."""
    return 0.5 * cmath.log(m.b / m.a)


def singular_data(m: CosineMap) -> SingularData:
    c = crit_base(m)
    return SingularData(eval(m, c), eval(m, c + math.pi * 1j), c)


def k_terms(m: CosineMap) -> tuple[float, ...]:
    ra = abs(2 * m.b / m.a)
    rb = abs(2 * m.a / m.b)
    ab = abs(m.a * m.b)
    return (
        (math.sqrt(ra) + math.sqrt(rb)) * (abs(m.a) + abs(m.b)),
        8 * ab,
        1.0,
        0.5 * math.log(ra),
        0.5 * math.log(rb),
        math.log(16 / ab),
    )


def k_constant(m: CosineMap) -> float:
    return max(k_terms(m))


# --- the cut delta -----------------------------------------------------------

@dataclass(frozen=True)
class Delta:
    """Vertical ray {c + iy : y >= y0} (up) or {c + iy : y <= y0} (down)."""

    c: float
    y0: float
    up: bool

    @classmethod
    def for_map(cls, m: CosineMap) -> "Delta":
        sd = singular_data(m)
        v1, v2 = sd.v1, sd.v2
        if v1.imag > v2.imag:
            return cls(v1.real, v1.imag, True)
        if v1.imag < v2.imag:
            return cls(v2.real, v2.imag, False)
        # real ab: upward from the value with the larger real part
        v = v1 if v1.real >= v2.real else v2
        return cls(v.real, v.imag, True)

    def distance(self, w: complex) -> float:
        on_ray = w.imag >= self.y0 if self.up else w.imag <= self.y0
        if on_ray:
            return abs(w.real - self.c)
        return abs(w - complex(self.c, self.y0))

    def angle(self, modulus: float) -> float:
        """Argument where the cut meets the circle |w| = modulus."""
        if math.isinf(modulus) or modulus > 1e150:
            return math.pi / 2 if self.up else -math.pi / 2
        h = math.sqrt(max(modulus * modulus - self.c * self.c, 0.0))
        return math.atan2(h if self.up else -h, self.c)

    def window(self, phi: float, modulus: float) -> float:
        """Move a principal argument into the window cut along delta."""
        psi = self.angle(modulus)
        if self.up:
            return phi - TWO_PI if phi > psi else phi
        return phi + TWO_PI if phi < psi else phi


def _r_term(q: complex) -> complex:
    return cmath.log((1 + cmath.sqrt(1 - q)) / 2)


# --- normalized disjoint-type maps ---------------------------------------------

@dataclass(frozen=True)
class NormalizedMap:
    base: CosineMap
    lam: complex
    K: float
    R_tract: float
    A: float
    delta: Delta
    L_a: complex
    L_b: complex
    K_scaled: float
    source: Optional[CosineMap] = field(default=None, compare=False)

    @property
    def M(self) -> float:
        return max(abs(self.base.a), abs(self.base.b))

    def __call__(self, z: complex) -> complex:
        return eval(self.base, z)

    def to_json(self) -> dict:
        return {
            "a": [self.base.a.real, self.base.a.imag],
            "b": [self.base.b.real, self.base.b.imag],
            "lambda": [self.lam.real, self.lam.imag],
            "K": self.K,
            "K_scaled": self.K_scaled,
            "R_tract": self.R_tract,
            "A": self.A,
        }


def _ell(delta: Delta, w: complex) -> complex:
    r = abs(w)
    return complex(math.log(r), delta.window(cmath.phase(w), r))


def _ell_from_log(delta: Delta, log_w: complex) -> complex:
    phi = math.remainder(log_w.imag, TWO_PI)
    if phi == -math.pi:
        phi = math.pi
    return complex(log_w.real, delta.window(phi, math.exp(min(log_w.real, 700.0))))


def _branch(g: CosineMap, L_a: complex, L_b: complex, side: Side, n: int,
            ell: complex, inv_w: complex) -> tuple[complex, complex]:
    """Branch value and its residual r* from ell = log w and 1/w."""
    q = 4 * g.a * g.b * inv_w * inv_w
    r = _r_term(q)
    if side is Side.R:
        return ell - L_a + r + TWO_PI * n * 1j, r
    return -ell + L_b - r + TWO_PI * n * 1j, -r


def _inv_from_log(log_w: complex) -> complex:
    if log_w.real > 700:
        return 0j
    return cmath.exp(-log_w)


def _check_w(nm: NormalizedMap, w: complex) -> None:
    if not abs(w) > nm.R_tract:
        raise BranchDomainError(f"|w| = {abs(w):.6g} is not above R_tract = {nm.R_tract:.6g}", w)
    if nm.delta.distance(w) < CUT_TOL:
        raise BoundaryError("w lies on delta", w)


def inverse_branch(nm: NormalizedMap, s: Symbol, w: complex) -> complex:
    w = complex(w)
    _check_w(nm, w)
    z, r = _branch(nm.base, nm.L_a, nm.L_b, s.side, s.n, _ell(nm.delta, w), 1 / w)
    if not abs(r) < 1:
        raise VerificationError("asymptotic residual |r*| >= 1", w)
    if abs(z.real) <= EXP_LIMIT and abs(eval(nm.base, z) - w) > 1e-10 * (1 + abs(w)):
        raise VerificationError("inverse branch fails the round trip", w)
    return z


def inverse_branch_log(nm: NormalizedMap, s: Symbol, log_w: complex) -> complex:
    """Same as inverse_branch, with w given through a logarithm of it."""
    if log_w.real <= math.log(nm.R_tract):
        raise BranchDomainError("|w| is not above R_tract", log_w)
    if log_w.real < 700:
        return inverse_branch(nm, s, cmath.exp(log_w))
    z, _ = _branch(nm.base, nm.L_a, nm.L_b, s.side, s.n,
                   _ell_from_log(nm.delta, log_w), _inv_from_log(log_w))
    return z


def asymptotic_residual(nm: NormalizedMap, s: Symbol, w: complex) -> complex:
    """r* with z = +-(Log w) -+ log(a or b) + 2 pi i n + r*."""
    z = inverse_branch(nm, s, w)
    lw = cmath.log(w)
    if s.side is Side.R:
        ref = lw - cmath.log(nm.base.a)
    else:
        ref = -lw + cmath.log(nm.base.b)
    # the reference uses principal logs; reduce the 2 pi i ambiguity
    d = z - ref - TWO_PI * s.n * 1j
    k = round(d.imag / TWO_PI)
    return d - TWO_PI * k * 1j


def fundamental_domain_of(nm: NormalizedMap, z: complex) -> Symbol:
    z = complex(z)
    if z.real == 0:
        raise OutsideTractError("point on the imaginary axis", z)
    side = Side.R if z.real > 0 else Side.L
    if abs(z.real) > EXP_LIMIT:
        # log g(z) = log a + z (or log b - z) up to terms below double precision
        log_w = cmath.log(nm.base.a) + z if side is Side.R else cmath.log(nm.base.b) - z
        base, _ = _branch(nm.base, nm.L_a, nm.L_b, side, 0,
                          _ell_from_log(nm.delta, log_w), _inv_from_log(log_w))
    else:
        w = eval(nm.base, z)
        if not abs(w) > nm.R_tract:
            raise OutsideTractError(f"|g(z)| = {abs(w):.6g} <= R_tract", z)
        if nm.delta.distance(w) < CUT_TOL:
            raise BoundaryError("z lies on a preimage of delta", z)
        base, _ = _branch(nm.base, nm.L_a, nm.L_b, side, 0, _ell(nm.delta, w), 1 / w)
    # coarse band: |Im z - Im w'| < 3 pi leaves at most three candidates
    n0 = (z.imag - base.imag) / TWO_PI
    for n in sorted(range(math.floor(n0) - 1, math.ceil(n0) + 2), key=lambda k: abs(k - n0)):
        if abs(base + TWO_PI * n * 1j - z) <= 1e-8 * (1 + abs(z)):
            return Symbol(n, side)
    raise OutsideTractError("z is not in the tract on its side", z)


def address_of(nm: NormalizedMap, z: complex, depth: int) -> list[Symbol]:
    """Symbols of the first ``depth`` points of the forward orbit.

    A running bound on the floating-point error of the orbit is kept; once it
    reaches 0.1 the domain of the next point is no longer determined and a
    PrecisionLossError carrying the step index is raised.
    """
    out: list[Symbol] = []
    err = 4 * _EPS * (1 + abs(z))
    for i in range(depth):
        if err > 0.1:
            raise PrecisionLossError(f"orbit error bound {err:.3g} at step {i}", i)
        try:
            out.append(fundamental_domain_of(nm, z))
        except OutsideTractError as e:
            raise OrbitEscapeError(f"orbit leaves the tracts at step {i}", i) from e
        except EvalOverflow as e:
            raise PrecisionLossError(f"orbit point beyond double range at step {i}", i) from e
        if i + 1 == depth:
            break
        try:
            w = eval(nm.base, z)
            d = nm.base.deriv(z)
        except EvalOverflow as e:
            raise PrecisionLossError(f"orbit point beyond double range at step {i + 1}", i + 1) from e
        err = abs(d) * err + 4 * _EPS * abs(w) * (1 + abs(z))
        z = w
    return out


def _half_line_phase(m: CosineMap) -> float:
    """Rotation theta putting arg(e^{i theta} a) and arg(e^{i theta} b) furthest from vertical.

    The real half-lines map near the directions of lambda*a and lambda*b, and the
    cut delta is vertical, so both directions should be as horizontal as possible.
    """
    u = math.remainder(cmath.phase(m.a), math.pi)
    d = math.remainder(cmath.phase(m.b) - u, math.pi)
    theta = math.remainder(-u - d / 2, math.pi)
    return 0.0 if abs(theta) < 1e-15 else theta


def disjoint_type_scale(m: CosineMap, lam: Optional[complex] = None, samples: int = 1000) -> NormalizedMap:
    K = k_constant(m)
    R = math.hypot(K, math.pi)
    lam_max = K / ((abs(m.a) + abs(m.b)) * math.exp(R))
    if lam is None:
        lam = lam_max * cmath.exp(1j * _half_line_phase(m))
    elif abs(lam) > lam_max * (1 + 1e-12):
        raise ValueError(f"|lambda| must be <= {lam_max:.6g}")
    g = m.scaled(lam)

    sd = singular_data(g)
    if not (abs(sd.v1) < K and abs(sd.v2) < K):
        raise VerificationError("singular values are not inside D_K")
    for j in range(samples):
        y = TWO_PI * j / samples
        for sgn in (1, -1):
            # on Re z = +-K the image must stay inside the disk
            if abs(eval(g, complex(sgn * K, y))) > R:
                raise VerificationError("tract meets the strip |Re z| <= K", complex(sgn * K, y))
            x = K
            while abs(eval(g, complex(sgn * x, y))) <= R:
                x += 0.25
            if abs(g.deriv(complex(sgn * x, y))) <= 2:
                raise VerificationError("|g'| <= 2 in the tract", complex(sgn * x, y))

    delta = Delta.for_map(g)
    proto = NormalizedMap(g, lam, K, R, 0.0, delta, 0j, 0j, k_constant(g), m)
    L_a, L_b = _normalizing_logs(proto)
    proto = NormalizedMap(g, lam, K, R, 0.0, delta, L_a, L_b, k_constant(g), m)
    A = _search_A(proto)
    return NormalizedMap(g, lam, K, R, A, delta, L_a, L_b, k_constant(g), m)


def _normalizing_logs(nm: NormalizedMap) -> tuple[complex, complex]:
    """Constants making the real half-lines far out land in the index-0 domains."""
    g = nm.base
    x = max(2 * nm.R_tract, 40.0) + abs(math.log(abs(g.a))) + abs(math.log(abs(g.b)))
    x = min(x, 600.0)
    wr = eval(g, complex(x))
    wl = eval(g, complex(-x))
    qr = 4 * g.a * g.b / (wr * wr)
    ql = 4 * g.a * g.b / (wl * wl)
    L_a = _ell(nm.delta, wr) + _r_term(qr) - x
    L_b = -x + _ell(nm.delta, wl) + _r_term(ql)
    return L_a, L_b


def _half_lines_ok(nm: NormalizedMap, A: float, N: int, per_line: int) -> bool:
    for n in range(-N, N + 1):
        for j in range(per_line):
            x = A + 50.0 * (j + 1) / per_line
            for side, sgn in ((Side.R, 1), (Side.L, -1)):
                z = complex(sgn * x, TWO_PI * n)
                w = eval(nm.base, z)
                if not abs(w) > nm.R_tract or nm.delta.distance(w) < CUT_TOL:
                    return False
                zz, _ = _branch(nm.base, nm.L_a, nm.L_b, side, n, _ell(nm.delta, w), 1 / w)
                if abs(zz - z) > 1e-9 * (1 + abs(z)):
                    return False
    return True


def _search_A(nm: NormalizedMap, N: int = 8, per_line: int = 64, max_doublings: int = 20) -> float:
    A = nm.K + 1
    for _ in range(max_doublings + 1):
        if _half_lines_ok(nm, A, N, per_line):
            return A
        A *= 2
    raise SearchExhausted("no half-line constant A found", A)


def constant_A(nm: NormalizedMap) -> float:
    return nm.A


# --- cosh and cosh^2 ---------------------------------------------------------------

class SkeletonMap:
    """cosh or cosh^2 with the slit plane  C minus ([v-, v+] U iR>=0)  as branch domain."""

    def __init__(self, kind: str):
        if kind not in ("cosh", "cosh2"):
            raise ValueError(f"unknown map kind {kind!r}")
        self.kind = kind
        self.period = TWO_PI if kind == "cosh" else math.pi
        # real slit between the critical values
        self.slit = (-1.0, 1.0) if kind == "cosh" else (0.0, 1.0)
        # the same map as a cosine map, through w = 2z - 1 for cosh^2
        self.conjugate = CosineMap(0.5, 0.5) if kind == "cosh" else CosineMap(math.e / 2, 0.5 / math.e)
        self.K_expansion = k_constant(self.conjugate)

    def __repr__(self) -> str:
        return f"SkeletonMap({self.kind!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, SkeletonMap) and other.kind == self.kind

    def __hash__(self) -> int:
        return hash(self.kind)

    def spec(self) -> str:
        return self.kind

    def __call__(self, z: complex) -> complex:
        _check_range(z if self.kind == "cosh" else 2 * z)
        if self.kind == "cosh":
            return cmath.cosh(z)
        c = cmath.cosh(z)
        return c * c

    def deriv(self, z: complex) -> complex:
        return cmath.sinh(z) if self.kind == "cosh" else cmath.sinh(2 * z)

    def deriv2(self, z: complex) -> complex:
        return cmath.cosh(z) if self.kind == "cosh" else 2 * cmath.cosh(2 * z)

    def to_conjugate(self, z: complex) -> complex:
        return z if self.kind == "cosh" else 2 * z - 1

    def in_expansion_region(self, z: complex) -> bool:
        return abs(self.to_conjugate(z).real) > self.K_expansion

    # branch formulas

    @staticmethod
    def _window(theta: float, left: bool = False) -> float:
        # atan2 rounds a tiny negative real part to exactly pi/2; ``left`` restores the side
        if theta > math.pi / 2 or (left and theta == math.pi / 2):
            return theta - TWO_PI
        return theta

    def _H(self, ell: complex, inv_w: complex) -> complex:
        if self.kind == "cosh":
            # factored to avoid cancellation near the critical values
            return ell + cmath.log(1 + cmath.sqrt((1 - inv_w) * (1 + inv_w)))
        root = cmath.sqrt(4 * (1 - inv_w)) / (2 - inv_w)
        return 0.5 * (ell + math.log(4) + cmath.log(1 - inv_w / 2) + cmath.log((1 + root) / 2))

    def _H_at(self, w: complex) -> complex:
        ell = complex(math.log(abs(w)), self._window(cmath.phase(w), w.real < 0))
        return self._H(ell, 1 / w)

    def cut_distance(self, w: complex) -> tuple[float, complex, complex]:
        """Distance to the slit, nearest slit point, and unit normal there."""
        lo, hi = self.slit
        x = min(max(w.real, lo), hi)
        d_seg = abs(w - x)
        p_ray = complex(0, max(w.imag, 0.0))
        d_ray = abs(w - p_ray)
        if d_seg <= d_ray:
            return d_seg, complex(x), 1j
        return d_ray, p_ray, 1 + 0j

    def one_sided(self, w: complex, v: complex, tol: float = CUT_TOL) -> complex:
        """Replace a point on the slit by one just off it, on the side v points to.

        Only the normal coordinate is changed, so a point close to a critical
        value keeps its distance from it.
        """
        d, p, nrm = self.cut_distance(w)
        if d >= tol:
            return w
        if abs(w) < tol and v != 0:
            # junction of segment and ray: the direction picks the sector
            u = v / abs(v)
            if self.cut_distance(u)[0] < 1e-9:
                u *= cmath.exp(1e-6j)
            return max(abs(w), 1e-100) * u
        eta = 1e-100 * max(1.0, abs(p))
        comp = (v * nrm.conjugate()).real
        if v == 0 or abs(comp) <= 1e-12 * abs(v):
            comp = ((w - p) * nrm.conjugate()).real
        side = 1.0 if comp >= 0 else -1.0
        if nrm == 1j:
            return complex(w.real, side * eta)
        return complex(side * eta, w.imag)

    def branch(self, s: Symbol, w: complex, v: complex = 0j, tol: float = CUT_TOL) -> complex:
        """Inverse branch for s; on the slit the side is chosen by direction v."""
        h = self._H_at(self.one_sided(complex(w), v, tol))
        base = h if s.side is Side.R else -h
        return base + self.period * s.n * 1j

    def branch_log(self, s: Symbol, log_w: complex) -> complex:
        """Branch from log w for |w| beyond double range."""
        phi = math.remainder(log_w.imag, TWO_PI)
        ell = complex(log_w.real, self._window(math.pi if phi == -math.pi else phi))
        h = self._H(ell, _inv_from_log(log_w))
        base = h if s.side is Side.R else -h
        return base + self.period * s.n * 1j

    def symbol_of(self, z: complex, tol: float = CUT_TOL) -> Symbol:
        """Fundamental domain containing z (z off the preimage of the slit)."""
        if abs(z.real) < tol:
            raise BoundaryError("point on the imaginary axis", z)
        side = Side.R if z.real > 0 else Side.L
        w = self(z)
        d, _, _ = self.cut_distance(w)
        if d < tol:
            raise BoundaryError("point on a preimage of the slit", z)
        h = self._H_at(w)
        base = h if side is Side.R else -h
        n = round((z.imag - base.imag) / self.period)
        if abs(base + self.period * n * 1j - z) > 1e-7 * (1 + abs(z)):
            raise BoundaryError("point does not match its side's branch", z)
        return Symbol(n, side)


COSH = SkeletonMap("cosh")
COSH2 = SkeletonMap("cosh2")

AnyMap = Union[NormalizedMap, SkeletonMap]


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise ValueError(f"bad complex number {text!r}") from None


def _fmt_complex(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    return f"{c.real!r}{'+' if c.imag >= 0 else '-'}{abs(c.imag)!r}i"


def parse_map_spec(spec: str) -> Union[CosineMap, SkeletonMap]:
    s = spec.strip()
    if s in ("cosh", "cosh2"):
        return SkeletonMap(s)
    parts = dict(p.split("=", 1) for p in s.split(",") if "=" in p)
    if set(parts) != {"a", "b"}:
        raise DomainError(f"map spec must be cosh, cosh2 or a=..,b=.. (got {spec!r})", spec)
    return CosineMap(parse_complex(parts["a"]), parse_complex(parts["b"]))


def resolve_map(spec: str) -> AnyMap:
    """Map spec to the object rays are traced on; general maps get scaled."""
    m = parse_map_spec(spec)
    if isinstance(m, SkeletonMap):
        return m
    return disjoint_type_scale(m)
