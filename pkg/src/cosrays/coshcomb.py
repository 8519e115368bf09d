"""Partition strips, itineraries and ray overlaps for cosh and cosh^2."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

from .address import (
    ExternalAddress,
    Ordering,
    Side,
    Sign,
    SignedAddress,
    Symbol,
    canonical,
    lex_compare,
    shift,
    shift_n,
)
from .cosine import CUT_TOL, SkeletonMap
from .errors import BoundaryError, EvalOverflow, NotOnSkeletonError

MAP_KINDS = ("cosh", "cosh2")
R0 = Symbol(0, Side.R)
L0 = Symbol(0, Side.L)
ZERO_R = ExternalAddress((), (R0,))          # 0̄_R
ZERO_L_ZERO_R = ExternalAddress((L0,), (R0,))  # 0_L 0̄_R


def _check_kind(kind: str) -> str:
    if kind not in MAP_KINDS:
        raise ValueError(f"map kind must be one of {MAP_KINDS}, got {kind!r}")
    return kind


def strip_height(kind: str) -> float:
    return math.pi if _check_kind(kind) == "cosh" else math.pi / 2


# --- partition -------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class PartitionComponent:
    map_kind: str
    K: int

    def __str__(self) -> str:
        return f"U{self.K}"

    def contains(self, z: complex) -> bool:
        h = strip_height(self.map_kind)
        return self.K * h < z.imag < (self.K + 1) * h


def component_of(kind: str, z: complex, tol: float = CUT_TOL) -> PartitionComponent:
    h = strip_height(kind)
    q = z.imag / h
    line = round(q)
    if abs(z.imag - line * h) < tol:
        raise BoundaryError(f"point on the partition line Im z = {line} * {h:.6g}", line)
    return PartitionComponent(kind, math.floor(q))


def _sign_component(side: Side, line: int, sign: Sign) -> int:
    # R-ray: + above its line, - below; L-ray the other way round
    up = (sign is Sign.PLUS) == (side is Side.R)
    return line if up else line - 1


def strip_index(s: ExternalAddress, sign: Sign) -> int:
    """Strip containing Gamma(s, sign), read off from s0 and the order of sigma(s)."""
    s0 = s.first
    tail = shift(s)
    n = s0.n
    if tail == ZERO_R:
        return _sign_component(s0.side, 2 * n, sign)
    if tail == ZERO_L_ZERO_R:
        line = 2 * n - 1 if s0.side is Side.R else 2 * n + 1
        return _sign_component(s0.side, line, sign)
    above = lex_compare(tail, ZERO_R) is Ordering.GT
    below = lex_compare(tail, ZERO_L_ZERO_R) is Ordering.LT
    if s0.side is Side.R:
        return 2 * n if above else (2 * n - 2 if below else 2 * n - 1)
    return 2 * n - 1 if above else (2 * n + 1 if below else 2 * n)


@dataclass(frozen=True)
class Itinerary:
    map_kind: str
    preperiod: tuple[PartitionComponent, ...]
    period: tuple[PartitionComponent, ...]

    def at(self, k: int) -> PartitionComponent:
        p = len(self.preperiod)
        return self.preperiod[k] if k < p else self.period[(k - p) % len(self.period)]

    def unroll(self, count: int) -> list[PartitionComponent]:
        return [self.at(k) for k in range(count)]

    def to_json(self) -> dict:
        return {
            "preperiod": [c.K for c in self.preperiod],
            "period": [c.K for c in self.period],
            "map": self.map_kind,
        }

    def __str__(self) -> str:
        return " ".join(map(str, self.preperiod)) + "|" + " ".join(map(str, self.period))


def itinerary(kind: str, sa: SignedAddress) -> Itinerary:
    _check_kind(kind)
    s = sa.addr
    p, q = len(s.preperiod), len(s.period)
    comps = []
    cur = s
    for _ in range(p + q):
        comps.append(PartitionComponent(kind, strip_index(cur, sa.sign)))
        cur = shift(cur)
    pre, per = canonical(comps[:p], comps[p:])
    return Itinerary(kind, pre, per)


def itinerary_prefix(kind: str, sa: SignedAddress, length: int) -> list[PartitionComponent]:
    return itinerary(kind, sa).unroll(length)


# --- overlaps -------------------------------------------------------------------------

class OverlapKind(str, enum.Enum):
    SAME_RAY = "SameRay"
    TAIL_FROM_CRITICAL = "TailFromCritical"
    VERTICAL_SEGMENT = "VerticalSegment"
    PREIMAGE_ARC = "PreimageArc"
    DEEPER_ARC = "DeeperArc"
    NONE = "None"


@dataclass(frozen=True)
class OverlapDescriptor:
    kind: OverlapKind
    K: Optional[int] = None
    sign: Optional[Sign] = None
    P: Optional[int] = None
    side: Optional[Side] = None
    depth: Optional[int] = None
    inner: Optional["OverlapDescriptor"] = None
    critical_point: Optional[complex] = None

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.kind is OverlapKind.TAIL_FROM_CRITICAL:
            out["depth"] = self.depth
            out["critical_point"] = [self.critical_point.real, self.critical_point.imag]
        elif self.kind is OverlapKind.VERTICAL_SEGMENT:
            out["K"] = self.K
            out["sign"] = self.sign.value
        elif self.kind is OverlapKind.PREIMAGE_ARC:
            out["K"] = self.K
            out["P"] = self.P
            out["side"] = self.side.value
            out["sign"] = self.sign.value
        elif self.kind is OverlapKind.DEEPER_ARC:
            out["depth"] = self.depth
            out["inner"] = self.inner.to_json()
        return out


NO_OVERLAP = OverlapDescriptor(OverlapKind.NONE)
SAME_RAY = OverlapDescriptor(OverlapKind.SAME_RAY)


def vertical_segment(kind: str, k: int, sign: Sign) -> tuple[complex, complex]:
    """Endpoints of V_k(sign) on the imaginary axis (same for both maps)."""
    return complex(0, k * math.pi), complex(0, (k + sign.unit / 2) * math.pi)


def _v_in_slit(k: int, sign: Sign) -> bool:
    # V_k(sign) inside iR>=0, where inverse branches jump
    return k >= 1 or (k == 0 and sign is Sign.PLUS)


def _base_pairs(kind: str, tail_a: ExternalAddress, tail_b: ExternalAddress) -> Optional[int]:
    """k such that {tail_a, tail_b} = {lambda_k, rho_k}, with tail_a = lambda_k; None otherwise."""
    a0, b0 = tail_a.first, tail_b.first
    ta, tb = shift(tail_a), shift(tail_b)
    if a0.side is Side.L and b0.side is Side.R and ta == ZERO_R and tb == ZERO_R and a0.n == b0.n:
        return 2 * a0.n if kind == "cosh" else a0.n
    if (kind == "cosh" and a0.side is Side.L and b0.side is Side.R and ta == ZERO_L_ZERO_R
            and tb == ZERO_L_ZERO_R and b0.n == a0.n + 1):
        return 2 * a0.n + 1
    return None


def _vertical_case(kind: str, a: SignedAddress, b: SignedAddress) -> Optional[OverlapDescriptor]:
    # pair {(lambda, -sign), (rho, sign)} overlaps on V_k(sign)
    for lam, rho in ((a, b), (b, a)):
        k = _base_pairs(kind, lam.addr, rho.addr)
        if k is not None and lam.sign is rho.sign.flip():
            return OverlapDescriptor(OverlapKind.VERTICAL_SEGMENT, K=k, sign=rho.sign)
    return None


def _preimage_case(kind: str, a: SignedAddress, b: SignedAddress) -> Optional[OverlapDescriptor]:
    for lam, rho in ((a, b), (b, a)):
        la, ra = lam.addr.first, rho.addr.first
        if la.side is not ra.side:
            continue
        k = _base_pairs(kind, shift(lam.addr), shift(rho.addr))
        if k is None or lam.sign is not rho.sign.flip() or not _v_in_slit(k, rho.sign):
            continue
        if la.side is Side.R and la.n == ra.n + 1:
            return OverlapDescriptor(OverlapKind.PREIMAGE_ARC, K=k, sign=rho.sign, P=ra.n, side=Side.R)
        if la.side is Side.L and ra.n == la.n + 1:
            return OverlapDescriptor(OverlapKind.PREIMAGE_ARC, K=k, sign=rho.sign, P=la.n, side=Side.L)
    return None


def _table_case(kind: str, a: SignedAddress, b: SignedAddress) -> Optional[OverlapDescriptor]:
    return _vertical_case(kind, a, b) or _preimage_case(kind, a, b)


def _split_point(kind: str, s: ExternalAddress) -> Optional[complex]:
    """Critical point where Gamma(s, +) and Gamma(s, -) separate, for base forms."""
    s0, tail = s.first, shift(s)
    if tail == ZERO_R:
        return complex(0, (2 if kind == "cosh" else 1) * s0.n * math.pi)
    if kind == "cosh" and tail == ZERO_L_ZERO_R:
        k = s0.n if s0.side is Side.L else s0.n - 1
        return complex(0, (2 * k + 1) * math.pi)
    return None


def split_anchor(kind: str, s: ExternalAddress) -> Optional[tuple[int, complex]]:
    """(m, c): the first shift of s that is a base form and its critical point."""
    if s.period != (R0,):
        return None
    for m in range(len(s.preperiod) + 2):
        c = _split_point(kind, shift_n(s, m))
        if c is not None:
            return m, c
    return None


def _common_prefix(a: ExternalAddress, b: ExternalAddress) -> int:
    n = 0
    while a.symbol_at(n) == b.symbol_at(n):
        n += 1
    return n


def overlap(kind: str, sa: SignedAddress, sb: SignedAddress) -> OverlapDescriptor:
    _check_kind(kind)
    if sa.addr == sb.addr:
        if sa.sign is sb.sign:
            return SAME_RAY
        anchor = split_anchor(kind, sa.addr)
        if anchor is None:
            return SAME_RAY
        return OverlapDescriptor(OverlapKind.TAIL_FROM_CRITICAL, depth=anchor[0], critical_point=anchor[1])
    n = _common_prefix(sa.addr, sb.addr)
    ta = SignedAddress(shift_n(sa.addr, n), sa.sign)
    tb = SignedAddress(shift_n(sb.addr, n), sb.sign)
    inner = _table_case(kind, ta, tb)
    if inner is None:
        return NO_OVERLAP
    if n == 0:
        return inner
    if inner.kind is OverlapKind.VERTICAL_SEGMENT and _v_in_slit(inner.K, inner.sign):
        # the two rays reach the slit from opposite sides and separate on pullback
        return NO_OVERLAP
    return OverlapDescriptor(OverlapKind.DEEPER_ARC, depth=n, inner=inner)


def lands_together(kind: str, sa: SignedAddress, sb: SignedAddress) -> bool:
    """Distinct rays of these maps never share a landing point."""
    return overlap(kind, sa, sb).kind is OverlapKind.SAME_RAY


def same_itinerary(kind: str, sa: SignedAddress, sb: SignedAddress) -> bool:
    return itinerary(kind, sa) == itinerary(kind, sb)


# --- table instances ---------------------------------------------------------------------

def _a(pre, per=(R0,)) -> ExternalAddress:
    return ExternalAddress(pre, per)


def base_pair(kind: str, k: int) -> tuple[ExternalAddress, ExternalAddress]:
    """(lambda_k, rho_k), the two addresses whose rays meet along V_k."""
    if kind == "cosh2":
        return _a((Symbol(k, Side.L),)), _a((Symbol(k, Side.R),))
    K, odd = divmod(k, 2)
    if not odd:
        return _a((Symbol(K, Side.L),)), _a((Symbol(K, Side.R),))
    return _a((Symbol(K, Side.L), L0)), _a((Symbol(K + 1, Side.R), L0))


def vertical_pairs(kind: str, k: int, sign: Sign) -> tuple[SignedAddress, SignedAddress]:
    lam, rho = base_pair(kind, k)
    return SignedAddress(lam, sign.flip()), SignedAddress(rho, sign)


def preimage_pairs(kind: str, k: int, sign: Sign, P: int, side: Side) -> tuple[SignedAddress, SignedAddress]:
    lam, rho = base_pair(kind, k)
    if side is Side.R:
        la, ra = Symbol(P + 1, Side.R), Symbol(P, Side.R)
    else:
        la, ra = Symbol(P, Side.L), Symbol(P + 1, Side.L)
    return SignedAddress(lam.prepend(la), sign.flip()), SignedAddress(rho.prepend(ra), sign)


# --- signed addresses through a point -------------------------------------------------------

def _line_rays(kind: str, line: int, x: float, tol: float) -> set[SignedAddress]:
    K, odd = divmod(line, 2)
    if not odd:
        r_ray, l_ray = _a((Symbol(K, Side.R),)), _a((Symbol(K, Side.L),))
    else:
        r_ray, l_ray = _a((Symbol(K + 1, Side.R), L0)), _a((Symbol(K, Side.L), L0))
    out: set[SignedAddress] = set()
    if x > -tol:
        out |= {SignedAddress(r_ray, Sign.PLUS), SignedAddress(r_ray, Sign.MINUS)}
    if x < tol:
        out |= {SignedAddress(l_ray, Sign.PLUS), SignedAddress(l_ray, Sign.MINUS)}
    return out


def _vertical_rays(kind: str, y: float, tol: float) -> set[SignedAddress]:
    k0 = math.floor(y / math.pi)
    out: set[SignedAddress] = set()
    for k in range(k0 - 1, k0 + 3):
        for sign in (Sign.PLUS, Sign.MINUS):
            lo, hi = vertical_segment(kind, k, sign)
            if min(lo.imag, hi.imag) - tol <= y <= max(lo.imag, hi.imag) + tol:
                out |= set(vertical_pairs(kind, k, sign))
    return out


def _depth0(kind: str, z: complex, tol: float) -> set[SignedAddress]:
    h = strip_height(kind)
    out: set[SignedAddress] = set()
    line = round(z.imag / h)
    if abs(z.imag - line * h) < tol:
        out |= _line_rays(kind, line, z.real, tol)
    if abs(z.real) < tol:
        out |= _vertical_rays(kind, z.imag, tol)
    return out


def _preimage_rays(sm: SkeletonMap, z: complex, w: complex, tol: float) -> set[SignedAddress]:
    """Rays through z when f(z) lies on iR>0, read from the preimage-arc table."""
    side = Side.R if z.real > 0 else Side.L
    ns = set()
    for v in (1 + 0j, -1 + 0j):
        for probe in (Symbol(0, side),):
            b = sm.branch(probe, w, v)
            n = round((z.imag - b.imag) / sm.period)
            if abs(b + sm.period * n * 1j - z) < 1e-6 * (1 + abs(z)):
                ns.add(n)
    if len(ns) != 2:
        raise NotOnSkeletonError("point is not on a preimage arc", z)
    P = min(ns)
    out: set[SignedAddress] = set()
    kind = sm.kind
    for k in range(math.floor(w.imag / math.pi) - 1, math.floor(w.imag / math.pi) + 2):
        for sign in (Sign.PLUS, Sign.MINUS):
            lo, hi = vertical_segment(kind, k, sign)
            if not _v_in_slit(k, sign):
                continue
            if min(lo.imag, hi.imag) - tol <= w.imag <= max(lo.imag, hi.imag) + tol:
                out |= set(preimage_pairs(kind, k, sign, P, side))
    return out


def signed_addresses_at(kind: str, z: complex, depth: int = 2, tol: float = CUT_TOL) -> set[SignedAddress]:
    """Signed addresses whose canonical rays pass through z."""
    _check_kind(kind)
    if not 0 <= depth <= 2:
        raise ValueError("depth must be 0, 1 or 2")
    z = complex(z)
    found = _depth0(kind, z, tol)
    if found:
        return found
    if depth == 0:
        raise NotOnSkeletonError("point is not on the skeleton", z)
    sm = SkeletonMap(kind)
    try:
        w = sm(z)
    except EvalOverflow:
        raise NotOnSkeletonError("point is not on the skeleton", z) from None
    wtol = tol * (1 + abs(w))
    if abs(w.real) < wtol and w.imag > 0:
        return _preimage_rays(sm, z, complex(0.0, w.imag), wtol)
    try:
        inner = signed_addresses_at(kind, w, depth - 1, wtol)
    except NotOnSkeletonError:
        raise NotOnSkeletonError("point is not on the skeleton", z) from None
    s0 = sm.symbol_of(z)
    return {SignedAddress(a.addr.prepend(s0), a.sign) for a in inner}


AddressLike = Union[SignedAddress, ExternalAddress]
