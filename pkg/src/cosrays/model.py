"""The model map F(t, s) = (e^t - 1 - 2 pi |s_1|, shift(s)) on potentials and addresses."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .address import ExternalAddress, Sign, Symbol, parse_address, format_address, shift

TWO_PI = 2.0 * math.pi
# e^t overflows past this; larger potentials are carried as +inf
EXP_LIMIT = 709.0
ROUNDOFF = 8 * 2.0 ** -52


@dataclass(frozen=True)
class ModelPoint:
    t: float
    addr: ExternalAddress

    def __post_init__(self):
        if not self.t >= 0:
            raise ValueError(f"potential must be nonnegative, got {self.t}")

    def to_json(self) -> dict:
        return {"t": self.t, "addr": format_address(self.addr)}

    @classmethod
    def from_json(cls, obj: dict) -> "ModelPoint":
        return cls(float(obj["t"]), parse_address(obj["addr"]))


@dataclass(frozen=True)
class SignedModelPoint:
    point: ModelPoint
    sign: Sign


@dataclass(frozen=True)
class OutOfSpace:
    deficit: float


@dataclass(frozen=True)
class Member:
    pass


@dataclass(frozen=True)
class NonMember:
    step: int


@dataclass(frozen=True)
class Undecided:
    pass


class OutOfSpaceError(ArithmeticError):
    def __init__(self, index: int, deficit: float):
        super().__init__(f"step {index} leaves the model space (deficit {deficit:.6g})")
        self.index = index
        self.deficit = deficit


def potential_step(t: float, s1: Symbol) -> float:
    if t > EXP_LIMIT:
        return math.inf
    drop = TWO_PI * s1.magnitude
    T = math.expm1(t) - drop
    # a few ulps below zero is rounding in expm1, not a deficit
    if -ROUNDOFF * (1.0 + drop) < T < 0.0:
        return 0.0
    return T


def step(x: ModelPoint) -> Union[ModelPoint, OutOfSpace]:
    T = potential_step(x.t, x.addr.symbol_at(1))
    if T < 0:
        return OutOfSpace(T)
    return ModelPoint(T, shift(x.addr))


def invert_t(T_next: float, s1: Symbol) -> float:
    if T_next < 0:
        raise ValueError("T_next must be nonnegative")
    return math.log1p(T_next + TWO_PI * s1.magnitude)


def step_signed(x: SignedModelPoint) -> Union[SignedModelPoint, OutOfSpace]:
    y = step(x.point)
    if isinstance(y, OutOfSpace):
        return y
    return SignedModelPoint(y, x.sign)


def _backward(mags: list[int], r: float) -> float:
    """r_j = log(1 + 2 pi m_{j+1} + r_{j+1}) run over ``mags`` from the end."""
    for m in reversed(mags):
        r = max(0.0, math.log1p(TWO_PI * m + r))
    return r


def t_min(s: ExternalAddress, tol: float = 1e-12, max_periods: int = 100000) -> float:
    """Minimal potential t_s with (t_s, s) in J(F).

    The horizon grows one period at a time; since the period return map is
    monotone and contracting, the values increase to t_s.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    p = len(s.preperiod)
    # r_j uses the magnitude of symbol j+1; j runs over the preperiod, then periods
    head = [s.symbol_at(j + 1).magnitude for j in range(p)]
    cyc = [s.symbol_at(p + j + 1).magnitude for j in range(len(s.period))]
    r_per = 0.0
    prev = _backward(head, r_per)
    for _ in range(max_periods):
        r_per = _backward(cyc, r_per)
        cur = _backward(head, r_per)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    raise ArithmeticError("t_min recursion did not settle")


def t_min_horizon(s: ExternalAddress, horizon: int) -> float:
    """Backward recursion with r_horizon = 0 (monotone in the horizon)."""
    mags = [s.symbol_at(j + 1).magnitude for j in range(horizon)]
    return _backward(mags, 0.0)


def in_JF(x: ModelPoint, horizon: int = 200, use_t_min: bool = True, tol: float = 1e-12):
    """Membership of x in J(F).

    With ``use_t_min`` the answer is decided by comparing against t_min and
    the failing step index is located by iteration.  Without it, only the
    first ``horizon`` steps are inspected and the result may be Undecided.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if use_t_min and x.t >= t_min(x.addr, tol) - tol:
        return Member()
    y = x
    limit = horizon if not use_t_min else 100000
    for k in range(1, limit + 1):
        y = step(y)
        if isinstance(y, OutOfSpace):
            return NonMember(k)
        if math.isinf(y.t):
            return Member()
    return Undecided()


def orbit(x: ModelPoint, n: int) -> list[ModelPoint]:
    out = [x]
    for k in range(1, n + 1):
        y = step(out[-1])
        if isinstance(y, OutOfSpace):
            raise OutOfSpaceError(k, y.deficit)
        out.append(y)
    return out


def potentials(x: ModelPoint, n: int) -> list[float]:
    """First coordinates of the first n+1 iterates; stops early at +inf."""
    ts = [x.t]
    s = x.addr
    for _ in range(n):
        if math.isinf(ts[-1]):
            break
        T = potential_step(ts[-1], s.symbol_at(1))
        if T < 0:
            raise OutOfSpaceError(len(ts), T)
        ts.append(T)
        s = shift(s)
    return ts
