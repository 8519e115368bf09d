"""Fundamental-domain symbols and eventually periodic external addresses."""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from typing import Hashable, Iterator, Sequence, TypeVar

T = TypeVar("T", bound=Hashable)


class Ordering(enum.IntEnum):
    LT = -1
    EQ = 0
    GT = 1


class Side(str, enum.Enum):
    L = "L"
    R = "R"


@dataclass(frozen=True, order=False)
class Symbol:
    n: int
    side: Side

    def __post_init__(self):
        if not isinstance(self.side, Side):
            object.__setattr__(self, "side", Side(self.side))
        object.__setattr__(self, "n", int(self.n))

    @property
    def magnitude(self) -> int:
        return abs(self.n)

    @property
    def index(self) -> int:
        return self.n

    def key(self) -> tuple[int, int]:
        # L block first (decreasing n), then R block (increasing n)
        return (0, -self.n) if self.side is Side.L else (1, self.n)

    def __str__(self) -> str:
        return f"{self.n}{self.side.value}"

    def __repr__(self) -> str:
        return f"Symbol({self.n}, {self.side.value})"


def sym(text: str) -> Symbol:
    """Shorthand: sym("3L") -> Symbol(3, L)."""
    text = text.strip().replace("−", "-")
    return Symbol(int(text[:-1]), Side(text[-1]))


def _cmp(a, b) -> Ordering:
    return Ordering.LT if a < b else (Ordering.GT if a > b else Ordering.EQ)


def compare_symbols(a: Symbol, b: Symbol) -> Ordering:
    return _cmp(a.key(), b.key())


def primitive_root(word: Sequence[T]) -> tuple[T, ...]:
    word = tuple(word)
    k = len(word)
    for d in range(1, k + 1):
        if k % d == 0 and word[:d] * (k // d) == word:
            return word[:d]
    return word


def canonical(pre: Sequence[T], per: Sequence[T]) -> tuple[tuple[T, ...], tuple[T, ...]]:
    """Minimal period, then minimal preperiod, for an eventually periodic word."""
    per = primitive_root(per)
    if not per:
        raise ValueError("empty period")
    pre = list(pre)
    while pre and pre[-1] == per[-1]:
        pre.pop()
        per = (per[-1],) + per[:-1]
    return tuple(pre), per


class ExternalAddress:
    """Eventually periodic sequence of symbols ``pre | per``, stored canonically."""

    __slots__ = ("preperiod", "period", "_hash")

    def __init__(self, preperiod: Sequence[Symbol], period: Sequence[Symbol]):
        pre, per = canonical(tuple(preperiod), tuple(period))
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)
        object.__setattr__(self, "_hash", hash((pre, per)))

    def __setattr__(self, name, value):
        raise AttributeError("ExternalAddress is immutable")

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExternalAddress):
            return NotImplemented
        return self.preperiod == other.preperiod and self.period == other.period

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "ExternalAddress") -> bool:
        return lex_compare(self, other) is Ordering.LT

    def __repr__(self) -> str:
        return f"ExternalAddress({format_address(self)!r})"

    def __str__(self) -> str:
        return format_address(self)

    def symbol_at(self, k: int) -> Symbol:
        if k < 0:
            raise IndexError(k)
        p = len(self.preperiod)
        if k < p:
            return self.preperiod[k]
        return self.period[(k - p) % len(self.period)]

    def unroll(self, count: int) -> list[Symbol]:
        return [self.symbol_at(k) for k in range(count)]

    def __iter__(self) -> Iterator[Symbol]:
        yield from self.preperiod
        while True:
            yield from self.period

    @property
    def first(self) -> Symbol:
        return self.symbol_at(0)

    def prepend(self, s: Symbol) -> "ExternalAddress":
        return ExternalAddress((s,) + self.preperiod, self.period)

    def is_periodic(self) -> bool:
        return not self.preperiod


def lex_compare(s: ExternalAddress, t: ExternalAddress) -> Ordering:
    if s == t:
        return Ordering.EQ
    horizon = (
        len(s.preperiod)
        + len(t.preperiod)
        + len(s.period) * len(t.period) // math.gcd(len(s.period), len(t.period))
    )
    for k in range(horizon):
        c = compare_symbols(s.symbol_at(k), t.symbol_at(k))
        if c is not Ordering.EQ:
            return c
    raise AssertionError("distinct canonical addresses agree past the periodicity bound")


def cyclic_between(s: ExternalAddress, alpha: ExternalAddress, tau: ExternalAddress) -> bool:
    """True iff [s, alpha, tau] is positively oriented in the cyclic order."""
    if s == alpha or alpha == tau or s == tau:
        raise ValueError("cyclic order needs three distinct addresses")
    lt = lambda x, y: lex_compare(x, y) is Ordering.LT  # noqa: E731
    return (lt(s, alpha) and lt(alpha, tau)) or (lt(alpha, tau) and lt(tau, s)) or (
        lt(tau, s) and lt(s, alpha)
    )


def shift(s: ExternalAddress) -> ExternalAddress:
    if s.preperiod:
        return ExternalAddress(s.preperiod[1:], s.period)
    return ExternalAddress((), s.period[1:] + s.period[:1])


def shift_n(s: ExternalAddress, n: int) -> ExternalAddress:
    for _ in range(n):
        s = shift(s)
    return s


class Sign(str, enum.Enum):
    MINUS = "-"
    PLUS = "+"

    def flip(self) -> "Sign":
        return Sign.PLUS if self is Sign.MINUS else Sign.MINUS

    @property
    def unit(self) -> int:
        return 1 if self is Sign.PLUS else -1


@dataclass(frozen=True)
class SignedAddress:
    addr: ExternalAddress
    sign: Sign

    def __post_init__(self):
        if not isinstance(self.sign, Sign):
            object.__setattr__(self, "sign", Sign(self.sign))

    def __str__(self) -> str:
        return f"{format_address(self.addr)},{self.sign.value}"


# --- text form -------------------------------------------------------------

class AddressSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte {offset})")
        self.offset = offset


_TOKEN = re.compile(r"\s*([-−]?)(\d+)\s*([LR])")


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _tokens(text: str, start: int, stop: int) -> list[Symbol]:
    out = []
    pos = start
    while pos < stop:
        if text[pos:stop].strip() == "":
            break
        m = _TOKEN.match(text, pos, stop)
        if m is None:
            bad = pos + (len(text[pos:stop]) - len(text[pos:stop].lstrip()))
            raise AddressSyntaxError(f"expected token at {text[bad:bad + 1]!r}", _byte_offset(text, bad))
        n = int(m.group(2)) * (-1 if m.group(1) else 1)
        out.append(Symbol(n, Side(m.group(3))))
        pos = m.end()
    return out


def parse_address(text: str) -> ExternalAddress:
    bar = text.find("|")
    if bar < 0:
        raise AddressSyntaxError("missing '|'", _byte_offset(text, len(text)))
    if "|" in text[bar + 1:]:
        raise AddressSyntaxError("second '|'", _byte_offset(text, text.index("|", bar + 1)))
    pre = _tokens(text, 0, bar)
    per = _tokens(text, bar + 1, len(text))
    if not per:
        raise AddressSyntaxError("empty period", _byte_offset(text, len(text)))
    return ExternalAddress(pre, per)


def parse_signed(text: str) -> SignedAddress:
    body, comma, tail = text.rpartition(",")
    if not comma:
        raise AddressSyntaxError("missing ',+' or ',-'", _byte_offset(text, len(text)))
    sign = tail.strip().replace("−", "-")
    if sign not in ("+", "-"):
        raise AddressSyntaxError(f"bad sign {tail!r}", _byte_offset(text, len(body) + 1))
    return SignedAddress(parse_address(body), Sign(sign))


def format_address(s: ExternalAddress) -> str:
    return " ".join(map(str, s.preperiod)) + "|" + " ".join(map(str, s.period))


def addr(text: str) -> ExternalAddress:
    return parse_address(text)


def signed(text: str) -> SignedAddress:
    return parse_signed(text)
