import itertools

import pytest
from hypothesis import given, strategies as st

from cosrays.address import (
    AddressSyntaxError,
    ExternalAddress,
    Ordering,
    Side,
    Sign,
    Symbol,
    addr,
    canonical,
    compare_symbols,
    cyclic_between,
    format_address,
    lex_compare,
    parse_address,
    parse_signed,
    primitive_root,
    shift,
    shift_n,
    sym,
)

symbols = st.builds(Symbol, st.integers(-6, 6), st.sampled_from(list(Side)))
addresses = st.builds(
    ExternalAddress,
    st.lists(symbols, max_size=3),
    st.lists(symbols, min_size=1, max_size=3),
)


@pytest.mark.parametrize("a, b, expected", [
    ("3R", "5R", Ordering.LT),
    ("5L", "3L", Ordering.LT),
    ("7L", "-9R", Ordering.LT),
    ("2R", "2R", Ordering.EQ),
    ("5R", "3R", Ordering.GT),
])
def test_symbol_order_examples(a, b, expected):
    assert compare_symbols(sym(a), sym(b)) == expected


@pytest.mark.parametrize("a, b, expected", [
    ("|0R", "|1R", Ordering.LT),
    ("0L|0R", "|0R", Ordering.LT),
    ("|0R", "0R|0R", Ordering.EQ),
])
def test_lex_compare_examples(a, b, expected):
    assert lex_compare(addr(a), addr(b)) == expected


def test_canonical_agrees_with_unrolled_words():
    assert addr("|0R").unroll(10) == addr("0R|0R").unroll(10)
    assert addr("1R|2R 1R") == addr("|1R 2R")
    assert addr("|1R 1R") == addr("|1R")


@pytest.mark.parametrize("triple, expected", [
    (("|0R", "|1R", "|2R"), True),
    (("|2R", "|0R", "|1R"), True),
    (("|0R", "|2R", "|1R"), False),
])
def test_cyclic_examples(triple, expected):
    assert cyclic_between(*map(addr, triple)) is expected


def test_cyclic_needs_distinct():
    with pytest.raises(ValueError):
        cyclic_between(addr("|0R"), addr("|0R"), addr("|1R"))


@pytest.mark.parametrize("text, expected", [
    ("0L|0R", "|0R"),
    ("|1R 2R", "|2R 1R"),
    ("3L 1R|0R", "1R|0R"),
])
def test_shift_examples(text, expected):
    assert shift(addr(text)) == addr(expected)


def test_parse_examples():
    s = parse_address("0L|0R")
    assert s.preperiod == (Symbol(0, Side.L),) and s.period == (Symbol(0, Side.R),)
    s = parse_address("|-3L")
    assert s.preperiod == () and s.period == (Symbol(-3, Side.L),)
    assert parse_address("|−3L") == s


@pytest.mark.parametrize("text, offset", [
    ("|", 1),
    ("0L 0R", 5),
    ("0L|0R|1R", 5),
    ("0X|0R", 0),
    ("0L|0R 7Q", 6),
])
def test_parse_errors_report_offsets(text, offset):
    with pytest.raises(AddressSyntaxError) as exc:
        parse_address(text)
    assert exc.value.offset == offset


def test_parse_signed():
    sa = parse_signed("0L|0R,-")
    assert sa.sign is Sign.MINUS and sa.addr == addr("0L|0R")
    assert str(sa) == "0L|0R,-"
    with pytest.raises(AddressSyntaxError):
        parse_signed("|0R")
    with pytest.raises(AddressSyntaxError):
        parse_signed("|0R,x")


def test_sign_flip():
    assert Sign.PLUS.flip() is Sign.MINUS and Sign.MINUS.unit == -1


def test_immutable():
    s = addr("|0R")
    with pytest.raises(AttributeError):
        s.period = ()


def test_primitive_root_and_canonical():
    assert primitive_root("abab") == ("a", "b")
    assert primitive_root("aba") == ("a", "b", "a")
    assert canonical("xab", "ab") == (("x",), ("a", "b"))
    assert canonical("b", "ab") == ((), ("b", "a"))
    with pytest.raises(ValueError):
        canonical("a", "")


@given(addresses)
def test_format_parse_round_trip(s):
    assert parse_address(format_address(s)) == s


@given(addresses)
def test_canonical_form_is_minimal(s):
    assert primitive_root(s.period) == s.period
    if s.preperiod:
        assert s.preperiod[-1] != s.period[-1]


@given(addresses, st.integers(0, 8))
def test_shift_drops_leading_symbol(s, n):
    assert shift_n(s, n).unroll(12) == s.unroll(n + 12)[n:]


@given(addresses, addresses)
def test_lex_compare_antisymmetric_and_matches_unrolling(s, t):
    c = lex_compare(s, t)
    assert c == -lex_compare(t, s)
    assert (c == Ordering.EQ) == (s == t)
    if c != Ordering.EQ:
        a, b = s.unroll(40), t.unroll(40)
        k = next(i for i in range(40) if a[i] != b[i])
        assert compare_symbols(a[k], b[k]) == c


@given(addresses, addresses, addresses)
def test_cyclic_order_rotation_and_reversal(s, a, t):
    if len({s, a, t}) < 3:
        return
    assert cyclic_between(s, a, t) == cyclic_between(a, t, s)
    assert cyclic_between(s, a, t) != cyclic_between(t, a, s)


def test_symbol_order_is_total_on_small_range():
    syms = [Symbol(n, s) for n in range(-4, 5) for s in Side]
    ordered = sorted(syms, key=Symbol.key)
    for x, y in itertools.combinations(ordered, 2):
        assert compare_symbols(x, y) == Ordering.LT
    assert ordered[0] == Symbol(4, Side.L) and ordered[-1] == Symbol(4, Side.R)
