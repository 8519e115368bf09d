import cmath
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from cosrays.address import Side, Symbol
from cosrays.cosine import (
    COSH,
    COSH2,
    CosineMap,
    Delta,
    SkeletonMap,
    address_of,
    asymptotic_residual,
    constant_A,
    crit_base,
    disjoint_type_scale,
    eval as g_eval,
    fundamental_domain_of,
    inverse_branch,
    k_constant,
    k_terms,
    parse_complex,
    parse_map_spec,
    singular_data,
)
from cosrays.errors import (
    BoundaryError,
    BranchDomainError,
    DomainError,
    EvalOverflow,
    OutsideTractError,
)

TWO_PI = 2 * math.pi
COSH_MAP = CosineMap(0.5, 0.5)


def test_eval_examples():
    assert g_eval(COSH_MAP, 0) == 1
    assert abs(g_eval(COSH_MAP, math.pi * 1j) + 1) < 1e-15
    assert g_eval(CosineMap(1, 2), 0) == 3
    with pytest.raises(EvalOverflow):
        g_eval(COSH_MAP, 800 + 0j)


def test_map_needs_nonzero_coefficients():
    with pytest.raises(ValueError):
        CosineMap(0, 1)


def test_singular_values_examples():
    sd = singular_data(COSH_MAP)
    assert sd.crit_base == 0 and sd.v1 == 1 and abs(sd.v2 + 1) < 1e-15
    sd = singular_data(CosineMap(1, 1))
    assert sd.crit_base == 0 and sd.v1 == 2 and abs(sd.v2 + 2) < 1e-15


def test_critical_point_of_asymmetric_map():
    m = CosineMap(2, 0.5)
    c = crit_base(m)
    # e^{2c} = b/a = 1/4 puts the critical point at -ln 2
    assert abs(c + math.log(2)) < 1e-15
    assert abs(m.deriv(c)) < 1e-15
    assert abs(g_eval(m, c) - (2 * 0.5 + 0.5 * 2)) < 1e-15
    assert abs(singular_data(m).v1 - 2) < 1e-15
    assert abs(m.deriv(math.log(2))) > 1


@given(st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_critical_points_are_critical(a, b):
    if abs(a) < 1e-3 or abs(b) < 1e-3:
        return
    m = CosineMap(a, b)
    c = crit_base(m)
    assert abs(c.imag) <= math.pi / 2 + 1e-15
    assert abs(m.deriv(c)) <= 1e-9 * (abs(a) + abs(b)) * math.exp(abs(c.real))


def test_k_constant_for_cosh():
    terms = k_terms(COSH_MAP)
    expected = (2 * math.sqrt(2), 2, 1, 0.5 * math.log(2), 0.5 * math.log(2), math.log(64))
    assert terms == pytest.approx(expected, rel=1e-15)
    assert k_constant(COSH_MAP) == pytest.approx(4.1589, abs=1e-4)


def test_delta_tie_goes_up_from_larger_real_part():
    d = Delta.for_map(COSH_MAP)
    assert d.up and d.c == 1 and d.y0 == 0
    d = Delta.for_map(CosineMap(1, 1j))
    sd = singular_data(CosineMap(1, 1j))
    top = sd.v1 if sd.v1.imag > sd.v2.imag else sd.v2
    assert d.up and (d.c, d.y0) == pytest.approx((top.real, top.imag))


def test_normalized_cosh(nm_cosh):
    K = math.log(64)
    R = math.hypot(K, math.pi)
    assert nm_cosh.K == pytest.approx(K)
    assert nm_cosh.R_tract == pytest.approx(R)
    assert abs(nm_cosh.lam) <= K / math.exp(R) * (1 + 1e-12)
    assert constant_A(nm_cosh) > nm_cosh.K
    sd = singular_data(nm_cosh.base)
    assert abs(sd.v1) < K and abs(sd.v2) < K


def test_scale_rejects_large_lambda():
    with pytest.raises(ValueError):
        disjoint_type_scale(COSH_MAP, lam=1.0)


def test_expansion_outside_strip(nm_cosh):
    rng = random.Random(7)
    g = nm_cosh.base
    for _ in range(10_000):
        z = complex(rng.choice((1, -1)) * rng.uniform(nm_cosh.K, nm_cosh.K + 30), rng.uniform(-50, 50))
        if abs(g(z)) > nm_cosh.R_tract:
            assert abs(g.deriv(z)) > 2


def test_half_lines_are_in_their_domains(nm_cosh, nm_asym):
    for nm in (nm_cosh, nm_asym):
        A = constant_A(nm)
        w = nm(complex(A + 1, 0))
        assert abs(w) > nm.R_tract and nm.delta.distance(w) > 1e-9
        for n in (-3, 0, 2):
            assert fundamental_domain_of(nm, complex(A + 1, TWO_PI * n)) == Symbol(n, Side.R)
            assert fundamental_domain_of(nm, complex(-A - 1, TWO_PI * n)) == Symbol(n, Side.L)


def test_fundamental_domain_errors(nm_cosh):
    with pytest.raises(OutsideTractError):
        fundamental_domain_of(nm_cosh, 0.1 + 0j)
    with pytest.raises(OutsideTractError):
        fundamental_domain_of(nm_cosh, 3j)


def test_inverse_branch_domain_errors(nm_cosh):
    with pytest.raises(BranchDomainError):
        inverse_branch(nm_cosh, Symbol(0, Side.R), 1 + 0j)
    d = nm_cosh.delta
    with pytest.raises(BoundaryError):
        inverse_branch(nm_cosh, Symbol(0, Side.R), complex(d.c, d.y0 + 100))


def _valid_w(nm, rng):
    while True:
        w = cmath.rect(nm.R_tract * 10 ** rng.uniform(0.01, 3), rng.uniform(-math.pi, math.pi))
        if nm.delta.distance(w) > 1e-6:
            return w


@pytest.mark.parametrize("which", ["nm_cosh", "nm_asym"])
def test_inverse_branch_round_trip_and_domain(which, request):
    nm = request.getfixturevalue(which)
    rng = random.Random(11)
    for _ in range(500):
        s = Symbol(rng.randint(-5, 5), rng.choice(list(Side)))
        w = _valid_w(nm, rng)
        z = inverse_branch(nm, s, w)
        assert abs(nm(z) - w) <= 1e-10 * (1 + abs(w))
        assert abs(asymptotic_residual(nm, s, w)) < 1
        assert abs(z.imag - (cmath.log(w).imag if s.side is Side.R else -cmath.log(w).imag)
                   - TWO_PI * s.n) < 3 * math.pi + 2
        assert fundamental_domain_of(nm, z) == s


def test_inverse_branch_equivariance(nm_cosh):
    rng = random.Random(12)
    for _ in range(200):
        w = _valid_w(nm_cosh, rng)
        side = rng.choice(list(Side))
        z0 = inverse_branch(nm_cosh, Symbol(0, side), w)
        n = rng.randint(-6, 6)
        assert abs(inverse_branch(nm_cosh, Symbol(n, side), w) - (z0 + TWO_PI * n * 1j)) < 1e-12 * (1 + abs(z0))


def test_roots_multiply_to_b_over_a(nm_asym):
    rng = random.Random(13)
    g = nm_asym.base
    for _ in range(200):
        w = _valid_w(nm_asym, rng)
        zr = inverse_branch(nm_asym, Symbol(0, Side.R), w)
        zl = inverse_branch(nm_asym, Symbol(0, Side.L), w)
        assert abs(cmath.exp(zr + zl) - g.b / g.a) < 1e-12 * abs(g.b / g.a)


@settings(max_examples=200)
@given(st.floats(-20, 20), st.floats(-50, 50))
def test_eval_is_2pi_i_periodic(x, y):
    z = complex(x, y)
    w = g_eval(COSH_MAP, z)
    assert abs(g_eval(COSH_MAP, z + TWO_PI * 1j) - w) <= 1e-12 * (1 + abs(w))


def test_address_of_real_orbit(nm_cosh):
    z = complex(constant_A(nm_cosh) + 1, 0)
    assert address_of(nm_cosh, z, 0) == []
    assert nm_cosh(z).real > constant_A(nm_cosh)
    assert address_of(nm_cosh, z, 2) == [Symbol(0, Side.R)] * 2
    # the third iterate is far beyond double range
    with pytest.raises(DomainError) as exc:
        address_of(nm_cosh, z, 3)
    assert exc.value.at == 2


def test_address_of_moderate_orbit(nm_cosh):
    # g(A+1) has modulus of a few hundred, so its own domain is still decidable
    z = complex(constant_A(nm_cosh) + 1, TWO_PI * 2)
    assert address_of(nm_cosh, z, 1) == [Symbol(2, Side.R)]
    assert address_of(nm_cosh, z, 2) == [Symbol(2, Side.R), Symbol(0, Side.R)]
    assert fundamental_domain_of(nm_cosh, complex(800, TWO_PI * 3)) == Symbol(3, Side.R)
    assert fundamental_domain_of(nm_cosh, complex(-800, TWO_PI * -1)) == Symbol(-1, Side.L)


@pytest.mark.parametrize("sm", [COSH, COSH2])
def test_skeleton_branches_invert_the_map(sm):
    rng = random.Random(14)
    for _ in range(500):
        w = complex(rng.uniform(-20, 20), rng.uniform(-20, 20))
        if sm.cut_distance(w)[0] < 1e-6:
            continue
        s = Symbol(rng.randint(-3, 3), rng.choice(list(Side)))
        z = sm.branch(s, w)
        assert abs(sm(z) - w) < 1e-9 * (1 + abs(w))
        assert sm.symbol_of(z) == s


@pytest.mark.parametrize("sm", [COSH, COSH2])
def test_skeleton_branch_sides_of_the_slit(sm):
    lo, hi = sm.slit
    x = 0.5 * (lo + hi)
    up = sm.branch(Symbol(0, Side.R), complex(x), v=1j)
    down = sm.branch(Symbol(0, Side.R), complex(x), v=-1j)
    assert abs(sm(up) - x) < 1e-9 and abs(sm(down) - x) < 1e-9
    assert abs(up - down) > 1e-3


def test_cosh2_is_conjugate_to_a_cosine_map():
    rng = random.Random(15)
    for _ in range(100):
        z = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        w = COSH2.to_conjugate(z)
        assert abs(COSH2.conjugate(w) - COSH2.to_conjugate(COSH2(z))) < 1e-9 * (1 + abs(COSH2(z)))


def test_map_specs():
    assert parse_map_spec("cosh") == COSH
    assert isinstance(parse_map_spec("cosh2"), SkeletonMap)
    m = parse_map_spec("a=0.01,b=0.5i")
    assert m == CosineMap(0.01, 0.5j)
    assert parse_complex("1-2i") == 1 - 2j
    with pytest.raises(DomainError):
        parse_map_spec("a=1")
    with pytest.raises(ValueError):
        parse_complex("x")
