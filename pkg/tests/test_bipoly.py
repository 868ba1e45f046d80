import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from qfl.bipoly import (
    LAM, ONE, Z, BiPoly, Degrees, PolySyntaxError, UnknownVariableError,
    ZeroPolynomialError, decompose, degrees, divide_exact, divides, evaluate,
    format_poly, gcd, normalize, parse_poly, squarefree_part, strip_vertical,
)

from conftest import LAM_S, Z_S, bipolys, from_sympy, nonzero_bipolys, random_poly, to_sympy

F = Z**2 + LAM  # one step of the family, as a polynomial in z


# -- parsing / formatting ---------------------------------------------------

@pytest.mark.parametrize("text, terms", [
    ("z^2 + lam - z", {(0, 2): 1, (1, 0): 1, (0, 1): -1}),
    ("0", {}),
    ("(z - lam)*(z + lam)", {(0, 2): 1, (2, 0): -1}),
    ("2lam z", {(1, 1): 2}),
    ("(z+1)(z-1)", {(0, 2): 1, (0, 0): -1}),
    ("3/4 z - 1/2", {(0, 1): Fraction(3, 4), (0, 0): Fraction(-1, 2)}),
    ("z**3/3", {(0, 3): Fraction(1, 3)}),
    ("-z^2", {(0, 2): -1}),
    ("  z  -  - lam ", {(0, 1): 1, (1, 0): 1}),
])
def test_parse(text, terms):
    assert parse_poly(text) == BiPoly(terms)


@pytest.mark.parametrize("text, position", [
    ("z +", 3),
    ("z ^ lam", 4),
    ("(z + 1", 6),
    ("z $ 1", 2),
    ("z / (z+1)", 2),
])
def test_parse_errors_report_position(text, position):
    with pytest.raises(PolySyntaxError) as info:
        parse_poly(text)
    assert info.value.position == position


def test_unknown_variable():
    with pytest.raises(UnknownVariableError) as info:
        parse_poly("z + x")
    assert info.value.position == 4


def test_format_canonical_order():
    assert format_poly(parse_poly("lam - z + z^2")) == "z^2 - z + lam"
    assert format_poly(parse_poly("lam z - 1")) == "lam*z - 1"
    assert format_poly(parse_poly("-1/2 lam^2 z^3")) == "-1/2*lam^2*z^3"
    assert format_poly(BiPoly()) == "0"


@settings(max_examples=200, deadline=None)
@given(bipolys(max_deg=5, coeff=20))
def test_parse_format_round_trip(p):
    assert parse_poly(format_poly(p)) == p
    q = p * Fraction(3, 7)
    assert parse_poly(format_poly(q)) == q


# -- ring operations --------------------------------------------------------

def test_substitution_examples():
    assert Z.subs(z=F) == F
    assert F.subs(z=F) == (Z**2 + LAM)**2 + LAM
    assert (Z - 1) * (Z + 1) == Z**2 - 1


@settings(max_examples=100, deadline=None)
@given(bipolys(), bipolys(), bipolys(max_deg=2))
def test_ring_ops_against_sympy(p, q, s):
    assert to_sympy(p * q).expand() == (to_sympy(p) * to_sympy(q)).expand()
    assert to_sympy(p - q) == (to_sympy(p) - to_sympy(q)).expand()
    sub = to_sympy(p).subs(Z_S, to_sympy(s))
    assert p.subs(z=s) == from_sympy(sub)
    sub2 = to_sympy(p).subs(LAM_S, to_sympy(s))
    assert p.subs(lam=s) == from_sympy(sub2)


@settings(max_examples=50, deadline=None)
@given(bipolys(), bipolys(), bipolys(max_deg=2))
def test_substitution_is_homomorphism(p, q, s):
    assert (p * q).subs(z=s) == p.subs(z=s) * q.subs(z=s)
    assert (p + q).subs(lam=s) == p.subs(lam=s) + q.subs(lam=s)


def test_large_products_match_schoolbook(rng):
    # exercise the packed-integer multiplication path
    p = random_poly(rng, 30, 50, 0.8) * Fraction(1, 3)
    q = random_poly(rng, 30, 50, 0.8)
    assert len(p) * len(q) > 4000
    expected = {}
    for (i1, j1), c1 in p.items():
        for (i2, j2), c2 in q.items():
            expected[(i1 + i2, j1 + j2)] = expected.get((i1 + i2, j1 + j2), 0) + c1 * c2
    assert p * q == BiPoly(expected)


def test_pow():
    assert (Z + 1)**0 == ONE
    assert (Z + 1)**3 == Z**3 + 3 * Z**2 + 3 * Z + 1
    with pytest.raises(ValueError):
        Z**-1


# -- evaluation and degrees --------------------------------------------------

def test_evaluate_examples():
    assert evaluate(parse_poly("z^2 + lam - z"), 0, 1) == 0
    assert evaluate(Z, 5, 2 + 1j) == 2 + 1j
    assert evaluate(parse_poly("z^2 - lam"), 2, 1) == -1
    assert evaluate(parse_poly("z/3 + lam"), Fraction(1, 2), 1) == Fraction(5, 6)


@pytest.mark.parametrize("text, expected", [
    ("z^2 + lam - z", (1, 2, 3)),
    ("z - 7", (0, 1, 1)),
    ("(lam^2 + lam)^2 + lam - z", (4, 1, 5)),
])
def test_degrees(text, expected):
    d = degrees(parse_poly(text))
    assert (d.deg_lambda, d.deg_z, d.deg_sum) == expected


def test_degrees_of_zero():
    with pytest.raises(ZeroPolynomialError):
        degrees(BiPoly())


# -- normalize ----------------------------------------------------------------

@pytest.mark.parametrize("text, expected", [
    ("-2z^2 - 2lam + 2z", "z^2 + lam - z"),
    ("z/3", "z"),
    ("-4lam + 2z", "z - 2lam"),
    ("-lam/2 + lam^2/3", "2lam^2 - 3lam"),
])
def test_normalize(text, expected):
    assert normalize(parse_poly(text)) == parse_poly(expected)


@settings(max_examples=200, deadline=None)
@given(nonzero_bipolys(), st.fractions().filter(bool))
def test_normalize_idempotent_and_scale_invariant(p, c):
    n = normalize(p)
    assert normalize(n) == n
    assert normalize(p * c) == n
    assert all(type(v) is int for _, v in n.items())


# -- gcd / squarefree / vertical parts -----------------------------------------

def test_gcd_examples():
    F2 = parse_poly("z^2 + z + lam + 1")
    assert gcd(parse_poly("z^2 - lam^2"), Z - LAM) == Z - LAM
    assert gcd(parse_poly("z^3 + lam z"), ONE) == ONE
    assert gcd(F2**2, F2) == F2
    assert gcd(BiPoly(), Z * 2) == Z
    with pytest.raises(ZeroPolynomialError):
        gcd(BiPoly(), BiPoly())


def test_gcd_against_sympy(rng):
    for _ in range(60):
        a = random_poly(rng, 3, 5)
        b = random_poly(rng, 3, 5)
        c = random_poly(rng, 3, 5)
        p, q = a * c, b * c
        expected = normalize(from_sympy(sympy.gcd(to_sympy(p), to_sympy(q))))
        assert gcd(p, q) == expected


def test_gcd_with_vertical_content():
    p = parse_poly("(lam^2 - 1) (z - lam)^2 (z + 3)")
    q = parse_poly("(lam - 1) (z - lam) (z^2 + lam)")
    assert gcd(p, q) == parse_poly("(lam - 1)(z - lam)")


@pytest.mark.parametrize("text, expected", [
    ("(z - 2lam)^2", "z - 2lam"),
    ("z^2 + lam - z", "z^2 + lam - z"),
    ("z^2 (z - lam)", "z^2 - lam z"),
    ("lam^2 z", "lam z"),
])
def test_squarefree_part(text, expected):
    assert squarefree_part(parse_poly(text)) == parse_poly(expected)


def test_squarefree_part_strips_multiplicity(rng):
    done = 0
    while done < 15:
        p = random_poly(rng, 2, 5)
        q = random_poly(rng, 2, 5)
        if p.is_constant() or q.is_constant() or gcd(p, q) != ONE:
            continue
        assert squarefree_part(p * p * q) == squarefree_part(p * q)
        done += 1


@pytest.mark.parametrize("text, v, h", [
    ("lam (z - lam)", "lam", "z - lam"),
    ("z^2 + lam - z", "1", "z^2 + lam - z"),
    ("(lam^2 - 1) z", "lam^2 - 1", "z"),
])
def test_strip_vertical(text, v, h):
    V, H = strip_vertical(parse_poly(text))
    assert V == parse_poly(v)
    assert H == parse_poly(h)


@settings(max_examples=100, deadline=None)
@given(nonzero_bipolys(max_deg=3),
       st.lists(st.integers(-5, 5), min_size=1, max_size=4).filter(any).map(BiPoly.from_lambda_coeffs))
def test_strip_vertical_properties(p, v):
    P = p * v
    V, H = strip_vertical(P)
    assert V * H == P
    assert V.is_lambda_only()
    assert strip_vertical(H)[0] == ONE


# -- exact division -----------------------------------------------------------------

def test_divide_exact_and_divides():
    a = parse_poly("z^2 + lam z - 3")
    b = parse_poly("2 lam z^3 - z + 1/2")
    assert divide_exact(a * b, b) == a
    assert divides(a, a * b)
    assert not divides(a, a * b + 1)
    with pytest.raises(ArithmeticError):
        divide_exact(a * b + Z, a)


# -- even/odd decomposition -------------------------------------------------------------

@pytest.mark.parametrize("text, a, b", [
    ("z", "0", "1"),
    ("z^2 + lam - z", "z", "-1"),
    ("z^3", "0", "z - lam"),
    ("lam", "lam", "0"),
])
def test_decompose_examples(text, a, b):
    A, B = decompose(parse_poly(text))
    assert A == parse_poly(a)
    assert B == parse_poly(b)


def test_decompose_round_trip_random():
    rng = random.Random(7)
    for _ in range(500):
        p = random_poly(rng, 10, 9, density=0.15)
        A, B = decompose(p)
        assert A.subs(z=F) + Z * B.subs(z=F) == p
        dz = p.deg_z
        assert A.deg_z <= -(-dz // 2)
        assert B.deg_z <= -(-(dz - 1) // 2)


@settings(max_examples=100, deadline=None)
@given(bipolys(max_deg=6), bipolys(max_deg=6))
def test_decompose_is_linear(p, q):
    Ap, Bp = decompose(p)
    Aq, Bq = decompose(q)
    A, B = decompose(p + q)
    assert A == Ap + Aq and B == Bp + Bq
