import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import strategies as st

from qfl.bipoly import BiPoly

LAM_S, Z_S = sympy.symbols("lam z")


def to_sympy(p):
    return sympy.Add(*[c * LAM_S**i * Z_S**j for (i, j), c in p.items()]) if p else sympy.Integer(0)


def from_sympy(expr):
    poly = sympy.Poly(sympy.expand(expr), LAM_S, Z_S)
    return BiPoly({(int(i), int(j)): Fraction(int(c.p), int(c.q)) for (i, j), c in poly.terms()}
                  if not poly.is_zero else {})


def random_poly(rng, max_deg_sum=8, coeff=9, density=0.5):
    terms = {}
    while not terms:
        for i in range(max_deg_sum + 1):
            for j in range(max_deg_sum + 1 - i):
                if rng.random() < density:
                    terms[(i, j)] = rng.randint(-coeff, coeff)
        terms = {k: c for k, c in terms.items() if c}
    return BiPoly(terms)


@pytest.fixture
def rng():
    return random.Random(20240611)


def bipolys(max_deg=4, coeff=9):
    keys = st.tuples(st.integers(0, max_deg), st.integers(0, max_deg))
    return st.dictionaries(keys, st.integers(-coeff, coeff), max_size=8).map(BiPoly)


def nonzero_bipolys(max_deg=4, coeff=9):
    return bipolys(max_deg, coeff).filter(bool)
