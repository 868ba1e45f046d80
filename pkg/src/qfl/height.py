"""Rational sections z(lam) = p(lam)/q(lam), their forward iterates and
the canonical height lim 2^-m deg(z_m).

A section is kept as a pair of integer coefficient lists (lowest degree
first) with no common factor in Q[lam] and no common integer content;
``p`` and ``q`` expose the monic-denominator form with rational
coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from qfl import _upoly as up
from qfl.bipoly import LAM, BiPoly, Z, _parse_fraction, format_poly, normalize

DEFAULT_DEGREE_BUDGET = 2 ** 14


class DegreeBudgetError(ArithmeticError):
    def __init__(self, message, estimates):
        super().__init__(message)
        self.estimates = estimates


def _as_coeffs(x):
    """Dense rational coefficient list of a polynomial in lam."""
    if isinstance(x, BiPoly):
        if not x.is_lambda_only():
            raise ValueError("section polynomials may only involve lam")
        return up.trim([x.coefficient(i, 0) for i in range(x.deg_lambda + 1)])
    if isinstance(x, (int, Fraction)):
        return up.trim([x])
    return up.trim([c if isinstance(c, (int, Fraction)) else Fraction(c) for c in x])


def _gcd_q(a, b):
    """Monic gcd over Q."""
    while b:
        a, b = b, up.divmod_(a, b)[1]
    return [up.qdiv(c, a[-1]) for c in a]


class RatSection:
    """z(lam) = p(lam) / q(lam), reduced, q monic."""

    __slots__ = ("num", "den")

    def __init__(self, p, q=1):
        p, q = _as_coeffs(p), _as_coeffs(q)
        if not q:
            raise ZeroDivisionError("section denominator is zero")
        g = _gcd_q(p, q) if p else q
        if len(g) > 1:
            p, q = up.divmod_(p, g)[0], up.divmod_(q, g)[0]
        if not p:
            q = [1]
        # common integer scale, then strip the joint content
        scale = lcm(*(Fraction(c).denominator for c in p + q))
        num, den = [int(c * scale) for c in p], [int(c * scale) for c in q]
        c = up.content(num + den)
        if den[-1] < 0:
            c = -c
        self.num = [x // c for x in num]
        self.den = [x // c for x in den]

    @classmethod
    def _raw(cls, num, den):
        obj = cls.__new__(cls)
        obj.num, obj.den = num, den
        return obj

    @property
    def p(self):
        return tuple(up.qdiv(c, self.den[-1]) for c in self.num)

    @property
    def q(self):
        return tuple(up.qdiv(c, self.den[-1]) for c in self.den)

    @property
    def degree(self):
        return max(len(self.num), len(self.den)) - 1 if self.num else len(self.den) - 1

    def __eq__(self, other):
        if not isinstance(other, RatSection):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((tuple(self.num), tuple(self.den)))

    def __call__(self, lam):
        return up.evaluate(self.num, lam) / up.evaluate(self.den, lam)

    def __repr__(self):
        return f"RatSection({format_section(self)!r})"


def format_section(s):
    """Text in the section grammar; parses back to the same section."""
    p = format_poly(BiPoly.from_lambda_coeffs(s.num))
    if s.den == [1]:
        return p
    q = format_poly(BiPoly.from_lambda_coeffs(s.den))
    if sum(1 for c in s.num if c) > 1:
        p = f"({p})"
    # a bare lam^k needs no parentheses; 2*lam would
    bare = sum(1 for c in s.den if c) == 1 and s.den[-1] == 1
    return f"{p}/{q}" if bare or len(s.den) == 1 else f"{p}/({q})"


def parse_section(text):
    """Parse ``p(lam)/q(lam)``, e.g. ``"(lam^2 + 1)/lam"``."""
    num, den = _parse_fraction(text, {"lam": LAM})
    return RatSection(num, den)


def iterate_section(s):
    """(p^2 + lam q^2) / q^2; gcd(p, q) = 1 makes this already reduced."""
    num = up.add(up.mul(s.num, s.num), up.shift(up.mul(s.den, s.den), 1))
    return RatSection._raw(num, up.mul(s.den, s.den))


def section_degree(s):
    return s.degree


def _next_degree(s):
    dp = len(s.num) - 1 if s.num else -1
    dq = len(s.den) - 1
    return max(2 * dp, 2 * dq + 1)


@dataclass(frozen=True)
class HeightReport:
    estimates: tuple
    status: str                 # "stabilized" or "budget"
    cauchy_difference: Fraction
    heuristic: bool = True

    @property
    def height(self):
        return self.estimates[-1]


def canonical_height_section(s, n, budget=DEFAULT_DEGREE_BUDGET):
    """Exact estimates 2^-m deg(z_m) for m = 0..n.

    The status is "stabilized" when the last two estimates agree, the
    stopping rule for the limit; otherwise "budget" (n ran out first).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    estimates = [Fraction(section_degree(s))]
    for m in range(1, n + 1):
        nxt = _next_degree(s)
        if nxt > budget:
            raise DegreeBudgetError(f"deg z_{m} = {nxt} exceeds the budget {budget}",
                                    tuple(estimates))
        s = iterate_section(s)
        estimates.append(Fraction(section_degree(s), 2 ** m))
    diff = abs(estimates[-1] - estimates[-2])
    return HeightReport(tuple(estimates), "stabilized" if not diff else "budget", diff)


def section_orbit(s, n):
    out = [s]
    for _ in range(n):
        s = iterate_section(s)
        out.append(s)
    return out


def graph_curve(s):
    """The curve {q(lam) z - p(lam) = 0}, normalized."""
    return normalize(BiPoly.from_lambda_coeffs(s.den) * Z - BiPoly.from_lambda_coeffs(s.num))
