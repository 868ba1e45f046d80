"""Images of curves under f(z, lam) = (z^2 + lam, lam) and their orbits.

For a curve Z = {P = 0} write P = A(lam, z^2 + lam) + z B(lam, z^2 + lam).
Points (z, lam) and (-z, lam) have the same image, and

    A(lam, w)^2 - (w - lam) B(lam, w)^2

vanishes at w = z^2 + lam exactly when P(lam, z) P(lam, -z) = 0, so it is
an equation for f(Z).  Orbits are iterated on the reduced form of that
equation: squarefree, vertical factors removed, canonically normalized.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from qfl.bipoly import (
    LAM, Z, BiPoly, Degrees, ZeroPolynomialError, decompose, degrees,
    format_poly, normalize, squarefree_part, strip_vertical,
)

DEFAULT_MAX_STEPS = 24
DEFAULT_BUDGET_FACTOR = 64


class PushforwardError(ValueError):
    """The input has no non-vertical component to push forward."""


@dataclass(frozen=True)
class PushResult:
    raw: BiPoly
    reduced: BiPoly
    multiplicity_collapsed: bool


def _check_pushable(p):
    if not p:
        raise ZeroPolynomialError("cannot push forward the zero polynomial")
    if p.is_constant():
        raise PushforwardError("constant polynomial defines no curve")
    if strip_vertical(p)[1].is_constant():
        raise PushforwardError(f"{format_poly(p)} is a union of vertical lines")


def image_equation(p):
    """A(lam, z)^2 - (z - lam) B(lam, z)^2, unreduced."""
    a, b = decompose(p)
    return a * a - (Z - LAM) * b * b


def pushforward(p):
    _check_pushable(p)
    raw = image_equation(p)
    reduced = normalize(squarefree_part(strip_vertical(raw)[1]))
    return PushResult(raw, reduced, normalize(raw) != reduced)


def pullback(p):
    """P(lam, z^2 + lam), whose zero set is f^{-1}(Z)."""
    return p.subs(z=Z * Z + LAM)


# -- orbits ---------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitEntry:
    n: int
    poly: BiPoly
    degrees: Degrees

    @property
    def height_estimate(self):
        return Fraction(self.degrees.deg_sum, 2 ** self.n)


@dataclass(frozen=True)
class Preperiodic:
    preperiod: int
    period: int


@dataclass(frozen=True)
class DegreeGrowth:
    height_estimates: tuple


@dataclass(frozen=True)
class BudgetExceeded:
    reason: str


@dataclass(frozen=True)
class CurveOrbit:
    entries: tuple
    outcome: object

    @property
    def height_estimates(self):
        return [e.height_estimate for e in self.entries]

    def to_csv(self):
        lines = ["n,deg_lambda,deg_z,deg_sum,height_estimate,poly"]
        for e in self.entries:
            h = e.height_estimate
            d = e.degrees
            lines.append(f'{e.n},{d.deg_lambda},{d.deg_z},{d.deg_sum},'
                         f'{h.numerator}/{h.denominator},"{format_poly(e.poly)}"')
        return "\n".join(lines) + "\n"


def orbit(p, max_steps=DEFAULT_MAX_STEPS, degree_budget=None):
    """Iterate reduced pushforwards of Z = {P = 0}.

    Stops at the first exact repetition of a normalized equation
    (Preperiodic), when deg_sum would exceed ``degree_budget``
    (DegreeGrowth; the offending curve is not stored) or after
    ``max_steps`` pushforwards (BudgetExceeded).
    """
    _check_pushable(p)
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    current = normalize(p)
    d0 = degrees(current)
    if degree_budget is None:
        degree_budget = DEFAULT_BUDGET_FACTOR * d0.deg_sum
    if degree_budget < d0.deg_sum:
        raise ValueError("degree_budget is smaller than the degree of the input")

    entries = [OrbitEntry(0, current, d0)]
    seen = {current: 0}
    for n in range(1, max_steps + 1):
        current = pushforward(current).reduced
        d = degrees(current)
        if current in seen:
            entries.append(OrbitEntry(n, current, d))
            n0 = seen[current]
            return CurveOrbit(tuple(entries), Preperiodic(n0, n - n0))
        if d.deg_sum > degree_budget:
            estimates = tuple(e.height_estimate for e in entries)
            return CurveOrbit(tuple(entries), DegreeGrowth(estimates))
        entries.append(OrbitEntry(n, current, d))
        seen[current] = n
    return CurveOrbit(tuple(entries), BudgetExceeded(f"no repetition within {max_steps} steps"))


@dataclass(frozen=True)
class NotPreperiodic:
    height_estimates: tuple
    cauchy_difference: Fraction
    heuristic: bool = field(default=True)


@dataclass(frozen=True)
class Inconclusive:
    reason: str
    height_estimates: tuple


def _positive_height(estimates, floor=Fraction(1, 4)):
    if len(estimates) < 2:
        return None
    last, prev = estimates[-1], estimates[-2]
    diff = abs(last - prev)
    if last >= floor and diff <= last / 4:
        return diff
    return None


def detect_preperiodic(p, max_steps=DEFAULT_MAX_STEPS, degree_budget=None):
    """Preperiodic(n0, k) is certified by exact equality of equations.

    NotPreperiodic is a heuristic verdict from the degree-growth estimates
    2^-n deg f^n(Z); anything else is Inconclusive.
    """
    orb = orbit(p, max_steps, degree_budget)
    if isinstance(orb.outcome, Preperiodic):
        return orb.outcome
    estimates = tuple(orb.height_estimates)
    diff = _positive_height(estimates)
    if diff is not None:
        return NotPreperiodic(estimates, diff)
    if isinstance(orb.outcome, DegreeGrowth):
        reason = "degree budget reached before the height estimates settled"
    else:
        reason = orb.outcome.reason
    return Inconclusive(reason, estimates)


def height_estimate_curve(p, n):
    """(2^-m deg_sum f^m(Z)) for m = 0..n, exact."""
    orb = orbit(p, max_steps=max(n, 1), degree_budget=float("inf"))
    degs = [e.degrees.deg_sum for e in orb.entries]
    if isinstance(orb.outcome, Preperiodic):
        n0, k = orb.outcome.preperiod, orb.outcome.period
        while len(degs) <= n:
            degs.append(degs[n0 + (len(degs) - n0) % k])
    return [Fraction(d, 2 ** m) for m, d in enumerate(degs[:n + 1])]
