"""Periodic points of f_lam(z) = z^2 + lam: exact period curves, dynatomic
factors, numerical cycles with multipliers, continuation in lam, and the
periodic-point potential check against the escape rate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from qfl import _upoly as up
from qfl.bipoly import LAM, ONE, Z, _from_zdense, _to_zdense, _ztrim, divide_exact, normalize
from qfl.green import green_value

# f^k(z) - z has about 2^(2k-3) terms: k = 11 already needs ~1.5 GB expanded
MAX_PERIOD_POLY = 11
MAX_PERIOD_TEST = 16
MAX_ROOT_PERIOD = 14
MAX_DYNATOMIC = 10
MAX_FOLLOW_PERIOD = 24
MAX_EQUIDIST_N = 40

PERIOD_TOL = 1e-8
GUARD_BAND = 1e3
INDIFFERENT_BAND = 1e-8
REPELLING_MARGIN = 1e-6


class RootFindingError(ArithmeticError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class ContinuationError(ArithmeticError):
    def __init__(self, message, substep):
        super().__init__(f"{message} (substep {substep})")
        self.substep = substep


class BifurcationError(ContinuationError):
    pass


def _check_period(k, upper):
    if not isinstance(k, int) or not 1 <= k <= upper:
        raise ValueError(f"period must be an integer in [1, {upper}], got {k!r}")


@lru_cache(maxsize=None)
def _iterate(k):
    if k == 0:
        return Z
    prev = _iterate(k - 1)
    return prev * prev + LAM


def period_poly(k):
    """f_lam^k(z) - z, exactly."""
    _check_period(k, MAX_PERIOD_POLY)
    return _iterate(k) - Z


def divisors(k):
    return [d for d in range(1, k + 1) if k % d == 0]


def mobius(n):
    result = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    return -result if n > 1 else result


@lru_cache(maxsize=None)
def dynatomic(k):
    """Prod over d | k of (f^d(z) - z)^mu(k/d), by exact division."""
    _check_period(k, MAX_DYNATOMIC)
    num, den = ONE, ONE
    for d in divisors(k):
        m = mobius(k // d)
        if m == 1:
            num = num * period_poly(d)
        elif m == -1:
            den = den * period_poly(d)
    try:
        return divide_exact(num, den)
    except ArithmeticError as exc:  # pragma: no cover - would be a bug
        raise AssertionError(f"dynatomic({k}): Moebius quotient is not exact") from exc


def _reduce_rows(r, g):
    """Remainder of r modulo g in Z[lam][z], g monic in z (rows by z-degree)."""
    dg = len(g) - 1
    r = list(r)
    for k in range(len(r) - 1, dg - 1, -1):
        c = r[k]
        if not c:
            continue
        for i in range(dg):
            if g[i]:
                r[k - dg + i] = up.sub(r[k - dg + i], up.mul(c, g[i]))
        r[k] = []
    return _ztrim(r[:dg])


def divides_period_curve(p, k):
    """True iff P divides f_lam^k(z) - z in Q[lam, z].

    f^k(z) - z is monic in z with integer coefficients, so a divisor must be
    primitive with z-leading coefficient +-1.  For such P the test iterates
    r <- r^2 + lam modulo P and compares with z, never expanding f^k.
    """
    if not p:
        raise ValueError("zero polynomial")
    _check_period(k, MAX_PERIOD_TEST)
    if p.is_constant():
        return True
    if p.deg_z > 2 ** k or p.deg_lambda > 2 ** (k - 1):
        return False
    g = _to_zdense(normalize(p))
    if g[-1] not in ([1], [-1]):
        return False
    if g[-1] == [-1]:
        g = [up.neg(row) for row in g]
    if len(g) == 1:
        return False
    lam = [0, 1]
    r = _reduce_rows([[], [1]], g)
    for _ in range(k):
        # r has integer coefficients, so the dense view needs no scaling
        sq = _to_zdense(_from_zdense(r) ** 2) if r else [[]]
        sq[0] = up.add(sq[0], lam)
        r = _reduce_rows(sq, g)
    diff = list(r) + [[]] * max(0, 2 - len(r))
    diff[1] = up.sub(diff[1], [1])
    return not _reduce_rows(_ztrim(diff), g)


# -- numerical periodic points -------------------------------------------------------

@dataclass(frozen=True)
class PeriodicPoint:
    z: complex
    period: int
    multiplier: complex
    stability: str
    ambiguous: bool = False


def classify(multiplier):
    m = abs(multiplier)
    if m >= 1 + REPELLING_MARGIN:
        return "repelling"
    if m < 1 - INDIFFERENT_BAND:
        return "attracting"
    return "indifferent"


def orbit_values(z, lam, k):
    out = [z]
    for _ in range(k - 1):
        z = z * z + lam
        out.append(z)
    return out


def cycle_multiplier(z, lam, k):
    m = 1 + 0j
    for w in orbit_values(z, lam, k):
        m *= 2 * w
    return m


def _newton_ratio(z, lam, k):
    """g/g' for g = f^k(z) - z, without overflow for escaping z."""
    w = z.copy()
    d = np.ones_like(z)
    ratio = np.zeros_like(z)
    big = np.zeros(z.shape, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for _ in range(k):
            newly = ~big & (np.abs(w) > 1e100)
            # once |w| is huge, w_{i+1}/d_{i+1} = (w_i/d_i)/2 up to 1e-200
            ratio = np.where(newly, w / d, ratio)
            big |= newly
            ratio = np.where(big, ratio / 2, ratio)
            d = np.where(big, d, 2 * w * d)
            w = np.where(big, w, w * w + lam)
        return np.where(big, ratio, (w - z) / (d - 1))


def _backward_tree(lam, k):
    """The 2^k preimages under f^k of a generic point outside K_lam.

    They sit on a level curve of the escape rate just outside the Julia
    set, spread like the period-k points, so they make good distinct
    starting values for the simultaneous iteration.
    """
    radius = 1 + max(abs(lam), 2)
    w = np.array([2 * radius * np.exp(0.7853j * math.sqrt(2))])
    for _ in range(k):
        r = np.sqrt(w - lam)
        w = np.concatenate([r, -r])
    return w


def _aberth(lam, k, max_sweeps=2000):
    n = 2 ** k
    z = _backward_tree(lam, k)
    live = np.ones(n, dtype=bool)
    prev = np.full(n, np.inf)
    block = max(1, 2 ** 22 // n)
    for _ in range(max_sweeps):
        idx = np.flatnonzero(live)
        if idx.size == 0:
            return z
        ratio = _newton_ratio(z[idx], lam, k)
        s = np.empty(idx.size, dtype=complex)
        for start in range(0, idx.size, block):
            sel = idx[start:start + block]
            diff = z[sel, None] - z[None, :]
            diff[np.arange(sel.size), sel] = np.inf
            with np.errstate(divide="ignore", invalid="ignore"):
                s[start:start + sel.size] = (1.0 / diff).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            step = ratio / (1 - ratio * s)
        step = np.where(np.isfinite(step), step, ratio)
        z[idx] -= step
        size = np.abs(step)
        scale = 1 + np.abs(z[idx])
        # converged, or stuck at the roundoff floor of the evaluation
        done = (size <= 4e-16 * scale) | ((size <= 1e-10 * scale) & (size > prev[idx] / 2))
        prev[idx] = size
        live[idx] = ~done
    raise RootFindingError(f"simultaneous iteration did not converge for k={k}",
                           residuals=np.abs(_newton_ratio(z, lam, k)))


def _residual(z, lam, d):
    w = z
    for _ in range(d):
        w = w * w + lam
    return abs(w - z)


def periodic_points(lam, k):
    """All 2^k solutions of f_lam^k(z) = z, with exact periods and multipliers.

    The multiplier is that of the cycle the point lies on (derivative of
    f^period along it); ambiguous marks points whose residual for a smaller
    period falls in the guard band above the tolerance.
    """
    _check_period(k, MAX_ROOT_PERIOD)
    lam = complex(lam)
    if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
        raise ValueError("non-finite parameter")
    roots = _aberth(lam, k)
    limit = 1e-9 * (1 + abs(lam)) ** k
    residuals = np.array([_residual(complex(z), lam, k) for z in roots])
    if not np.all(residuals <= limit):
        raise RootFindingError(f"residuals above {limit:g}", residuals=residuals)
    points = []
    for z in roots:
        z = complex(z)
        scale = 1 + abs(z)
        period, ambiguous = k, False
        for d in divisors(k)[:-1]:
            res = _residual(z, lam, d) / scale
            if res <= PERIOD_TOL:
                period = d
                break
            if res <= GUARD_BAND * PERIOD_TOL:
                ambiguous = True
        mult = cycle_multiplier(z, lam, period)
        points.append(PeriodicPoint(z, period, mult, classify(mult), ambiguous))
    points.sort(key=lambda p: (p.period, p.z.real, p.z.imag))
    return points


def points_to_csv(points):
    lines = ["re_z,im_z,period,re_mult,im_mult,stability"]
    for p in points:
        lines.append(f"{p.z.real!r},{p.z.imag!r},{p.period},{p.multiplier.real!r},"
                     f"{p.multiplier.imag!r},{p.stability}")
    return "\n".join(lines) + "\n"


# -- continuation ------------------------------------------------------------------

def _g_and_derivatives(z, lam, k):
    w, dz, dl = z, 1 + 0j, 0j
    for _ in range(k):
        dl = 2 * w * dl + 1
        dz = 2 * w * dz
        w = w * w + lam
    return w - z, dz - 1, dl


def _newton(z, lam, k, max_iter=30):
    for it in range(max_iter):
        g, gz, _ = _g_and_derivatives(z, lam, k)
        if not (math.isfinite(abs(g)) and gz != 0):
            return None, it
        delta = g / gz
        z = z - delta
        if abs(delta) <= 4e-16 * (1 + abs(z)):
            return z, it
        if abs(g) <= 1e-12 and abs(delta) <= 1e-13 * (1 + abs(z)):
            return z, it
    g, _, _ = _g_and_derivatives(z, lam, k)
    return (z, max_iter) if abs(g) <= 1e-12 else (None, max_iter)


def follow_periodic(lam0, z0, k, lam1, steps=64, max_halvings=20):
    """Continue a period-k point z0 of f_lam0 along the segment lam0 -> lam1.

    Euler predictor on dz/dlam = -g_lam / g_z, Newton corrector on
    g = f^k(z) - z.  A substep whose corrector diverges or jumps is halved,
    at most ``max_halvings`` times; a multiplier reaching 1 stops the path.
    """
    _check_period(k, MAX_FOLLOW_PERIOD)
    if steps < 1:
        raise ValueError("steps must be at least 1")
    lam0, lam1, z = complex(lam0), complex(lam1), complex(z0)
    if lam0 == lam1:
        return z
    span = lam1 - lam0
    nominal = 1.0 / steps
    pos = 0.0
    substep = 0
    while pos < 1.0:
        h = min(nominal, 1.0 - pos)
        for _ in range(max_halvings + 1):
            la = lam0 + pos * span
            lb = lam0 + (pos + h) * span if pos + h < 1.0 else lam1
            _, gz, gl = _g_and_derivatives(z, la, k)
            if abs(gz) < 1e-8:
                raise BifurcationError("multiplier reached 1", substep)
            zp = z - (lb - la) * gl / gz
            zc, its = _newton(zp, lb, k)
            if zc is not None and its <= 12 and abs(zc - zp) <= 0.1 * (1 + abs(z)):
                break
            h /= 2
        else:
            raise ContinuationError("corrector failed after repeated step halving", substep)
        _, gz, _ = _g_and_derivatives(zc, lb, k)
        if abs(gz) < 1e-8:
            raise BifurcationError("multiplier reached 1", substep)
        z = zc
        pos = 1.0 if lb == lam1 else pos + h
        substep += 1
    return z


# -- equidistribution potential ---------------------------------------------------------

def periodic_potential(lam, w, n):
    """2^-n log|f^n(w) - w| = 2^-n sum over period-n points z_i of log|w - z_i|."""
    lam, w = complex(lam), complex(w)
    z = w
    for m in range(n):
        if abs(z) > 1e100:
            # log|z_{k+1}| = 2 log|z_k| up to |lam|/|z_k|^2 < 1e-199
            log_abs = math.log(abs(z)) * 2 ** (n - m)
            return math.ldexp(log_abs, -n)
        z = z * z + lam
    return math.ldexp(math.log(abs(z - w)), -n)


def equidist_check(lam, w, n):
    """|2^-n log|f^n(w) - w| - G(w, lam)| for w certified outside K_lam."""
    if not isinstance(n, int) or not 1 <= n <= MAX_EQUIDIST_N:
        raise ValueError(f"n must be an integer in [1, {MAX_EQUIDIST_N}]")
    g = green_value(w, lam, 1e-12)
    if not g.certified_positive:
        raise ValueError(f"{w} is not certified to escape for lam={lam}")
    return abs(periodic_potential(lam, w, n) - g.estimate)
