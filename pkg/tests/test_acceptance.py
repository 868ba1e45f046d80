"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""
import cmath
import math
import random
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import reference  # noqa: E402
from conftest import random_poly  # noqa: E402
from test_height import random_section  # noqa: E402

from qfl.bipoly import ONE, Z, degrees, parse_poly  # noqa: E402
from qfl.dynamics import DegreeGrowth, Preperiodic, detect_preperiodic, orbit, pushforward  # noqa: E402
from qfl.green import (  # noqa: E402
    NoWitnessFound, NotContained, Region, curve_in_K_scan, green_value, log_plus, render_escape,
)
from qfl.height import canonical_height_section, graph_curve, parse_section, RatSection, section_orbit  # noqa: E402
from qfl.periodic import divisors, dynatomic, equidist_check, follow_periodic, period_poly, periodic_points  # noqa: E402

PHI1 = parse_poly("z^2 + lam - z")
PHI2 = parse_poly("z^2 + z + lam + 1")


def _report(number, title, body):
    try:
        body()
    except BaseException as exc:
        sys.__stdout__.write(f"\ncriterion {number:2d} FAIL  {title}: {exc!r}\n")
        raise
    sys.__stdout__.write(f"\ncriterion {number:2d} PASS  {title}\n")


def criterion(number, title):
    def wrap(body):
        def test():
            _report(number, title, body)
        test.__name__ = body.__name__
        return test
    return wrap


def _random_inputs():
    rng = random.Random(20240611)
    out = []
    while len(out) < 200:
        p = random_poly(rng, 8, 9)
        if p.deg_z >= 1:
            out.append(p)
    return out


@criterion(1, "pushforward composition identity on 200 random polynomials in < 30 s")
def test_criterion_01_pushforward_identity():
    start = time.perf_counter()
    for p in _random_inputs():
        raw = pushforward(p).raw
        assert raw.subs(z=Z * Z + parse_poly("lam")) == p * p.subs(z=-Z)
    elapsed = time.perf_counter() - start
    assert elapsed < 30, f"took {elapsed:.1f} s"


@criterion(2, "invariant curves are fixed; dynatomic orbits for k <= 4 are preperiodic")
def test_criterion_02_invariant_curves():
    for p in (PHI1, PHI2):
        assert pushforward(p).reduced == p
        assert detect_preperiodic(p) == Preperiodic(0, 1)
    for k in range(1, 5):
        assert isinstance(orbit(dynatomic(k)).outcome, Preperiodic)
        assert isinstance(detect_preperiodic(dynatomic(k)), Preperiodic)


@criterion(3, "degree law on 200 random inputs; orbit of z has deg_sum 1,2,3,5,9,17,33")
def test_criterion_03_degree_law():
    for p in _random_inputs():
        assert degrees(pushforward(p).reduced).deg_sum <= 2 * degrees(p).deg_sum
    orb = orbit(Z, max_steps=10, degree_budget=40)
    assert [e.degrees.deg_sum for e in orb.entries] == [1, 2, 3, 5, 9, 17, 33]
    assert isinstance(orb.outcome, DegreeGrowth)
    est = orb.height_estimates
    assert all(isinstance(e, Fraction) for e in est)
    gaps = [abs(e - Fraction(1, 2)) for e in est[1:]]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert est[-1] == Fraction(33, 64)


@criterion(4, "section heights 1/2, 1, 1/2, 3/2 within 6 steps; bridge identity for m <= 6")
def test_criterion_04_heights():
    cases = [(parse_section("0"), Fraction(1, 2)), (parse_section("lam"), 1), (parse_section("1/lam"), Fraction(3, 2))]
    rng = random.Random(4)
    cases += [(RatSection(Fraction(rng.randint(-99, 99), rng.randint(1, 99))), Fraction(1, 2)) for _ in range(3)]
    for s, h in cases:
        rep = canonical_height_section(s, 6)
        assert rep.status == "stabilized"
        assert rep.height == h
    for _ in range(20):
        s = random_section(rng, 3)
        curve = graph_curve(s)
        for t in section_orbit(s, 6)[1:]:
            curve = pushforward(curve).reduced
            assert curve == graph_curve(t)


@criterion(5, "G(2, 0) = log 2, one-step inequality on 10^4 samples, functional equation on 10^3")
def test_criterion_05_green():
    assert abs(green_value(2, 0, 1e-9).estimate - math.log(2)) <= 1e-9
    rng = np.random.default_rng(5)
    zs = 10 * np.sqrt(rng.random(10_000)) * np.exp(2j * np.pi * rng.random(10_000))
    lams = 10 * np.sqrt(rng.random(10_000)) * np.exp(2j * np.pi * rng.random(10_000))
    violations = sum(abs(log_plus(abs(z * z + l)) - 2 * log_plus(abs(z))) > log_plus(abs(l)) + math.log(2)
                     for z, l in zip(zs, lams))
    assert violations == 0
    checked = 0
    while checked < 1000:
        z = complex(*rng.uniform(-3, 3, 2))
        lam = complex(*rng.uniform(-2, 2, 2))
        g1, g2 = green_value(z, lam), green_value(z * z + lam, lam)
        if g1.resolved and g2.resolved:
            assert abs(g2.estimate - 2 * g1.estimate) <= g2.radius + 2 * g1.radius + 1e-15
            checked += 1


def _match(found, expected, tol):
    found = list(found)
    for x in expected:
        i = min(range(len(found)), key=lambda t: abs(found[t] - x))
        assert abs(found[i] - x) <= tol
        found.pop(i)
    assert not found


@criterion(6, "periodic points at lam = 0, Vieta sums, dynatomic product identity")
def test_criterion_06_periodic_points():
    _match([p.z for p in periodic_points(0, 1)], [0, 1], 1e-10)
    omega = cmath.exp(2j * math.pi / 3)
    pts = periodic_points(0, 2)
    _match([p.z for p in pts], [0, 1, omega, omega.conjugate()], 1e-10)
    for p in pts:
        if abs(p.z - omega) < 1e-6 or abs(p.z - omega.conjugate()) < 1e-6:
            assert p.period == 2 and abs(p.multiplier - 4) <= 1e-10
    rng = random.Random(6)
    for _ in range(20):
        lam = cmath.rect(2 * math.sqrt(rng.random()), 2 * math.pi * rng.random())
        k = rng.randint(1, 8)
        assert abs(sum(p.z for p in periodic_points(lam, k)) - (1 if k == 1 else 0)) <= 1e-9
    for k in range(1, 7):
        prod = ONE
        for d in divisors(k):
            prod = prod * dynatomic(d)
        assert prod == period_poly(k)


@criterion(7, "continuation of the fixed point 1 from lam = 0 to 0.1 and back")
def test_criterion_07_continuation():
    z = follow_periodic(0, 1, 1, 0.1)
    assert abs(z - (1 + math.sqrt(0.6)) / 2) <= 1e-8
    assert abs(follow_periodic(0.1, z, 1, 0) - 1) <= 1e-8


@criterion(8, "equidistribution potential against closed forms and a high-precision reference")
def test_criterion_08_equidistribution():
    assert equidist_check(0, 3, 10) <= 1e-6
    assert equidist_check(0, 2, 20) <= 1e-6
    assert equidist_check(1j, 4, 20) <= 1e-4
    assert abs(green_value(4, 1j).estimate - reference.green_reference(4, 1j)) <= 1e-9


@criterion(9, "parameter render byte-identical across 1, 4, 8 workers; lam=0 black, lam=1 not")
def test_criterion_09_render():
    tmp_path = Path(tempfile.mkdtemp())
    region = Region(-2.1, 0.6, -1.2, 1.2, 400, 300)
    blobs = []
    for workers in (1, 4, 8):
        path = tmp_path / f"m{workers}.pgm"
        render_escape("parameter", region, out_path=str(path), workers=workers)
        blobs.append(path.read_bytes())
    assert blobs[0] == blobs[1] == blobs[2]
    pixels = render_escape("parameter", region)
    x, y = region.pixel_of(0j)
    assert pixels[y, x] == 0
    # lam = 1 lies right of the stated window, so extend it at the same pixel pitch
    wide = Region(-2.1, 1.2, -1.2, 1.2, 489, 300)
    x, y = wide.pixel_of(1 + 0j)
    assert render_escape("parameter", wide, workers=4)[y, x] > 0


@criterion(10, "no escaping witness on the invariant curves; certified witness for z - 3")
def test_criterion_10_curves_in_K():
    for k in range(1, 5):
        assert isinstance(curve_in_K_scan(dynatomic(k)), NoWitnessFound)
    res = curve_in_K_scan(Z - 3, num_lambda=100)
    assert isinstance(res, NotContained)
    assert res.G.certified_positive


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
