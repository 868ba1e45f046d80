"""Escape rate G(z, lam) = lim 2^-n log+|f_lam^n(z)| with rigorous error radii.

Orbits are iterated in ball arithmetic: a floating-point center plus a
radius that absorbs every rounding error, so a ball that clears the escape
radius certifies that the exact orbit escapes.  Once |z| is huge the
remaining terms of the telescoping series

    G = 2^-n log|z_n| + sum_m 2^-(n+m+1) log|1 + lam / z_{n+m}^2|

are bounded by |lam| / (|z_n|^2 - |lam|) instead of being iterated.  When
no escape is certified, the generic bound
|G - 2^-n log+|z_n|| <= (log+|lam| + log 2) / 2^(n-1) gives an enclosure.
"""
from __future__ import annotations

import math
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from qfl.bipoly import strip_vertical

U = 2.0 ** -53
LOG2 = math.log(2.0)
SWITCH = 1e8           # leave the complex iteration once |z| exceeds SWITCH * max(1, sqrt|lam|)
BALL_GIVE_UP = 1e4     # stop when the ball radius exceeds this multiple of the escape radius
SAMPLE_RADIUS = 4.0
OVERFLOW_GUARD = 1e153  # squaring stays finite below this
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CertifiedValue:
    """G lies in [max(0, estimate - radius), estimate + radius]."""
    estimate: float
    radius: float
    resolved: bool

    @property
    def lower(self):
        return max(0.0, self.estimate - self.radius)

    @property
    def upper(self):
        return self.estimate + self.radius

    @property
    def certified_positive(self):
        return self.resolved and self.estimate - self.radius > 0.0


@dataclass(frozen=True)
class Escapes:
    G: CertifiedValue


@dataclass(frozen=True)
class NoEscapeWithin:
    bound: float


def log_plus(x):
    return math.log(x) if x > 1.0 else 0.0


def one_step_bound(lam):
    """log+|lam| + log 2, the one-step defect of log+|z| under z -> z^2 + lam."""
    return log_plus(abs(lam)) + LOG2


def iteration_cap(lam, eps):
    """N(eps) = ceil(log2((log+|lam| + log 2) / eps)) + 1."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    return max(1, math.ceil(math.log2(one_step_bound(lam) / eps)) + 1)


def _check_finite(*values):
    for v in values:
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(f"non-finite input {v!r}")


def green_core(z, lam, cap, r0=None):
    """Vectorized certified evaluation.

    ``z``, ``lam`` and ``cap`` broadcast together; ``r0`` is an optional
    initial ball radius around ``z``.  Returns (estimate, radius, resolved)
    arrays.
    """
    z, lam, cap = np.broadcast_arrays(np.asarray(z, dtype=complex),
                                      np.asarray(lam, dtype=complex),
                                      np.asarray(cap, dtype=np.int64))
    shape = z.shape
    c = z.ravel().copy()
    lam = lam.ravel().copy()
    cap = cap.ravel()
    r = np.zeros(c.shape) if r0 is None else np.broadcast_to(np.asarray(r0, float), shape).ravel().copy()

    abs_lam = np.abs(lam)
    escape_r = (1.0 + np.maximum(abs_lam, 2.0)) * (1 + 8 * U)
    switch = SWITCH * np.maximum(1.0, np.sqrt(abs_lam))
    defect = np.where(abs_lam > 1.0, np.log(np.maximum(abs_lam, 1.0)), 0.0) + LOG2

    n = np.zeros(c.shape, dtype=np.int64)
    active = np.ones(c.shape, dtype=bool)
    escaped = np.zeros(c.shape, dtype=bool)
    est = np.zeros(c.shape)
    rad = np.zeros(c.shape)
    resolved = np.zeros(c.shape, dtype=bool)

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for _ in range(int(cap.max(initial=0)) + 128):
            a = np.abs(c)
            lo = (a * (1 - 4 * U) - r) * (1 - 4 * U)
            hi = (a * (1 + 4 * U) + r) * (1 + 4 * U)
            escaped |= active & (lo > escape_r)

            done_res = active & escaped & (lo > switch)
            if done_res.any():
                idx = done_res
                llo, lhi = np.log(lo[idx]), np.log(hi[idx])
                tail = abs_lam[idx] / (lo[idx] * lo[idx] - abs_lam[idx])
                scale = np.ldexp(1.0, -n[idx])
                e = 0.5 * (llo + lhi) * scale
                est[idx] = e
                rad[idx] = (0.5 * (lhi - llo) + tail) * scale * (1 + 8 * U) + 8 * U * np.abs(e) + 1e-300
                resolved[idx] = True

            done_unres = active & ~escaped & (
                (n >= cap) | (r > BALL_GIVE_UP * escape_r) | ~np.isfinite(a) | ~np.isfinite(r) | (a > OVERFLOW_GUARD))
            if done_unres.any():
                idx = done_unres
                lo_i = np.nan_to_num(lo[idx], nan=0.0, posinf=0.0)
                hi_i = hi[idx]
                lp_lo = np.log(np.maximum(lo_i, 1.0))
                lp_hi = np.log(np.maximum(hi_i, 1.0))
                scale = np.ldexp(1.0, -n[idx])
                e = 0.5 * (lp_lo + lp_hi) * scale
                bound = defect[idx] * np.ldexp(1.0, 1 - n[idx])
                est[idx] = np.nan_to_num(e, nan=np.inf)
                rad[idx] = np.nan_to_num((0.5 * (lp_hi - lp_lo) * scale + bound) * (1 + 8 * U)
                                         + 8 * U * np.abs(e), nan=np.inf)
                resolved[idx] = False

            active &= ~(done_res | done_unres)
            if not active.any():
                break
            cn = c * c + lam
            rnd = 4 * U * (a * a + abs_lam + np.abs(cn)) + 1e-300
            rn = (2.0 * a * r + r * r + rnd) * (1 + 8 * U)
            c = np.where(active, cn, c)
            r = np.where(active, rn, r)
            n += active
        if active.any():
            raise RuntimeError("escape iteration did not terminate")
    est = np.maximum(est, 0.0)
    return est.reshape(shape), rad.reshape(shape), resolved.reshape(shape)


def green_value(z, lam, eps=1e-9):
    """Certified value of G(z, lam).

    ``resolved`` is True when the orbit is certified to escape; the radius
    is then at the level of double rounding, below ``eps`` unless ``eps``
    asks for more than double precision can deliver.
    """
    z, lam = complex(z), complex(lam)
    _check_finite(z, lam)
    cap = iteration_cap(lam, eps)
    e, r, ok = green_core([z], [lam], [cap])
    return CertifiedValue(float(e[0]), float(r[0]), bool(ok[0]))


def in_K_test(z, lam, eps=1e-9):
    """Escapes when G > 0 is certified; membership in K_lam is never certified."""
    g = green_value(z, lam, eps)
    if g.certified_positive:
        return Escapes(g)
    return NoEscapeWithin(g.upper)


def mandelbrot_test(lam, eps=1e-9):
    """Escapes certifies lam outside the Mandelbrot set."""
    return in_K_test(0.0, lam, eps)


# -- curves against the bounded locus ----------------------------------------------

@dataclass(frozen=True)
class NotContained:
    witness: tuple
    G: CertifiedValue
    inclusion_radius: float


@dataclass(frozen=True)
class NoWitnessFound:
    samples: int
    skipped: tuple = ()


def sample_parameters(num, seed):
    """Seeded low-discrepancy points (Vogel spiral) in |lam| <= 4."""
    rnd = random.Random(seed)
    u, v = rnd.random(), rnd.random()
    out = []
    for k in range(num):
        radius = SAMPLE_RADIUS * math.sqrt((k + u) / num)
        angle = 2 * math.pi * ((k * _GOLDEN + v) % 1.0)
        out.append(complex(radius * math.cos(angle), radius * math.sin(angle)))
    return out


def _root_inclusion(p, lam, root):
    """Radius of a disk about ``root`` that provably contains a zero of P(lam, .).

    Uses the classical bound: some zero lies within d |p(z) / p'(z)|, with
    rounding in the evaluation accounted for by a running magnitude bound.
    """
    d = p.deg_z
    lam_abs, z_abs = abs(lam), abs(root)
    val = der = 0j
    mag = 0.0
    for (i, j), coef in p.items():
        c = float(coef) * lam ** i
        val += c * root ** j
        if j:
            der += j * c * root ** (j - 1)
        mag += abs(float(coef)) * lam_abs ** i * max(z_abs, 1.0) ** j * (j + 1)
    err = 16 * (p.deg_lambda + d + 2) * U * mag
    den = abs(der) - err
    if den <= 0:
        return None
    return d * (abs(val) + err) / den * (1 + 1e-12)


def curve_in_K_scan(p, num_lambda=64, eps=1e-9, seed=0):
    """Look for a point of {P = 0} whose orbit provably escapes.

    Each sampled lam contributes the roots of P(lam, .); a root counts as a
    witness only if a disk guaranteed to contain an exact root escapes
    under ball iteration, so float drift near Julia sets never produces a
    false witness.
    """
    if num_lambda < 1:
        raise ValueError("num_lambda must be at least 1")
    if strip_vertical(p)[1].is_constant():
        raise ValueError("curve has no non-vertical component")
    skipped = []
    for lam in sample_parameters(num_lambda, seed):
        coeffs = p.z_coefficients(lam)
        scale = max(abs(c) for c in coeffs)
        while coeffs and abs(coeffs[-1]) <= 1e-12 * scale:
            coeffs.pop()
        if len(coeffs) < 2:
            skipped.append((lam, "no roots in z at this parameter"))
            continue
        try:
            roots = np.roots(coeffs[::-1])
        except np.linalg.LinAlgError as exc:
            skipped.append((lam, f"root finding failed: {exc}"))
            continue
        cap = iteration_cap(lam, eps)
        for root in roots:
            r0 = _root_inclusion(p, lam, complex(root))
            if r0 is None:
                continue
            e, rad, ok = green_core([root], [lam], [cap], [r0])
            g = CertifiedValue(float(e[0]), float(rad[0]), bool(ok[0]))
            if g.certified_positive:
                return NotContained((complex(root), lam), g, r0)
    return NoWitnessFound(num_lambda, tuple(skipped))


# -- rendering ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Region:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    width_px: int
    height_px: int

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("empty region")
        if self.width_px < 1 or self.height_px < 1:
            raise ValueError("pixel dimensions must be positive")

    def row(self, y):
        """Pixel-center coordinates of row y (row 0 at im_max)."""
        dx = (self.re_max - self.re_min) / self.width_px
        dy = (self.im_max - self.im_min) / self.height_px
        re = self.re_min + (np.arange(self.width_px) + 0.5) * dx
        return re + 1j * (self.im_max - (y + 0.5) * dy)

    def pixel_of(self, w):
        """(x, y) of the pixel containing w, or None outside the region."""
        x = math.floor((w.real - self.re_min) / (self.re_max - self.re_min) * self.width_px)
        y = math.floor((self.im_max - w.imag) / (self.im_max - self.im_min) * self.height_px)
        if 0 <= x < self.width_px and 0 <= y < self.height_px:
            return x, y
        return None


def escape_rates(kind, region, eps=1e-9, lam=None, workers=1):
    """Per-pixel (estimate, certified-escape mask), computed row by row.

    Every row is evaluated by the same call regardless of ``workers``,
    so results do not depend on the partition.
    """
    if kind == "dynamical":
        if lam is None:
            raise ValueError("dynamical render needs lam")
        lam = complex(lam)
        _check_finite(lam)
    elif kind != "parameter":
        raise ValueError(f"unknown render kind {kind!r}")

    def one_row(y):
        pts = region.row(y)
        if kind == "parameter":
            caps = np.array([iteration_cap(complex(v), eps) for v in pts])
            e, r, ok = green_core(np.zeros_like(pts), pts, caps)
        else:
            e, r, ok = green_core(pts, lam, iteration_cap(lam, eps))
        return e, ok & (e - r > 0)

    rows = range(region.height_px)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_row, rows))
    else:
        results = [one_row(y) for y in rows]
    est = np.vstack([e for e, _ in results])
    mask = np.vstack([m for _, m in results])
    return est, mask


def to_gray(est, mask):
    """0 where no escape is certified, else 255 * G / G_max (at least 1)."""
    pixels = np.zeros(est.shape, dtype=np.uint8)
    if mask.any():
        gmax = est[mask].max()
        level = np.floor(255.0 * np.minimum(est / gmax, 1.0) + 0.5)
        pixels[mask] = np.maximum(level[mask], 1).astype(np.uint8)
    return pixels


def write_pgm(path, pixels):
    h, w = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(pixels, dtype=np.uint8).tobytes())


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+255\s", data)
    if not m:
        raise ValueError("not an 8-bit P5 PGM file")
    w, h = int(m.group(1)), int(m.group(2))
    return np.frombuffer(data[m.end():m.end() + w * h], dtype=np.uint8).reshape(h, w)


def render_escape(kind, region, eps=1e-9, out_path=None, lam=None, workers=1):
    est, mask = escape_rates(kind, region, eps, lam, workers)
    pixels = to_gray(est, mask)
    if out_path is not None:
        write_pgm(out_path, pixels)
    return pixels
