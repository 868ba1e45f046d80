"""Dense univariate polynomials as coefficient lists, lowest degree first.

Coefficients are ``int`` or ``Fraction``. ``[]`` is the zero polynomial and
every function returns trimmed lists. These helpers back the gcd and exact
division code in :mod:`qfl.bipoly`, where bivariate polynomials are viewed
as polynomials in z over Q[lam].
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd

from gmpy2 import mpz

# Products with more coefficient pairs than this go through Kronecker packing.
_KRONECKER_THRESHOLD = 2000


def trim(a):
    n = len(a)
    while n and not a[n - 1]:
        n -= 1
    return a[:n] if n != len(a) else a


def deg(a):
    return len(a) - 1


def add(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return trim(out)


def sub(a, b):
    out = list(a) + [0] * (len(b) - len(a))
    for i, c in enumerate(b):
        out[i] -= c
    return trim(out)


def neg(a):
    return [-c for c in a]


def scale(a, c):
    if not c:
        return []
    return [x * c for x in a]


def shift(a, k):
    return [0] * k + a if a else []


def _pack(a, bits):
    # a: non-negative ints, each < 2**bits
    width = (bits + 7) // 8
    return int.from_bytes(b"".join(c.to_bytes(width, "little") for c in a), "little")


def _unpack(n, bits, count):
    width = (bits + 7) // 8
    raw = n.to_bytes(width * count, "little")
    return [int.from_bytes(raw[i * width:(i + 1) * width], "little") for i in range(count)]


def _split_sign(a):
    pos = [c if c > 0 else 0 for c in a]
    negp = [-c if c < 0 else 0 for c in a]
    return pos, negp


def _kronecker_mul(a, b):
    ma = max(abs(c) for c in a)
    mb = max(abs(c) for c in b)
    bound = 2 * min(len(a), len(b)) * ma * mb + 1
    bits = bound.bit_length() + 1
    bits = (bits + 7) // 8 * 8
    ap, an = _split_sign(a)
    bp, bn = _split_sign(b)
    # GMP's subquadratic multiplication does the heavy lifting
    Ap, An = mpz(_pack(ap, bits)), mpz(_pack(an, bits))
    Bp, Bn = mpz(_pack(bp, bits)), mpz(_pack(bn, bits))
    count = len(a) + len(b) - 1
    plus = _unpack(int(Ap * Bp + An * Bn), bits, count)
    minus = _unpack(int(Ap * Bn + An * Bp), bits, count)
    return trim([x - y for x, y in zip(plus, minus)])


def mul(a, b):
    if not a or not b:
        return []
    if (len(a) * len(b) > _KRONECKER_THRESHOLD
            and all(type(c) is int for c in a) and all(type(c) is int for c in b)):
        return _kronecker_mul(a, b)
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return trim(out)


def power(a, n):
    result = [1]
    while n:
        if n & 1:
            result = mul(result, a)
        n >>= 1
        if n:
            a = mul(a, a)
    return result


def qdiv(x, y):
    """Exact quotient x / y, kept as ``int`` when it is integral."""
    if type(x) is int and type(y) is int:
        q, r = divmod(x, y)
        if not r:
            return q
    q = Fraction(x) / y
    return q.numerator if q.denominator == 1 else q


def divmod_(a, b):
    """Quotient and remainder over Q."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    if len(r) - 1 < db:
        return [], trim(r)
    q = [0] * (len(r) - db)
    for k in range(len(r) - 1, db - 1, -1):
        c = r[k]
        if not c:
            continue
        c = qdiv(c, lb)
        q[k - db] = c
        for i, y in enumerate(b):
            r[k - db + i] -= c * y
    return trim(q), trim(r[:db])


def exquo(a, b):
    """a / b if b divides a exactly in Q[x], else ``None``."""
    q, r = divmod_(a, b)
    return None if r else q


def exquo_int(a, b):
    """a / b when the quotient is known to lie in Z[x]; ``None`` otherwise."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if not a:
        return []
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    if len(r) - 1 < db:
        return None
    q = [0] * (len(r) - db)
    for k in range(len(r) - 1, db - 1, -1):
        c = r[k]
        if not c:
            continue
        c, rem = divmod(c, lb)
        if rem:
            return None
        q[k - db] = c
        for i, y in enumerate(b):
            r[k - db + i] -= c * y
    if any(r[:db]):
        return None
    return trim(q)


def prem(a, b):
    """Pseudo-remainder lc(b)^(deg a - deg b + 1) * a mod b, over Z."""
    da, db = len(a) - 1, len(b) - 1
    if da < db:
        return list(a)
    r = list(a)
    lb = b[-1]
    n = da - db + 1
    while r and len(r) - 1 >= db:
        j = len(r) - 1 - db
        lr = r[-1]
        r = [c * lb for c in r]
        for i, y in enumerate(b):
            r[i + j] -= lr * y
        r = trim(r)
        n -= 1
    return [c * lb ** n for c in r] if n else r


def content(a):
    g = 0
    for c in a:
        g = gcd(g, c)
        if g == 1:
            break
    return g


def primitive(a):
    """Primitive part with positive leading coefficient."""
    if not a:
        return []
    g = content(a)
    if a[-1] < 0:
        g = -g
    return a if g == 1 else [c // g for c in a]


def gcd_int(a, b):
    """gcd in Z[x], primitive PRS; sign normalized to a positive leading coefficient."""
    if not a:
        return primitive(b) if b else []
    if not b:
        return primitive(a)
    c = gcd(content(a), content(b))
    a, b = primitive(a), primitive(b)
    if len(a) > 1 and len(b) > 1 and coprime_modp(a, b):
        return [c]
    if len(a) < len(b):
        a, b = b, a
    while b:
        if len(b) == 1:
            return [c]
        r = prem(a, b)
        a, b = b, primitive(r)
    return [c * x for x in a]


_PRIMES = ((1 << 61) - 1, (1 << 31) - 1)


def coprime_modp(a, b):
    """True only if a, b are certainly coprime in Q[x].

    When neither leading coefficient vanishes mod p, the true gcd maps to a
    common divisor of the reductions, so a constant gcd mod p settles it.
    """
    for p in _PRIMES:
        if a[-1] % p and b[-1] % p:
            return gcd_degree_modp(to_modp(a, p), to_modp(b, p), p) == 0
    return False


def derivative(a):
    return trim([i * c for i, c in enumerate(a)][1:])


def evaluate(a, x):
    acc = 0
    for c in reversed(a):
        acc = acc * x + c
    return acc


def to_modp(a, p):
    return trim([c % p for c in a])


def gcd_degree_modp(a, b, p):
    """Degree of gcd(a, b) over F_p (inputs already reduced mod p)."""
    while b:
        inv = pow(b[-1], -1, p)
        r = list(a)
        db = len(b) - 1
        while r and len(r) - 1 >= db:
            c = r[-1] * inv % p
            j = len(r) - 1 - db
            for i, y in enumerate(b):
                r[i + j] = (r[i + j] - c * y) % p
            r = trim(r)
        a, b = b, r
    return len(a) - 1
