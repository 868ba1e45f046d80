"""Exact sparse polynomials in (lam, z) with rational coefficients.

A :class:`BiPoly` maps exponent pairs ``(i, j)`` -- ``i`` the power of lam,
``j`` the power of z -- to nonzero ``int`` or ``Fraction`` coefficients.
Values are immutable.  The module also holds the curve-level operations
the pushforward needs: canonical normalization, gcd, squarefree part,
removal of vertical (lam-only) factors and the even/odd split
``P(lam, z) = A(lam, z^2 + lam) + z * B(lam, z^2 + lam)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd as igcd
from numbers import Rational

from qfl import _upoly as up

__all__ = [
    "BiPoly", "Degrees", "PolySyntaxError", "UnknownVariableError",
    "ZeroPolynomialError", "LAM", "Z", "ONE", "parse_poly", "format_poly",
    "evaluate", "degrees", "normalize", "gcd", "squarefree_part",
    "strip_vertical", "decompose", "divide_exact", "divides",
]


class ZeroPolynomialError(ValueError):
    """Raised by operations that are undefined on the zero polynomial."""


class PolySyntaxError(ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownVariableError(PolySyntaxError):
    pass


def _coerce(c):
    if isinstance(c, bool):
        return int(c)
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, Rational):
        return _coerce(Fraction(c.numerator, c.denominator))
    raise TypeError(f"coefficient must be an exact rational, got {type(c).__name__}")


@dataclass(frozen=True)
class Degrees:
    deg_lambda: int
    deg_z: int

    @property
    def deg_sum(self) -> int:
        return self.deg_lambda + self.deg_z


class BiPoly:
    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        data = {}
        if terms:
            items = terms.items() if hasattr(terms, "items") else terms
            for (i, j), c in items:
                if i < 0 or j < 0:
                    raise ValueError("negative exponent")
                c = _coerce(c)
                if c:
                    key = (int(i), int(j))
                    c = data.get(key, 0) + c
                    if c:
                        data[key] = _coerce(c)
                    else:
                        data.pop(key, None)
        self._terms = data
        self._hash = None

    @classmethod
    def _raw(cls, data):
        # trusted constructor: keys are int pairs, values nonzero and coerced
        obj = cls.__new__(cls)
        obj._terms = data
        obj._hash = None
        return obj

    @classmethod
    def constant(cls, c):
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, c, i=0, j=0):
        return cls({(i, j): c})

    @classmethod
    def from_lambda_coeffs(cls, coeffs, j=0):
        """``sum coeffs[i] * lam^i * z^j``."""
        return cls({(i, j): c for i, c in enumerate(coeffs) if c})

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, i, j):
        return self._terms.get((i, j), 0)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_constant(self):
        return not self._terms or set(self._terms) == {(0, 0)}

    def is_lambda_only(self):
        return all(j == 0 for _, j in self._terms)

    @property
    def deg_z(self):
        return max((j for _, j in self._terms), default=-1)

    @property
    def deg_lambda(self):
        return max((i for i, _ in self._terms), default=-1)

    def degrees(self):
        return degrees(self)

    def __eq__(self, other):
        if isinstance(other, BiPoly):
            return self._terms == other._terms
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == ({(0, 0): other} if other else {})

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self):
        return f"BiPoly({format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)

    # -- ring operations ---------------------------------------------------

    @staticmethod
    def _lift(x):
        if isinstance(x, BiPoly):
            return x
        return BiPoly.constant(_coerce(x))

    def __neg__(self):
        return BiPoly._raw({k: -c for k, c in self._terms.items()})

    def __pos__(self):
        return self

    def __add__(self, other):
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        data = dict(self._terms)
        for k, c in other._terms.items():
            s = data.get(k, 0) + c
            if s:
                data[k] = _coerce(s)
            else:
                data.pop(k, None)
        return BiPoly._raw(data)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        return _mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        # division by a nonzero rational constant only
        if isinstance(other, BiPoly):
            if not other.is_constant() or not other:
                raise ValueError("division by a non-constant polynomial; use divide_exact")
            other = other.coefficient(0, 0)
        other = _coerce(other)
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        return BiPoly._raw({k: up.qdiv(c, other) for k, c in self._terms.items()})

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def subs(self, z=None, lam=None):
        """Substitute polynomials for z and/or lam (a ring homomorphism)."""
        zs = Z if z is None else self._lift(z)
        ls = LAM if lam is None else self._lift(lam)
        rows = _rows_by_z(self)
        if ls != LAM:
            rows = {j: _horner(_lambda_list(r), ls) for j, r in rows.items()}
        result = ZERO
        for j in range(self.deg_z, -1, -1):
            result = result * zs
            row = rows.get(j)
            if row is not None:
                result = result + row
        return result

    def diff_z(self):
        return BiPoly._raw({(i, j - 1): _coerce(j * c) for (i, j), c in self._terms.items() if j})

    def diff_lambda(self):
        return BiPoly._raw({(i - 1, j): _coerce(i * c) for (i, j), c in self._terms.items() if i})

    def __call__(self, lam, z):
        return evaluate(self, lam, z)

    def z_coefficients(self, lam):
        """Coefficients (lowest first) of P(lam, .) as a polynomial in z at numeric lam."""
        exact = isinstance(lam, (int, Fraction))
        out = [0] * (self.deg_z + 1)
        for j, row in _rows_by_z(self).items():
            coeffs = _lambda_list(row)
            acc = 0
            for c in reversed(coeffs):
                acc = acc * lam + (c if exact else float(c))
            out[j] = acc
        return out


ZERO = BiPoly()
ONE = BiPoly({(0, 0): 1})
Z = BiPoly({(0, 1): 1})
LAM = BiPoly({(1, 0): 1})


def _mul(p, q):
    if not p or not q:
        return ZERO
    if len(p) * len(q) > 4000:
        return _kronecker_bimul(p, q)
    data = {}
    get = data.get
    for (i1, j1), c1 in p._terms.items():
        for (i2, j2), c2 in q._terms.items():
            k = (i1 + i2, j1 + j2)
            data[k] = get(k, 0) + c1 * c2
    return BiPoly._raw({k: _coerce(c) for k, c in data.items() if c})


def _integer_scaled(p):
    den = 1
    for c in p._terms.values():
        if type(c) is not int:
            den = den * c.denominator // igcd(den, c.denominator)
    return den, [(k, int(c * den)) for k, c in p._terms.items()]


def _kronecker_bimul(p, q):
    dp, tp = _integer_scaled(p)
    dq, tq = _integer_scaled(q)
    width = p.deg_lambda + q.deg_lambda + 1
    a = [0] * ((p.deg_z + 1) * width)
    b = [0] * ((q.deg_z + 1) * width)
    for (i, j), c in tp:
        a[i + j * width] = c
    for (i, j), c in tq:
        b[i + j * width] = c
    prod = up.mul(up.trim(a), up.trim(b))
    den = dp * dq
    data = {}
    for n, c in enumerate(prod):
        if c:
            j, i = divmod(n, width)
            data[(i, j)] = up.qdiv(c, den) if den != 1 else c
    return BiPoly._raw(data)


def _rows_by_z(p):
    rows = {}
    for (i, j), c in p._terms.items():
        rows.setdefault(j, {})[(i, 0)] = c
    return {j: BiPoly._raw(r) for j, r in rows.items()}


def _lambda_list(p):
    """Coefficient list (lowest first) of a lam-only polynomial."""
    out = [0] * (p.deg_lambda + 1)
    for (i, _), c in p._terms.items():
        out[i] = c
    return out


def _horner(coeffs, x):
    result = ZERO
    for c in reversed(coeffs):
        result = result * x + c
    return result


# -- parsing and formatting -------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]\w*)|(\*\*|[-+*/^()]))")


def _tokenize(text):
    pos = 0
    tokens = []
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise PolySyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("num", int(m.group(1)), start))
        elif m.group(2):
            tokens.append(("name", m.group(2), start))
        else:
            op = m.group(3)
            tokens.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    """Recursive descent over the grammar::

        expr   := term (('+' | '-') term)*
        term   := unary (('*' | '/' | <juxtaposition>) unary)*
        unary  := ('+' | '-') unary | power
        power  := atom ('^' integer)?
        atom   := integer | 'z' | 'lam' | '(' expr ')'

    Values are kept as (numerator, denominator) pairs; whether a
    non-constant denominator is acceptable is up to the caller.
    """

    def __init__(self, text, variables, allow_division):
        self.tokens = _tokenize(text)
        self.k = 0
        self.variables = variables
        self.allow_division = allow_division

    def peek(self):
        return self.tokens[self.k]

    def take(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if kind != "op" or val != value:
            raise PolySyntaxError(f"expected {value!r}", pos)

    def parse(self):
        value = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise PolySyntaxError("unexpected token", pos)
        return value

    def expr(self):
        num, den = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                n2, d2 = self.term()
                if val == "-":
                    n2 = -n2
                if den == d2:
                    num = num + n2
                else:
                    num, den = num * d2 + n2 * den, den * d2
            else:
                return num, den

    def term(self):
        num, den = self.unary()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                n2, d2 = self.unary()
                if val == "*":
                    num, den = num * n2, den * d2
                else:
                    if not n2:
                        raise PolySyntaxError("division by zero", pos)
                    if not self.allow_division and not n2.is_constant():
                        raise PolySyntaxError("division by a non-constant polynomial", pos)
                    num, den = num * d2, den * n2
            elif kind in ("num", "name") or (kind == "op" and val == "("):
                n2, d2 = self.unary()
                num, den = num * n2, den * d2
            else:
                return num, den

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            num, den = self.unary()
            return (-num, den) if val == "-" else (num, den)
        return self.power()

    def power(self):
        num, den = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, e, pos = self.take()
            if kind != "num":
                raise PolySyntaxError("exponent must be a non-negative integer", pos)
            return num ** e, den ** e
        return num, den

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return BiPoly.constant(val), ONE
        if kind == "name":
            if val not in self.variables:
                raise UnknownVariableError(f"unknown variable {val!r}", pos)
            return self.variables[val], ONE
        if kind == "op" and val == "(":
            value = self.expr()
            self.expect(")")
            return value
        raise PolySyntaxError("unexpected token" if kind != "end" else "unexpected end of input", pos)


_VARIABLES = {"z": Z, "lam": LAM}


def parse_poly(text):
    """Parse text such as ``"z^2 + lam - z"`` or ``"1/2 z (z - lam)"``."""
    num, den = _Parser(text, _VARIABLES, allow_division=False).parse()
    return num / den


def _parse_fraction(text, variables):
    return _Parser(text, variables, allow_division=True).parse()


def _format_coefficient(c):
    return str(c) if type(c) is int else f"{c.numerator}/{c.denominator}"


def format_poly(p):
    """Canonical text: terms by decreasing (deg_z, deg_lam)."""
    if not p:
        return "0"
    parts = []
    for (i, j) in sorted(p._terms, key=lambda k: (k[1], k[0]), reverse=True):
        c = p._terms[(i, j)]
        sign = "-" if c < 0 else "+"
        c = abs(c)
        factors = []
        if i:
            factors.append("lam" if i == 1 else f"lam^{i}")
        if j:
            factors.append("z" if j == 1 else f"z^{j}")
        if c != 1 or not factors:
            factors.insert(0, _format_coefficient(c))
        parts.append((sign, "*".join(factors)))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


# -- evaluation and degrees ---------------------------------------------------

def evaluate(p, lam, z):
    """Horner evaluation of P at (lam, z).

    Exact when both arguments are ints or Fractions; otherwise coefficients
    are converted to float and any numeric type (complex, numpy arrays)
    works.
    """
    coeffs = p.z_coefficients(lam)
    acc = 0
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def degrees(p):
    if not p:
        raise ZeroPolynomialError("degrees of the zero polynomial are undefined")
    return Degrees(p.deg_lambda, p.deg_z)


def _lead_key(p):
    return max(p._terms, key=lambda k: (k[1], k[0]))


def normalize(p):
    """Primitive integer representative with positive leading (z, then lam) term."""
    if not p:
        raise ZeroPolynomialError("cannot normalize the zero polynomial")
    den = 1
    num = 0
    for c in p._terms.values():
        if type(c) is int:
            num = igcd(num, c)
        else:
            den = den * c.denominator // igcd(den, c.denominator)
            num = igcd(num, c.numerator)
    if p._terms[_lead_key(p)] < 0:
        num = -num
    if den == 1:
        if num == 1:
            return p
        return BiPoly._raw({k: c // num for k, c in p._terms.items()})
    return BiPoly._raw({k: int(c * den) // num for k, c in p._terms.items()})


# -- dense views for gcd and division ------------------------------------------

def _to_zdense(p):
    """Integer rows: P = (1/den) * sum rows[j](lam) z^j."""
    den, terms = _integer_scaled(p)
    widths = [0] * (p.deg_z + 1)
    for (i, j), _ in terms:
        widths[j] = max(widths[j], i + 1)
    rows = [[0] * w for w in widths]
    for (i, j), c in terms:
        rows[j][i] = c
    return rows


def _from_zdense(rows):
    data = {}
    for j, row in enumerate(rows):
        for i, c in enumerate(row):
            if c:
                data[(i, j)] = _coerce(c)
    return BiPoly._raw(data)


def _ztrim(rows):
    n = len(rows)
    while n and not rows[n - 1]:
        n -= 1
    return rows[:n]


def _lam_content(rows):
    """Content in Z[lam]: primitive-with-positive-lead times the integer content."""
    g = []
    for r in rows:
        if r:
            g = up.gcd_int(g, r)
            if len(g) == 1 and g[0] == 1:
                break
    return g


def _bprem(f, g):
    dg = len(g) - 1
    r = list(f)
    lc = g[-1]
    n = len(f) - len(g) + 1
    while r and len(r) - 1 >= dg:
        j = len(r) - 1 - dg
        lr = r[-1]
        r = [up.mul(c, lc) for c in r]
        for i, y in enumerate(g):
            r[i + j] = up.sub(r[i + j], up.mul(lr, y))
        r = _ztrim(r)
        n -= 1
    if n > 0:
        m = up.power(lc, n)
        r = [up.mul(c, m) for c in r]
    return r


def _exquo_rows(rows, b):
    out = []
    for r in rows:
        q = up.exquo_int(r, b)
        if q is None:
            raise ArithmeticError("inexact division in subresultant sequence")
        out.append(q)
    return out


def _subresultant_last(f, g):
    """Last nonzero member of the subresultant PRS of f, g in Z[lam][z]."""
    if len(f) < len(g):
        f, g = g, f
    n, m = len(f) - 1, len(g) - 1
    d = n - m
    last = g
    h = _bprem(f, g)
    if d % 2 == 0:
        h = [up.neg(c) for c in h]
    lc = g[-1]
    c = up.power(lc, d)
    c = up.neg(c)
    while h:
        k = len(h) - 1
        last = h
        f, g, m, d = g, h, k, m - k
        b = up.mul(up.neg(lc), up.power(c, d))
        h = _bprem(f, g)
        h = _exquo_rows(h, b) if h else h
        lc = g[-1]
        if d > 1:
            q = up.power(c, d - 1)
            num = up.power(up.neg(lc), d)
            c = up.exquo_int(num, q)
            if c is None:
                raise ArithmeticError("inexact division in subresultant sequence")
        else:
            c = up.neg(lc)
    return last


_MODULUS = (1 << 61) - 1


def _coprime_by_specialization(f, g):
    # Specializing lam and reducing mod p keeps the gcd degree or raises it,
    # provided neither leading coefficient vanishes; degree 0 is conclusive.
    for lam0 in (1009, 7919, 104729):
        fl = up.to_modp([up.evaluate(r, lam0) for r in f], _MODULUS)
        gl = up.to_modp([up.evaluate(r, lam0) for r in g], _MODULUS)
        if len(fl) != len(f) or len(gl) != len(g):
            continue
        return up.gcd_degree_modp(fl, gl, _MODULUS) == 0
    return False


def _primitive_gcd(f, g):
    """gcd of primitive f, g in Z[lam][z] (up to sign)."""
    if len(f) == 1 or len(g) == 1:
        return [[1]]
    if _coprime_by_specialization(f, g):
        return [[1]]
    h = _subresultant_last(f, g)
    if len(h) == 1:
        return [[1]]
    return _exquo_rows(h, _lam_content(h))


def gcd(p, q):
    """Normalized greatest common divisor in Q[lam, z]."""
    if not p and not q:
        raise ZeroPolynomialError("gcd(0, 0) is undefined")
    if not p:
        return normalize(q)
    if not q:
        return normalize(p)
    f, g = _to_zdense(p), _to_zdense(q)
    cf, cg = _lam_content(f), _lam_content(g)
    content = up.gcd_int(cf, cg)
    f, g = _exquo_rows(f, cf), _exquo_rows(g, cg)
    h = _primitive_gcd(f, g)
    return normalize(_from_zdense([up.mul(content, r) for r in h]))


def squarefree_part(p):
    """normalize(P / gcd(P, dP/dz, dP/dlam)): same zero set, no repeated factors."""
    if not p:
        raise ZeroPolynomialError("squarefree part of the zero polynomial")
    g = gcd(p, p.diff_z())
    if g != ONE:
        g = gcd(g, p.diff_lambda())
    if g == ONE:
        return normalize(p)
    return normalize(divide_exact(p, g))


def strip_vertical(p):
    """Split P = V * H with V(lam) the Q[lam]-content of P (its vertical part)."""
    if not p:
        raise ZeroPolynomialError("strip_vertical of the zero polynomial")
    content = _lam_content(_to_zdense(p))
    v = normalize(BiPoly.from_lambda_coeffs(content))
    return v, divide_exact(p, v)


def decompose(p):
    """(A, B) with P(lam, z) = A(lam, z^2 + lam) + z * B(lam, z^2 + lam).

    A and B are returned as polynomials in (lam, w), w stored in the z slot.
    """
    even, odd = {}, {}
    for (i, j), c in p._terms.items():
        if j % 2:
            odd[(i, j // 2)] = c
        else:
            even[(i, j // 2)] = c
    shift = Z - LAM
    return BiPoly._raw(even).subs(z=shift), BiPoly._raw(odd).subs(z=shift)


def _divide_rows(f, g):
    """Quotient rows of f / g in Z[lam][z] for primitive g, or None."""
    dg = len(g) - 1
    if not f:
        return []
    if len(f) - 1 < dg:
        return None
    lc = g[-1]
    monic = lc == [1]
    r = list(f)
    q = [[] for _ in range(len(f) - dg)]
    for k in range(len(r) - 1, dg - 1, -1):
        c = r[k]
        if not c:
            continue
        if not monic:
            c = up.exquo_int(c, lc)
            if c is None:
                return None
        q[k - dg] = c
        for i, y in enumerate(g):
            if y:
                r[k - dg + i] = up.sub(r[k - dg + i], up.mul(c, y))
    if any(r[:dg]):
        return None
    return q


def _divide(p, d):
    if not d:
        raise ZeroDivisionError("polynomial division by zero")
    if not p:
        return ZERO
    if d.deg_z > p.deg_z or d.deg_lambda > p.deg_lambda:
        return None
    # P = (1/dp) * Fi, D = (1/dd) * c * Gi with Gi primitive in Z[lam, z]
    dp, _ = _integer_scaled(p)
    dd, _ = _integer_scaled(d)
    f, g = _to_zdense(p), _to_zdense(d)
    c = reduce(igcd, (x for r in g for x in r if x), 0)
    if g[-1][-1] < 0:
        c = -c
    g = [[x // c for x in r] for r in g]
    rows = _divide_rows(f, g)
    if rows is None:
        return None
    scale = Fraction(dd, dp * c)
    return _from_zdense(rows) * scale


def divide_exact(p, d):
    """P / D, raising ArithmeticError when D does not divide P."""
    q = _divide(p, d)
    if q is None:
        raise ArithmeticError(f"{format_poly(d)} does not divide {format_poly(p)}")
    return q


def divides(d, p):
    """True iff D divides P exactly in Q[lam, z]."""
    return _divide(p, d) is not None
