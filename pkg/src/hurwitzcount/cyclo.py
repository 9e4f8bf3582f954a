"""Exact arithmetic in cyclotomic fields and small radical extensions.

Phases e(a/b) are represented exactly as powers of a primitive b-th root
of unity; numbers live in Q(zeta_m) as polynomials reduced modulo the
m-th cyclotomic polynomial with Fraction coefficients.  Mixed moduli are
promoted to the lcm on demand.  :class:`QExt` adjoins a real root
Y = q^(-1/w) for the fractional q-powers that appear in regularized
Euler products when the minimal weight exceeds 1.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from functools import lru_cache
from math import gcd


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m):
    """Integer coefficient tuple (low to high) of the m-th cyclotomic polynomial."""
    if m == 1:
        return (-1, 1)
    # x^m - 1 divided by the product of lower cyclotomics
    poly = [Fraction(0)] * (m + 1)
    poly[0] = Fraction(-1)
    poly[m] = Fraction(1)
    for d in range(1, m):
        if m % d == 0:
            poly = _poly_divide_exact(poly, [Fraction(c) for c in cyclotomic_polynomial(d)])
    out = []
    for c in poly:
        assert c.denominator == 1
        out.append(int(c))
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def _poly_divide_exact(num, den):
    num = list(num)
    out = [Fraction(0)] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] / den[-1]
        out[i] = c
        if c:
            for j, dc in enumerate(den):
                num[i + j] -= c * dc
    assert all(x == 0 for x in num[:len(den) - 1]) and all(x == 0 for x in num[len(den) - 1:])
    return out


@lru_cache(maxsize=None)
def _phi(m):
    return len(cyclotomic_polynomial(m)) - 1


def _reduce_mod_cyclotomic(coeffs, m):
    """Reduce a coefficient list modulo Phi_m, using zeta^m = 1 first."""
    phi = cyclotomic_polynomial(m)
    deg = len(phi) - 1
    folded = [Fraction(0)] * m
    for i, c in enumerate(coeffs):
        if c:
            folded[i % m] += c
    # now reduce degree below deg via Phi_m
    work = folded
    for i in range(len(work) - 1, deg - 1, -1):
        c = work[i]
        if c:
            work[i] = Fraction(0)
            for j in range(deg):
                work[i - deg + j] -= c * phi[j]
    return tuple(work[:deg])


class CycloNum:
    """An element of Q(zeta_m)."""

    __slots__ = ("m", "coeffs")

    def __init__(self, m, coeffs, reduce=True):
        self.m = m
        if reduce:
            self.coeffs = _reduce_mod_cyclotomic(list(coeffs), m)
        else:
            self.coeffs = tuple(coeffs)

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def from_rational(x, m=1):
        x = Fraction(x)
        deg = _phi(m)
        return CycloNum(m, (x,) + (Fraction(0),) * (deg - 1), reduce=False)

    @staticmethod
    def root_of_unity(frac):
        """e(frac) for an exact rational frac, as a root of unity."""
        fr = Fraction(frac) % 1
        if fr == 0:
            return CycloNum.from_rational(1)
        b = fr.denominator
        a = fr.numerator
        coeffs = [Fraction(0)] * (a + 1)
        coeffs[a] = Fraction(1)
        return CycloNum(b, coeffs)

    # -- promotion ------------------------------------------------------------

    def promote(self, m_new):
        if m_new == self.m:
            return self
        assert m_new % self.m == 0
        k = m_new // self.m
        coeffs = [Fraction(0)] * ((len(self.coeffs) - 1) * k + 1 or 1)
        for i, c in enumerate(self.coeffs):
            if c:
                coeffs[i * k] += c
        return CycloNum(m_new, coeffs)

    @staticmethod
    def _common(a, b):
        if not isinstance(a, CycloNum):
            a = CycloNum.from_rational(a)
        if not isinstance(b, CycloNum):
            b = CycloNum.from_rational(b)
        m = a.m * b.m // gcd(a.m, b.m)
        return a.promote(m), b.promote(m)

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        a, b = CycloNum._common(self, other)
        return CycloNum(a.m, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)), reduce=False)

    __radd__ = __add__

    def __neg__(self):
        return CycloNum(self.m, tuple(-x for x in self.coeffs), reduce=False)

    def __sub__(self, other):
        a, b = CycloNum._common(self, other)
        return CycloNum(a.m, tuple(x - y for x, y in zip(a.coeffs, b.coeffs)), reduce=False)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CycloNum(self.m, tuple(c * other for c in self.coeffs), reduce=False)
        a, b = CycloNum._common(self, other)
        out = [Fraction(0)] * (2 * len(a.coeffs))
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        out[i + j] += x * y
        return CycloNum(a.m, out)

    __rmul__ = __mul__

    def inverse(self):
        """Multiplicative inverse via extended gcd with Phi_m."""
        phi = [Fraction(c) for c in cyclotomic_polynomial(self.m)]
        a = list(self.coeffs)
        g, s = _poly_ext_gcd(a, phi)
        if len(g) != 1 or g[0] == 0:
            raise ZeroDivisionError("element is zero or not invertible")
        inv = [c / g[0] for c in s]
        return CycloNum(self.m, inv)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * Fraction(1, 1) * Fraction(Fraction(other).denominator,
                                                    Fraction(other).numerator)
        a, b = CycloNum._common(self, other)
        return a * b.inverse()

    def __rtruediv__(self, other):
        return CycloNum.from_rational(other) / self

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = CycloNum.from_rational(1, self.m)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- predicates and conversion --------------------------------------------

    def __eq__(self, other):
        a, b = CycloNum._common(self, other)
        return a.coeffs == b.coeffs

    def __hash__(self):
        if self.is_rational():
            return hash(self.rational_value())
        return hash((self.m, self.coeffs))

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def is_rational(self):
        return all(c == 0 for c in self.coeffs[1:])

    def rational_value(self):
        if not self.is_rational():
            raise ValueError(f"not rational: {self}")
        return self.coeffs[0]

    def complex_value(self):
        z = cmath.exp(2j * cmath.pi / self.m)
        out = 0j
        for i, c in enumerate(self.coeffs):
            if c:
                out += float(c) * z ** i
        return out

    def __repr__(self):
        if self.is_rational():
            return f"CycloNum({self.coeffs[0]})"
        terms = [f"{c}*z{self.m}^{i}" for i, c in enumerate(self.coeffs) if c]
        return "CycloNum(" + " + ".join(terms) + ")"


def _poly_ext_gcd(a, b):
    """Return (g, s) with s*a = g mod b, g the gcd (over Q)."""
    r0, r1 = list(a), list(b)
    s0, s1 = [Fraction(1)], [Fraction(0)]

    def trim(p):
        while p and p[-1] == 0:
            p.pop()
        return p

    r0, r1 = trim(r0), trim(r1)
    while r1:
        q, r = _poly_divmod(r0, r1)
        s_new = _poly_sub(s0, _poly_mul(q, s1))
        r0, s0 = r1, s1
        r1, s1 = trim(r), trim(s_new)
    return r0, s0


def _poly_divmod(num, den):
    num = list(num)
    if len(num) < len(den):
        return [], num
    out = [Fraction(0)] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] / den[-1]
        out[i] = c
        if c:
            for j, dc in enumerate(den):
                num[i + j] -= c * dc
    return out, num[:len(den) - 1]


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1 if a and b else 0)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_sub(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]


def e_phase(frac):
    """Exact e(frac) = exp(2 pi i frac) for rational frac."""
    return CycloNum.root_of_unity(frac)


ZERO = CycloNum.from_rational(0)
ONE = CycloNum.from_rational(1)


class QExt:
    """Elements of Q(zeta)[Y]/(Y^w - 1/q), i.e. polynomials in Y = q^(-1/w).

    Coefficients are :class:`CycloNum`.  For w = 1 this degenerates to plain
    cyclotomic numbers with Y = 1/q folded in.
    """

    __slots__ = ("w", "q", "coeffs")

    def __init__(self, w, q, coeffs):
        self.w = w
        self.q = q
        cs = list(coeffs)
        # fold Y^w = 1/q
        while len(cs) > w:
            extra = cs[w:]
            cs = cs[:w]
            for i, c in enumerate(extra):
                j = w + i
                cs[j % w] = cs[j % w] + c * Fraction(1, q) ** (j // w)
        while len(cs) < w:
            cs.append(ZERO)
        self.coeffs = tuple(c if isinstance(c, CycloNum) else CycloNum.from_rational(c)
                            for c in cs)

    @staticmethod
    def scalar(w, q, value):
        return QExt(w, q, [value if isinstance(value, CycloNum)
                           else CycloNum.from_rational(value)])

    @staticmethod
    def y_power(w, q, k):
        """Y^k = q^(-k/w) as an element."""
        quo, rem = divmod(k, w)
        coeffs = [ZERO] * (rem + 1)
        coeffs[rem] = CycloNum.from_rational(Fraction(1, q) ** quo)
        return QExt(w, q, coeffs)

    def _check(self, other):
        assert self.w == other.w and self.q == other.q

    def __add__(self, other):
        if not isinstance(other, QExt):
            other = QExt.scalar(self.w, self.q, other)
        self._check(other)
        return QExt(self.w, self.q,
                    [a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return QExt(self.w, self.q, [-c for c in self.coeffs])

    def __sub__(self, other):
        if not isinstance(other, QExt):
            other = QExt.scalar(self.w, self.q, other)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, QExt):
            return QExt(self.w, self.q, [c * other for c in self.coeffs])
        self._check(other)
        out = [ZERO] * (2 * self.w)
        for i, a in enumerate(self.coeffs):
            if not a.is_zero():
                for j, b in enumerate(other.coeffs):
                    if not b.is_zero():
                        out[i + j] = out[i + j] + a * b
        return QExt(self.w, self.q, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, QExt):
            other = QExt.scalar(self.w, self.q, other)
        return all((a - b).is_zero() for a, b in zip(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((self.w, self.q, self.coeffs))

    def is_zero(self):
        return all(c.is_zero() for c in self.coeffs)

    def complex_value(self):
        y = float(self.q) ** (-1.0 / self.w)
        return sum(c.complex_value() * y ** i for i, c in enumerate(self.coeffs))

    def rational_value(self):
        if any(not c.is_zero() for c in self.coeffs[1:]):
            raise ValueError("has irrational q-power part")
        return self.coeffs[0].rational_value()

    def __repr__(self):
        return f"QExt(w={self.w}, q={self.q}, {list(self.coeffs)})"
