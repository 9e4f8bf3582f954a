"""Closed points, zeta functions and exact configuration-space counts.

The generating-series route (:func:`conf_count`) extracts a coefficient of
the Euler product over closed points of the affine line; the brute-force
route (:func:`brute_conf`) enumerates colored divisors directly over an
explicit finite field.  Both are exact and are cross-checked in the
acceptance suite.
"""

from __future__ import annotations

from functools import lru_cache

from .errors import BudgetExceeded


# -- closed points -------------------------------------------------------------


def _moebius_int(n):
    out, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            out = -out
        p += 1
    if m > 1:
        out = -out
    return out


def closed_points(q, n):
    """Number of degree-n closed points of the affine line over F_q."""
    if n < 1:
        raise ValueError("degree must be positive")
    total = sum(_moebius_int(d) * q ** (n // d) for d in range(1, n + 1) if n % d == 0)
    assert total % n == 0
    return total // n


# -- small finite fields -------------------------------------------------------


class SmallField:
    """GF(q) for small prime powers, with dense add/mul tables.

    Elements are integers 0..q-1; for q = p^k the integer is the base-p
    encoding of the coefficient vector of the residue polynomial.
    """

    def __init__(self, q):
        p = _smallest_prime_factor(q)
        k = 0
        m = q
        while m > 1:
            if m % p:
                raise ValueError(f"{q} is not a prime power")
            m //= p
            k += 1
        self.q = q
        self.p = p
        self.k = k
        if k == 1:
            self.add_table = [[(a + b) % p for b in range(p)] for a in range(p)]
            self.mul_table = [[(a * b) % p for b in range(p)] for a in range(p)]
        else:
            modulus = self._find_irreducible_ground(p, k)
            self.add_table, self.mul_table = self._build_ext_tables(p, k, modulus)
        self.neg_table = [next(b for b in range(q) if self.add_table[a][b] == 0)
                          for a in range(q)]

    @staticmethod
    def _find_irreducible_ground(p, k):
        # monic degree-k polynomial over F_p, coefficients little-endian
        def is_irreducible(coeffs):
            # no roots and not divisible by lower-degree monics (trial division)
            for poly in _all_monic_mod_p(p, 1, k // 2):
                if _polydiv_mod_p(coeffs, poly, p) is not None:
                    return False
            return True

        for enc in range(p ** k):
            coeffs = _decode_base(enc, p, k) + [1]
            if is_irreducible(coeffs):
                return coeffs
        raise RuntimeError("no irreducible polynomial found")

    @staticmethod
    def _build_ext_tables(p, k, modulus):
        q = p ** k

        def add(a, b):
            va, vb = _decode_base(a, p, k), _decode_base(b, p, k)
            return _encode_base([(x + y) % p for x, y in zip(va, vb)], p)

        def mul(a, b):
            va, vb = _decode_base(a, p, k), _decode_base(b, p, k)
            prod = [0] * (2 * k - 1)
            for i, x in enumerate(va):
                for j, y in enumerate(vb):
                    prod[i + j] = (prod[i + j] + x * y) % p
            # reduce modulo the defining polynomial
            for i in range(len(prod) - 1, k - 1, -1):
                c = prod[i]
                if c:
                    prod[i] = 0
                    for j in range(k):
                        prod[i - k + j] = (prod[i - k + j] - c * modulus[j]) % p
            return _encode_base(prod[:k], p)

        return ([[add(a, b) for b in range(q)] for a in range(q)],
                [[mul(a, b) for b in range(q)] for a in range(q)])

    def add(self, a, b):
        return self.add_table[a][b]

    def mul(self, a, b):
        return self.mul_table[a][b]

    def neg(self, a):
        return self.neg_table[a]

    def pow(self, a, n):
        out = 1
        for _ in range(n):
            out = self.mul_table[out][a]
        return out

    def unit_class_index(self, a, ell):
        """Index of a in F_q^x / (F_q^x)^ell as a discrete log residue."""
        gen = self.multiplicative_generator()
        x, k = 1, 0
        while x != a:
            x = self.mul_table[x][gen]
            k += 1
            if k > self.q:
                raise ValueError("not a unit")
        return k % ell

    @lru_cache(maxsize=None)
    def multiplicative_generator(self):
        for g in range(1, self.q):
            x, k = g, 1
            while x != 1:
                x = self.mul_table[x][g]
                k += 1
            if k == self.q - 1:
                return g
        raise RuntimeError("no generator")


def _decode_base(enc, p, k):
    out = []
    for _ in range(k):
        out.append(enc % p)
        enc //= p
    return out


def _encode_base(coeffs, p):
    out = 0
    for c in reversed(coeffs):
        out = out * p + c
    return out


def _smallest_prime_factor(n):
    d = 2
    while d * d <= n:
        if n % d == 0:
            return d
        d += 1
    return n


def _all_monic_mod_p(p, dmin, dmax):
    for deg in range(dmin, dmax + 1):
        for enc in range(p ** deg):
            yield _decode_base(enc, p, deg) + [1]


def _polydiv_mod_p(num, den, p):
    """Return quotient if den divides num exactly over F_p, else None."""
    num = list(num)
    if len(num) < len(den):
        return None
    inv_lead = pow(den[-1], -1, p)
    quo = [0] * (len(num) - len(den) + 1)
    for i in range(len(quo) - 1, -1, -1):
        c = (num[i + len(den) - 1] * inv_lead) % p
        quo[i] = c
        if c:
            for j, dc in enumerate(den):
                num[i + j] = (num[i + j] - c * dc) % p
    if any(num[:len(den) - 1]):
        return None
    return quo


# -- polynomials over SmallField -----------------------------------------------


class PolyRing:
    """Monic polynomial utilities over a SmallField, coefficients little-endian."""

    def __init__(self, field):
        self.F = field

    def mul(self, a, b):
        F = self.F
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        out[i + j] = F.add(out[i + j], F.mul(x, y))
        return out

    def divides(self, den, num):
        F = self.F
        num = list(num)
        if len(num) < len(den):
            return False
        inv = 1
        x = den[-1]
        while F.mul(inv, x) != 1:
            inv += 1
        for i in range(len(num) - len(den), -1, -1):
            c = F.mul(num[i + len(den) - 1], inv)
            if c:
                for j, dc in enumerate(den):
                    num[i + j] = F.add(num[i + j], F.neg(F.mul(c, dc)))
        return not any(num[:len(den) - 1])

    def all_monic(self, degree):
        F = self.F
        q = F.q
        for enc in range(q ** degree):
            coeffs = []
            e = enc
            for _ in range(degree):
                coeffs.append(e % q)
                e //= q
            yield coeffs + [1]

    @lru_cache(maxsize=None)
    def monic_irreducibles(self, max_degree):
        """Lists of monic irreducibles per degree 1..max_degree."""
        out = {d: [] for d in range(1, max_degree + 1)}
        for d in range(1, max_degree + 1):
            for poly in self.all_monic(d):
                irreducible = True
                for dd in range(1, d // 2 + 1):
                    for lower in out[dd]:
                        if self.divides(lower, poly):
                            irreducible = False
                            break
                    if not irreducible:
                        break
                if irreducible:
                    out[d].append(tuple(poly))
        for d in range(1, max_degree + 1):
            assert len(out[d]) == closed_points(self.F.q, d), \
                f"irreducible count mismatch at q={self.F.q}, degree {d}"
        return out


@lru_cache(maxsize=None)
def field(q):
    return SmallField(q)


@lru_cache(maxsize=None)
def poly_ring(q):
    return PolyRing(field(q))


# -- configuration-space counts ------------------------------------------------


class ColorSpec:
    """Colors with orbit degrees; a degree-d color is placeable on points
    whose degree it divides, with multiplicity equal to the degree."""

    def __init__(self, degrees):
        self.degrees = tuple(int(d) for d in degrees)
        if any(d < 1 for d in self.degrees):
            raise ValueError("color degrees must be positive")

    def __len__(self):
        return len(self.degrees)


def conf_count(q, colors, nbar, budget=10 ** 8):
    """Exact number of F_q-points of the colored configuration space.

    ``nbar[i]`` points of color i, counted with multiplicity
    [F_q(P):F_q(color)].  Extracted as the coefficient of
    prod T_i^(deg_i * n_i) in the Euler product over closed points.
    """
    if isinstance(colors, ColorSpec):
        degrees = colors.degrees
    else:
        degrees = tuple(colors)
    nbar = tuple(int(n) for n in nbar)
    if len(nbar) != len(degrees):
        raise ValueError("nbar and colors have different lengths")
    if any(n < 0 for n in nbar):
        raise ValueError("negative multidegree")
    targets = tuple(d * n for d, n in zip(degrees, nbar))
    total = sum(targets)
    if total == 0:
        return 1
    if q ** total > budget * 100:
        raise BudgetExceeded("conf_count truncation too large",
                             attempted=q ** total, budget=budget * 100)

    # multivariate truncated series: dict exponent-tuple -> int
    series = {tuple(0 for _ in degrees): 1}
    max_deg = max(t for t in targets if t) if any(targets) else 0
    for m in range(1, max_deg + 1):
        n_m = closed_points(q, m)
        base = {tuple(0 for _ in degrees): 1}
        for i, d in enumerate(degrees):
            if m % d == 0 and targets[i] >= m:
                expo = tuple(m if j == i else 0 for j in range(len(degrees)))
                base[expo] = d
        if len(base) == 1:
            continue
        factor_pow = _mv_pow(base, n_m, targets)
        series = _mv_mul(series, factor_pow, targets)
    return series.get(targets, 0)


def _mv_mul(a, b, targets):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            if any(x > t for x, t in zip(e, targets)):
                continue
            out[e] = out.get(e, 0) + ca * cb
    return out


def _mv_pow(base, n, targets):
    result = {tuple(0 for _ in targets): 1}
    b = dict(base)
    while n:
        if n & 1:
            result = _mv_mul(result, b, targets)
        n >>= 1
        if n:
            b = _mv_mul(b, b, targets)
    return result


def brute_conf(q, colors, nbar, budget=10 ** 8):
    """Direct enumeration oracle for conf_count.

    Walks over all sets of distinct closed points (monic irreducibles) with
    color assignments, weighting each colored point by the number of maps
    to its color (= the color's degree).
    """
    if isinstance(colors, ColorSpec):
        degrees = colors.degrees
    else:
        degrees = tuple(colors)
    nbar = tuple(int(n) for n in nbar)
    targets = tuple(d * n for d, n in zip(degrees, nbar))
    total = sum(targets)
    if total == 0:
        return 1
    if q ** total > budget:
        raise BudgetExceeded("brute_conf enumeration too large",
                             attempted=q ** total, budget=budget)
    ring = poly_ring(q)
    max_deg = max(t for t in targets if t)
    irr = ring.monic_irreducibles(max_deg)
    points = []
    for d in range(1, max_deg + 1):
        points.extend((d, i) for i in range(len(irr[d])))

    n_colors = len(degrees)

    def rec(idx, remaining):
        if all(r == 0 for r in remaining):
            return 1
        if idx >= len(points):
            return 0
        need = sum(remaining)
        avail = sum(points[j][0] for j in range(idx, len(points)))
        if avail < need:
            return 0
        deg_p = points[idx][0]
        total_here = rec(idx + 1, remaining)  # skip this point
        for i in range(n_colors):
            if deg_p % degrees[i] == 0 and remaining[i] >= deg_p:
                rem2 = list(remaining)
                rem2[i] -= deg_p
                total_here += degrees[i] * rec(idx + 1, tuple(rem2))
        return total_here

    return rec(0, targets)


def conf_bound_check(q, colors, nbar):
    """Verify #Conf <= q^{|nbar|}; returns (count, bound, ok)."""
    count = conf_count(q, colors, nbar)
    if isinstance(colors, ColorSpec):
        degrees = colors.degrees
    else:
        degrees = tuple(colors)
    # |nbar| counts geometric points: n_c per geometric class, i.e.
    # deg(c) * n_c over orbits.
    size = sum(d * n for d, n in zip(degrees, nbar))
    bound = q ** size
    return count, bound, count <= bound


def zeta_A1(q, order):
    """Truncated Euler product for the zeta function of the affine line.

    Returns (coefficients, closed_form_coefficients); the closed form is
    the geometric series of 1/(1 - qX).
    """
    series = [1] + [0] * order
    for m in range(1, order + 1):
        n_m = closed_points(q, m)
        # multiply by (1 - X^m)^(-n_m), truncated
        factor = [0] * (order + 1)
        factor[0] = 1
        # (1 - X^m)^(-n) = sum_k C(n+k-1, k) X^(mk)
        k = 0
        from math import comb
        while m * k <= order:
            factor[m * k] = comb(n_m + k - 1, k)
            k += 1
        new = [0] * (order + 1)
        for i, a in enumerate(series):
            if a:
                for j in range(0, order + 1 - i, 1):
                    if factor[j]:
                        new[i + j] += a * factor[j]
        series = new
    closed = [q ** i for i in range(order + 1)]
    return series, closed


def zeta_A1_partial(q, max_degree, order):
    """Euler product truncated at point degree <= max_degree."""
    series = [1] + [0] * order
    from math import comb
    for m in range(1, max_degree + 1):
        n_m = closed_points(q, m)
        factor = [0] * (order + 1)
        k = 0
        while m * k <= order:
            factor[m * k] = comb(n_m + k - 1, k)
            k += 1
        new = [0] * (order + 1)
        for i, a in enumerate(series):
            if a:
                for j in range(order + 1 - i):
                    if factor[j]:
                        new[i + j] += a * factor[j]
        series = new
    return series
