"""Leading constants: Euler factors, regularized products, predictions.

Two independent routes to predicted counts are provided:

* an exact coefficient route: the generating series over the obstruction
  group is multiplied out with exact cyclotomic coefficients, giving the
  main-term count at each height as an exact rational;
* a Tauberian route: per pole, the regularized Euler product (zeta factors
  extracted in closed form, the absolutely convergent remainder truncated
  at a cutoff with a rigorous tail bound) assembles the leading constant
  c_H(d), exact in Q(zeta)[q^(-1/w)] up to the truncated remainder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .brauer import enumerate_brauer
from .cyclo import CycloNum, QExt, e_phase
from .errors import LatticeViolation, NotInSubset, UnbalancedInput
from .groups import (FrobeniusStructure, WeightFunction, abelianization,
                     moebius_abelian, subgroup_interval, twisted_fixed_count)
from .lifting import build_lifting_data
from .series import closed_points


# -- local points at infinity ---------------------------------------------------


@dataclass(frozen=True)
class LocalPoint:
    """A point (sigma, gamma) of the local groupoid at infinity.

    sigma is the unramified twist, gamma the boundary monodromy, subject to
    sigma gamma^(1/q) sigma^-1 = gamma; stored up to simultaneous conjugation
    with the order of the simultaneous centralizer.
    """

    sigma: int
    gamma: int
    aut_order: int
    orbit_size: int


def local_points(group, frob):
    """All (sigma, gamma) classes with the compatibility for the given q."""
    pairs = []
    for sigma in range(group.order):
        for gamma in range(group.order):
            tw = group.conj(group.power(gamma, frob.r), sigma)
            if tw == gamma:
                pairs.append((sigma, gamma))
    seen = set()
    points = []
    for sigma, gamma in pairs:
        if (sigma, gamma) in seen:
            continue
        orbit = set()
        for h in range(group.order):
            orbit.add((group.conj(sigma, h), group.conj(gamma, h)))
        seen |= orbit
        aut = sum(1 for h in range(group.order)
                  if group.mul(h, sigma) == group.mul(sigma, h)
                  and group.mul(h, gamma) == group.mul(gamma, h))
        rep = min(orbit)
        points.append(LocalPoint(rep[0], rep[1], aut, len(orbit)))
    points.sort(key=lambda p: (p.sigma, p.gamma))
    total = sum(Fraction(1, p.aut_order) for p in points)
    assert total == Fraction(len(pairs), group.order)
    return points


class HeightSpec:
    """Weight function on classes plus local data at infinity.

    ``h_infinity``: "zero", "f" (weight of the boundary class, 0 when
    unramified) or a callable LocalPoint -> nonnegative int.
    ``omega``: "all" or a predicate LocalPoint -> bool.
    """

    def __init__(self, weight, h_infinity="f", omega="all"):
        self.weight = weight
        self._h = h_infinity
        self._omega = omega

    def h_inf(self, point):
        if callable(self._h):
            return int(self._h(point))
        if self._h == "zero":
            return 0
        if self._h == "f":
            if point.gamma == self.weight.frob.group.identity:
                return 0
            ct = self.weight.frob.ct
            cid = ct.class_of[point.gamma]
            return self.weight(self.weight.frob.orbit_of_class[cid])
        raise ValueError(f"unknown h_infinity mode {self._h!r}")

    def in_omega(self, point):
        if callable(self._omega):
            return bool(self._omega(point))
        if self._omega == "all":
            return True
        raise ValueError(f"unknown omega mode {self._omega!r}")


# -- weights restricted to the ramification support -----------------------------


class _SupportWeight:
    """Weight data restricted to the support orbits of one Brauer group."""

    def __init__(self, weight, support_orbits):
        self.orbits = tuple(sorted(support_orbits))
        if not self.orbits:
            raise ValueError("empty ramification support")
        self.values = {o: weight(o) for o in self.orbits}
        self.w_min = min(self.values.values())
        self.a = Fraction(1, self.w_min)
        self.minimal_orbits = tuple(o for o in self.orbits
                                    if self.values[o] == self.w_min)
        self.b = len(self.minimal_orbits)

    def __call__(self, oid):
        return self.values[oid]


# -- Euler factors and series -----------------------------------------------------


def euler_factor(bg, beta, alpha, weight, degree, support=None):
    """Exact local factor at points of the given degree, as a QExt value.

    1 + sum over support orbits C with deg(C) | degree of
    deg(C) e((degree/deg C) rho_C) e(-degree f(C) alpha) q^(-degree a f(C)).
    """
    sw = support or _SupportWeight(weight, bg.support_orbits)
    w = sw.w_min
    q = bg.frob.q
    alpha = Fraction(alpha) % 1
    out = QExt.scalar(w, q, 1)
    for oid in sw.orbits:
        deg = bg.frob.deg(oid)
        if degree % deg:
            continue
        rho = bg.residue(beta, oid)
        phase = e_phase(Fraction(degree, deg) * rho - degree * sw(oid) * alpha)
        out = out + QExt.y_power(w, q, degree * sw(oid)) * (deg * phase)
    return out


def f_series(bg, beta, weight, truncation, support=None):
    """Exact coefficients of the generating series F_beta(X) up to X^truncation.

    The Euler product over closed points of the affine line with each
    support orbit contributing X^(deg P * f(C)) with its corestricted
    residue phase.
    """
    sw = support or _SupportWeight(weight, bg.support_orbits)
    q = bg.frob.q
    series = [CycloNum.from_rational(1)] + \
        [CycloNum.from_rational(0)] * truncation
    min_f = min(sw.values.values())
    for m in range(1, truncation // min_f + 1):
        terms = []
        for oid in sw.orbits:
            deg = bg.frob.deg(oid)
            if m % deg:
                continue
            expo = m * sw(oid)
            if expo > truncation:
                continue
            rho = bg.residue(beta, oid)
            terms.append((expo, e_phase(Fraction(m, deg) * rho) * deg))
        if not terms:
            continue
        n_m = closed_points(q, m)
        factor_pow = _one_plus_pow(terms, n_m, truncation)
        series = _poly_mul_trunc(series, factor_pow, truncation)
    return series


def _one_plus_pow(terms, n, trunc):
    """(1 + u)^n truncated, u given as [(exponent, coefficient)]."""
    min_expo = min(e for e, _ in terms)
    max_k = trunc // min_expo
    u = [CycloNum.from_rational(0)] * (trunc + 1)
    for e, c in terms:
        u[e] = u[e] + c
    out = [CycloNum.from_rational(0)] * (trunc + 1)
    out[0] = CycloNum.from_rational(1)
    u_pow = [CycloNum.from_rational(1)] + [CycloNum.from_rational(0)] * trunc
    for k in range(1, max_k + 1):
        u_pow = _poly_mul_trunc(u_pow, u, trunc)
        coeff = math.comb(n, k)
        if coeff == 0:
            break
        for i, c in enumerate(u_pow):
            if not c.is_zero():
                out[i] = out[i] + c * coeff
    return out


def _poly_mul_trunc(a, b, trunc):
    out = [CycloNum.from_rational(0)] * (trunc + 1)
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b):
            if i + j > trunc:
                break
            if not y.is_zero():
                out[i + j] = out[i + j] + x * y
    return out


# -- the factor at infinity --------------------------------------------------------


def tau_infinity(bg, beta, alpha, height, points=None):
    """Exact local factor at infinity as a QExt value:
    sum over Omega of e(residue) e(-h alpha) q^(-a h) / aut."""
    sw = _SupportWeight(height.weight, bg.support_orbits)
    q = bg.frob.q
    w = sw.w_min
    alpha = Fraction(alpha) % 1
    pts = points if points is not None else local_points(bg.lifting.group, bg.frob)
    out = QExt.scalar(w, q, 0)
    for pt in pts:
        if not height.in_omega(pt):
            continue
        h = height.h_inf(pt)
        val = bg.residue_at_infinity(beta, pt.sigma, pt.gamma)
        phase = e_phase(val - h * alpha) * Fraction(1, pt.aut_order)
        out = out + QExt.y_power(w, q, h * sw.w_min) * phase
    return out


def tau_infinity_series(bg, beta, height, points=None):
    """Coefficient route: exact cyclotomic weight per infinity-height value."""
    pts = points if points is not None else local_points(bg.lifting.group, bg.frob)
    out = {}
    for pt in pts:
        if not height.in_omega(pt):
            continue
        h = height.h_inf(pt)
        val = bg.residue_at_infinity(beta, pt.sigma, pt.gamma)
        term = e_phase(val) * Fraction(1, pt.aut_order)
        out[h] = out.get(h, term * 0) + term
    return out


# -- regularized Euler products -----------------------------------------------------


def regularized_tau(bg, beta, alpha, weight, cutoff=15, support=None):
    """The regularized value of the finite-place Euler product at the pole.

    Returns (value, tail_bound): the limit of
    (1 - e(alpha) q^a X)^b F_beta(X) at X -> e(-alpha) q^(-a), computed as
    a(f)^b times closed-form zeta limits times the absolutely convergent
    remainder truncated at point degree <= cutoff.  The tail bound is a
    rigorous relative bound on the truncation error.
    """
    sw = support or _SupportWeight(weight, bg.support_orbits)
    q = bg.frob.q
    w = sw.w_min
    alpha = Fraction(alpha) % 1
    # membership: for every minimal orbit the residue matches deg * w * alpha
    pole_ks = {}
    for oid in sw.minimal_orbits:
        deg = bg.frob.deg(oid)
        rho = bg.residue(beta, oid)
        target = (deg * w * alpha) % 1
        if rho != target:
            raise NotInSubset(
                f"residue {rho} on orbit {oid} does not match {target}")
        # k with (k + rho~)/deg = w alpha mod 1, rho~ = value at Frob^deg;
        # as numbers rho~ = rho so k = deg*w*alpha - rho times deg mod deg.
        kc = None
        for k in range(1, deg + 1):
            if (Fraction(k, deg) + Fraction(rho, deg) - w * alpha) % 1 == 0:
                kc = k
                break
        assert kc is not None
        pole_ks[oid] = kc

    # closed-form zeta limits for the non-pole (C, k) pairs
    value = QExt.scalar(w, q, Fraction(1, w) ** (-sw.b))  # a(f)^b = w^-b... see below
    # a(f)^b with a = 1/w: multiply by (1/w)^b
    value = QExt.scalar(w, q, Fraction(1, w ** sw.b))
    for oid in sw.minimal_orbits:
        deg = bg.frob.deg(oid)
        rho = bg.residue(beta, oid)
        for k in range(1, deg + 1):
            if k == pole_ks[oid]:
                continue
            phase = (Fraction(k, deg) + Fraction(rho, deg) - w * alpha) % 1
            factor = (CycloNum.from_rational(1) - e_phase(phase)).inverse()
            value = value * QExt.scalar(w, q, factor)

    # absolutely convergent remainder up to the cutoff
    for m in range(1, cutoff + 1):
        n_m = closed_points(q, m)
        g_m = _g_factor(bg, beta, alpha, sw, m, pole_ks)
        g_pow = QExt.scalar(w, q, 1)
        base = g_m
        k = n_m
        while k:
            if k & 1:
                g_pow = g_pow * base
            base = base * base
            k >>= 1
        value = value * g_pow

    tail = _tail_bound(bg, sw, q, cutoff)
    return value, tail


def _g_factor(bg, beta, alpha, sw, m, pole_ks):
    """Euler factor of the absolutely convergent part at degree m."""
    q = bg.frob.q
    w = sw.w_min
    f_factor = euler_factor(bg, beta, alpha, None, m, support=sw)
    out = f_factor
    for oid in sw.minimal_orbits:
        deg = bg.frob.deg(oid)
        rho = bg.residue(beg := beta, oid)
        for k in range(1, deg + 1):
            phase = (Fraction(m, 1) * (Fraction(k, deg) + Fraction(rho, deg)
                                       - w * alpha)) % 1
            y_m = QExt.y_power(w, q, m * w) * e_phase(phase)
            out = out * (QExt.scalar(w, q, 1) - y_m)
    return out


def _tail_bound(bg, sw, q, cutoff):
    """Rigorous relative bound for the omitted factors of degree > cutoff."""
    k_min = sum(bg.frob.deg(o) for o in sw.minimal_orbits)
    rest = sum(bg.frob.deg(o) for o in sw.orbits
               if o not in sw.minimal_orbits)
    a = float(sw.a)
    kappa = min(2.0, 1.0 + a)
    cstar = (2.0 ** k_min + k_min ** 2 + k_min * 2.0 ** k_min
             + rest * (2.0 + k_min) + 1.0)
    # sum_{m > D} (q^m / m) * 2 cstar q^(-m kappa)
    #   <= (2 cstar / (D+1)) q^(-(kappa-1)(D+1)) / (1 - q^(-(kappa-1)))
    exp_rate = kappa - 1.0
    top = 2.0 * cstar * q ** (-exp_rate * (cutoff + 1))
    geom = 1.0 - q ** (-exp_rate)
    log_tail = top / ((cutoff + 1) * geom)
    return math.expm1(log_tail) * 2.0


# -- Tauberian extraction ------------------------------------------------------------


def tauberian_main_term(poles, growth, d):
    """Main term of the d-th coefficient from pole data on one circle.

    ``poles``: list of (z, order, coeff) with |z| = 1 (z as complex or exact
    CycloNum), poles at z * radius; ``growth``: the reciprocal radius (the
    exponential growth rate).  Returns the main term
    d^(b-1) growth^d / (b-1)! * sum over maximal-order poles of coeff z^(-d).
    """
    b = max(order for _, order, _ in poles)
    total = 0j
    for z, order, coeff in poles:
        if order != b:
            continue
        zc = z.complex_value() if hasattr(z, "complex_value") else complex(z)
        cc = coeff.complex_value() if hasattr(coeff, "complex_value") else complex(coeff)
        total += cc * zc ** (-d)
    return (d ** (b - 1)) * (float(growth) ** d) / math.factorial(b - 1) * total


# -- predictions -----------------------------------------------------------------------


@dataclass
class PredictionRecord:
    group: str
    q: int
    d_values: list
    exact_counts: dict          # d -> Fraction (coefficient route)
    c_h: dict                   # d -> QExt (Tauberian constant, cutoff-exact)
    c_h_float: dict             # d -> float
    main_terms: dict            # d -> float
    period: int
    b: int
    a: Fraction
    tail_bound: float
    terms: list                 # per (alpha, beta) Euler product values

    def to_json(self):
        return {
            "group": self.group,
            "q": self.q,
            "d": list(self.d_values),
            "exact_counts": {str(d): [str(v.numerator), str(v.denominator)]
                             for d, v in self.exact_counts.items()},
            "c_H_float": {str(d): v for d, v in self.c_h_float.items()},
            "main_terms": {str(d): v for d, v in self.main_terms.items()},
            "period": self.period,
            "b": self.b,
            "a": str(self.a),
            "tail_bound": self.tail_bound,
            "terms": self.terms,
        }


def _alpha_range(w, group_order):
    """All characters alpha with the mask-support bound: order divides
    w * |G|^2."""
    modulus = w * group_order ** 2
    return [Fraction(j, modulus) for j in range(modulus)], modulus


def predict(group, q, height, d_values, support=None, cutoff=15,
            lifting=None, frob=None, bg=None, check_balanced=True):
    """Predicted main-term counts for the balanced case.

    Returns a PredictionRecord with the exact coefficient-route counts and
    the Tauberian constants; raises UnbalancedInput when the minimal classes
    fail to generate the group.
    """
    frob = frob or height.weight.frob
    assert frob.q == q
    if support is None:
        support = [g for g in range(group.order) if g != group.identity]
    if lifting is None:
        lifting = build_lifting_data(group, support, frob=frob)
    if bg is None:
        bg = enumerate_brauer(lifting, frob)
    sw = _SupportWeight(height.weight, bg.support_orbits)

    if check_balanced:
        min_elements = []
        for oid in sw.minimal_orbits:
            for cid in frob.class_orbits[oid]:
                min_elements.extend(frob.ct.classes[cid])
        if not group.generates(min_elements):
            raise UnbalancedInput("minimal classes do not generate the group")

    return _predict_core(group, q, height, d_values, [(1, sw.orbits)],
                         bg, sw, cutoff)


def _predict_core(group, q, height, d_values, weighted_supports, bg, sw, cutoff):
    """Shared assembly: weighted sum of per-support Euler data.

    ``weighted_supports``: list of (integer weight, orbit tuple); the
    balanced case passes [(1, all support orbits)], the unbalanced case one
    entry per intermediate subgroup with its Moebius weight.
    """
    frob = bg.frob
    w = sw.w_min
    points = local_points(group, frob)
    ab = abelianization(group)
    z_order = len(group.center())
    gab_fixed = twisted_fixed_count(ab.factors, q)
    pref_exact = Fraction(z_order, gab_fixed)
    pref_const = Fraction(z_order, gab_fixed * math.factorial(sw.b - 1)) \
        * sw.a ** sw.b

    max_d = max(d_values)
    # coefficient route
    exact_counts = {d: Fraction(0) for d in d_values}
    acc = {d: CycloNum.from_rational(0) for d in d_values}
    for mu, orbits in weighted_supports:
        sub_sw = _SupportWeight(height.weight, orbits)
        for beta in bg.elements:
            series = f_series(bg, beta, None, max_d, support=sub_sw)
            inf = tau_infinity_series(bg, beta, height, points)
            for d in d_values:
                tot = CycloNum.from_rational(0)
                for h, coeff in inf.items():
                    if 0 <= d - h <= max_d:
                        tot = tot + coeff * series[d - h]
                acc[d] = acc[d] + tot * mu
    for d in d_values:
        val = acc[d] * pref_exact
        assert val.is_rational(), "coefficient route did not land in Q"
        exact_counts[d] = val.rational_value()

    # Tauberian route
    alphas, modulus = _alpha_range(w, group.order)
    terms = []
    s_alpha = {}
    tail = 0.0
    for alpha in alphas:
        total = QExt.scalar(w, q, 0)
        nonzero = False
        for mu, orbits in weighted_supports:
            sub_sw = _SupportWeight(height.weight, orbits)
            if sub_sw.minimal_orbits != sw.minimal_orbits:
                # poles of maximal order only come from the full minimal locus
                continue
            mask = bg.subset_mask_orbits(sub_sw, alpha)
            for flag, beta in zip(mask, bg.elements):
                if not flag:
                    continue
                reg, tb = regularized_tau(bg, beta, alpha, None,
                                          cutoff=cutoff, support=sub_sw)
                inf = tau_infinity(bg, beta, alpha, height, points)
                term = inf * reg
                total = total + term * mu
                tail = max(tail, tb)
                nonzero = True
                terms.append({
                    "alpha": str(alpha),
                    "beta": list(beta.coords),
                    "mu": mu,
                    "value": complex(term.complex_value()).real,
                })
        if nonzero and not total.is_zero():
            s_alpha[alpha] = total

    c_h = {}
    c_h_float = {}
    main_terms = {}
    for d in d_values:
        tot = QExt.scalar(w, q, 0)
        for alpha, s in s_alpha.items():
            tot = tot + s * e_phase(d * alpha)
        tot = tot * pref_const
        c_h[d] = tot
        c_h_float[d] = complex(tot.complex_value()).real
        main_terms[d] = c_h_float[d] * d ** (sw.b - 1) * float(q) ** (float(sw.a) * d)

    period = _exact_period(s_alpha, modulus)
    return PredictionRecord(
        group=group.name, q=q, d_values=list(d_values),
        exact_counts=exact_counts, c_h=c_h, c_h_float=c_h_float,
        main_terms=main_terms, period=period, b=sw.b, a=sw.a,
        tail_bound=tail, terms=terms)


def _exact_period(s_alpha, modulus):
    """Smallest T dividing the modulus with e((d+T) alpha) = e(d alpha) on
    every contributing alpha."""
    orders = [ (Fraction(a) % 1).denominator for a in s_alpha ]
    if not orders:
        return 1
    period = 1
    for o in orders:
        period = period * o // math.gcd(period, o)
    return period


def predict_unbalanced(group, m_subgroup, q, height, d_values, support=None,
                       cutoff=15, lifting=None, frob=None, bg=None):
    """Moebius-weighted prediction when the minimal classes generate M < G.

    Requires M normal with abelian quotient and M Z(G) = G; the result is
    the lattice sum over M <= L <= G of mu(G/L) times the L-restricted
    Euler data.
    """
    frob = frob or height.weight.frob
    if support is None:
        support = [g for g in range(group.order) if g != group.identity]
    if lifting is None:
        lifting = build_lifting_data(group, support, frob=frob)
    if bg is None:
        bg = enumerate_brauer(lifting, frob)
    sw = _SupportWeight(height.weight, bg.support_orbits)

    m_set = set(m_subgroup)
    # minimal classes must generate M
    min_elements = []
    for oid in sw.minimal_orbits:
        for cid in frob.class_orbits[oid]:
            min_elements.extend(frob.ct.classes[cid])
    gen = group.generated_subgroup(min_elements)
    if gen != m_set:
        raise LatticeViolation("minimal classes do not generate M")
    center = set(group.center())
    prod = {group.mul(a, b) for a in m_set for b in center}
    if prod != set(range(group.order)):
        raise LatticeViolation("M Z(G) != G")

    interval = subgroup_interval(group, sorted(m_set))
    weighted = []
    for elements, quotient_factors in interval:
        l_set = set(elements)
        orbits = tuple(o for o in sw.orbits
                       if all(x in l_set
                              for cid in frob.class_orbits[o]
                              for x in frob.ct.classes[cid]))
        weighted.append((moebius_abelian(quotient_factors), orbits))

    return _predict_core(group, q, height, d_values, weighted, bg, sw, cutoff)
