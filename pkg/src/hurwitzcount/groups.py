"""Finite group arithmetic: tables, conjugacy data, Frobenius twists, lattices.

Elements are dense 0-based integers; the identity need not be index 0 but
is recorded explicitly.  Groups are normalized to multiplication tables so
every downstream kernel gets O(1) multiplication.
"""

from __future__ import annotations

import json
from math import gcd

from .errors import NonCoprimeOrder, NotNormal, QuotientNotAbelian
from .snf import invariant_factors, smith_normal_form, vec_mat


class FiniteGroup:
    """Multiplication-table group with cached conjugacy machinery."""

    def __init__(self, table, name="G", validate=True):
        self.name = name
        self.order = len(table)
        self.table = [list(row) for row in table]
        self.identity = self._find_identity()
        self.inv = self._build_inverses()
        if validate:
            self._validate()
        self._classes = None
        self._element_orders = None

    # -- construction helpers -------------------------------------------------

    def _find_identity(self):
        n = self.order
        for e in range(n):
            if all(self.table[e][g] == g and self.table[g][e] == g for g in range(n)):
                return e
        raise ValueError("table has no identity element")

    def _build_inverses(self):
        n = self.order
        inv = [None] * n
        for g in range(n):
            for h in range(n):
                if self.table[g][h] == self.identity and self.table[h][g] == self.identity:
                    inv[g] = h
                    break
            if inv[g] is None:
                raise ValueError(f"element {g} has no inverse")
        return inv

    def _validate(self):
        n = self.order
        for row in self.table:
            if len(row) != n or any(not (0 <= x < n) for x in row):
                raise ValueError("multiplication table is not square over 0..n-1")
        if n <= 256:
            t = self.table
            for a in range(n):
                ta = t[a]
                for b in range(n):
                    tab = t[ta[b]]
                    tb = t[b]
                    for c in range(n):
                        if tab[c] != ta[tb[c]]:
                            raise ValueError(f"associativity fails at ({a},{b},{c})")

    # -- basic arithmetic ------------------------------------------------------

    def mul(self, a, b):
        return self.table[a][b]

    def conj(self, a, h):
        """h a h^-1."""
        return self.table[self.table[h][a]][self.inv[h]]

    def power(self, a, k):
        if k < 0:
            return self.power(self.inv[a], -k)
        result = self.identity
        base = a
        while k:
            if k & 1:
                result = self.table[result][base]
            base = self.table[base][base]
            k >>= 1
        return result

    def product(self, elements):
        out = self.identity
        for g in elements:
            out = self.table[out][g]
        return out

    def element_order(self, a):
        if self._element_orders is None:
            self._element_orders = [None] * self.order
        if self._element_orders[a] is None:
            x, k = a, 1
            while x != self.identity:
                x = self.table[x][a]
                k += 1
            self._element_orders[a] = k
        return self._element_orders[a]

    def exponent(self):
        e = 1
        for g in range(self.order):
            o = self.element_order(g)
            e = e * o // gcd(e, o)
        return e

    def is_abelian(self):
        t = self.table
        return all(t[a][b] == t[b][a] for a in range(self.order) for b in range(a))

    def center(self):
        t = self.table
        return [g for g in range(self.order)
                if all(t[g][h] == t[h][g] for h in range(self.order))]

    def generated_subgroup(self, gens):
        seen = {self.identity}
        frontier = [self.identity]
        gens = list(gens)
        while frontier:
            new = []
            for x in frontier:
                for g in gens:
                    y = self.table[x][g]
                    if y not in seen:
                        seen.add(y)
                        new.append(y)
            frontier = new
        return seen

    def generates(self, subset):
        return len(self.generated_subgroup(subset)) == self.order

    # -- conjugacy -------------------------------------------------------------

    def conjugacy_table(self):
        if self._classes is None:
            self._classes = conjugacy_classes(self)
        return self._classes


class ConjugacyTable:
    """Conjugacy classes with stable labels (sorted by minimal element)."""

    def __init__(self, group):
        n = group.order
        class_of = [None] * n
        classes = []
        for g in range(n):
            if class_of[g] is not None:
                continue
            cls = sorted({group.conj(g, h) for h in range(n)})
            idx = len(classes)
            classes.append(cls)
            for x in cls:
                class_of[x] = idx
        # relabel so classes are ordered by minimal element
        order = sorted(range(len(classes)), key=lambda i: classes[i][0])
        relabel = {old: new for new, old in enumerate(order)}
        self.classes = [classes[i] for i in order]
        self.class_of = [relabel[c] for c in class_of]
        self.centralizer_order = [group.order // len(c) for c in self.classes]
        self.group = group

    def __len__(self):
        return len(self.classes)

    def nontrivial_class_ids(self):
        return [i for i, c in enumerate(self.classes) if c != [self.group.identity]]


def conjugacy_classes(group):
    return ConjugacyTable(group)


class FrobeniusStructure:
    """The q-twist data: g -> sigma g^(1/q) sigma^-1, class orbits, degrees."""

    def __init__(self, group, q, twist=None):
        if gcd(q, group.order) != 1:
            raise NonCoprimeOrder(f"q={q} shares a factor with |G|={group.order}")
        self.group = group
        self.q = q
        self.twist = group.identity if twist is None else twist
        e = group.exponent()
        self.exponent = e
        self.r = pow(q, -1, e)
        self.ct = group.conjugacy_table()
        self._action = [group.conj(group.power(g, self.r), self.twist)
                        for g in range(group.order)]
        self.class_perm = self._induced_class_perm()
        self.class_orbits, self.orbit_of_class = self._orbits()

    def action(self, g):
        return self._action[g]

    def action_inverse(self, g):
        # inverse of g -> sigma g^r sigma^-1 is g -> (sigma^-1 g sigma)^q'
        rq = pow(self.r, -1, self.exponent)
        return self.group.power(self.group.conj(g, self.group.inv[self.twist]), rq)

    def _induced_class_perm(self):
        perm = {}
        for cid, cls in enumerate(self.ct.classes):
            perm[cid] = self.ct.class_of[self._action[cls[0]]]
        return perm

    def _orbits(self):
        nontrivial = self.ct.nontrivial_class_ids()
        seen = set()
        orbits = []
        for cid in nontrivial:
            if cid in seen:
                continue
            orbit = [cid]
            seen.add(cid)
            x = self.class_perm[cid]
            while x not in seen:
                orbit.append(x)
                seen.add(x)
                x = self.class_perm[x]
            orbits.append(tuple(sorted(orbit)))
        orbits.sort()
        orbit_of = {}
        for oid, orb in enumerate(orbits):
            for cid in orb:
                orbit_of[cid] = oid
        return orbits, orbit_of

    def deg(self, orbit_id):
        return len(self.class_orbits[orbit_id])

    def fixed_elements(self):
        return [g for g in range(self.group.order) if self._action[g] == g]


def class_points(orbit_degree, d):
    """F_{q^d}-points of a Frobenius orbit of classes of the given degree."""
    return orbit_degree if d % orbit_degree == 0 else 0


class WeightFunction:
    """Positive integer weight per class orbit, with minimal-locus data."""

    def __init__(self, frob, values):
        self.frob = frob
        n_orbits = len(frob.class_orbits)
        self.values = dict(values)
        for oid in range(n_orbits):
            v = self.values.get(oid)
            if v is None or int(v) <= 0:
                raise ValueError(f"weight missing or nonpositive on orbit {oid}")
            self.values[oid] = int(v)
        self.w_min = min(self.values.values())
        from fractions import Fraction
        self.a = Fraction(1, self.w_min)
        self.minimal_orbits = tuple(sorted(o for o, v in self.values.items()
                                           if v == self.w_min))
        self.b = len(self.minimal_orbits)

    @classmethod
    def constant(cls, frob, value=1):
        return cls(frob, {o: value for o in range(len(frob.class_orbits))})

    def __call__(self, orbit_id):
        return self.values[orbit_id]


class AbelianQuotient:
    """G^ab in invariant-factor form with the projection map."""

    def __init__(self, group):
        n = group.order
        derived_gens = {group.mul(group.mul(a, b),
                                  group.mul(group.inv[a], group.inv[b]))
                        for a in range(n) for b in range(n)}
        self.derived = frozenset(group.generated_subgroup(derived_gens))
        # present the quotient: generators e_g, relations e_a + e_b - e_{ab}
        rows = []
        for a in range(n):
            for b in range(n):
                row = [0] * n
                row[a] += 1
                row[b] += 1
                row[group.mul(a, b)] -= 1
                rows.append(row)
        d, _, v, rank = smith_normal_form(rows)
        diag = [d[i][i] for i in range(rank)]
        self._v = v
        self._keep = [i for i in range(rank) if diag[i] > 1] + list(range(rank, n))
        self.factors = tuple(diag[i] for i in range(rank) if diag[i] > 1) + \
            tuple(0 for _ in range(n - rank))
        self.factors = tuple(f for f in self.factors if f != 0)  # finite group
        self._moduli = [diag[i] for i in range(rank) if diag[i] > 1]
        self.group = group

    def project(self, g):
        vec = [0] * self.group.order
        vec[g] += 1
        vec[self.group.identity] -= 1
        w = vec_mat(vec, self._v)
        return tuple(w[i] % m for i, m in zip(self._keep, self._moduli))

    def induced_power_matrix(self, r):
        """Matrix of x -> r*x in invariant-factor coordinates (diagonal)."""
        return [[r if i == j else 0 for j in range(len(self._moduli))]
                for i in range(len(self._moduli))]


def abelianization(group):
    return AbelianQuotient(group)


def twisted_fixed_count(factors, q, action_matrix=None):
    """|A(-1)(F_q)| for a finite abelian group in invariant-factor form.

    With no extra automorphism the twisted Frobenius is x -> q^-1 * x, so the
    fixed points are A[q-1].  A composed automorphism may be passed as an
    integer matrix in the same coordinates.
    """
    factors = [int(f) for f in factors]
    if action_matrix is None:
        out = 1
        for f in factors:
            out *= gcd(q - 1, f)
        return out
    # fixed points of x -> q^-1 * M x: count solutions of (M - q) x = 0
    # in the coordinates, i.e. (q^-1 M - I)x = 0 over the factor moduli.
    k = len(factors)
    rows = []
    for i in range(k):
        row = [action_matrix[i][j] - (q if i == j else 0) for j in range(k)]
        rows.append(row)
    return _solution_count_mod(rows, factors)


def _solution_count_mod(rows, moduli):
    """Count x in prod Z/moduli[j] with sum_j rows[i][j] x_j = 0 mod moduli[i]."""
    k = len(moduli)
    if k == 0:
        return 1
    # unknowns x_j plus slack per congruence; count via SNF of the lifted map
    # {x : Mx in diag(moduli) Z^k} / diag(moduli) Z^k  -- enumerate directly,
    # the groups here are tiny.
    count = 0
    from itertools import product as iproduct
    for x in iproduct(*[range(m) for m in moduli]):
        if all(sum(rows[i][j] * x[j] for j in range(k)) % moduli[i] == 0
               for i in range(k)):
            count += 1
    return count


# -- subgroup lattices and the Moebius function -------------------------------


def subgroup_interval(group, m_subgroup):
    """All L with M <= L <= G, for M normal with abelian quotient.

    Returns a list of (subgroup_elements, quotient_invariant_factors) sorted
    by subgroup size then elements; the quotient is G/L.
    """
    m_set = frozenset(m_subgroup)
    if group.identity not in m_set:
        raise ValueError("M does not contain the identity")
    for g in range(group.order):
        if frozenset(group.conj(x, g) for x in m_set) != m_set:
            raise NotNormal("M is not normal in G")
    # commutators must land in M for G/M abelian
    for a in range(group.order):
        for b in range(group.order):
            comm = group.mul(group.mul(a, b), group.mul(group.inv[a], group.inv[b]))
            if comm not in m_set:
                raise QuotientNotAbelian("G/M is not abelian")

    # quotient group Q = G/M as explicit cosets
    cosets = []
    seen = set()
    for g in range(group.order):
        if g in seen:
            continue
        coset = frozenset(group.mul(g, m) for m in m_set)
        cosets.append(coset)
        seen |= coset
    coset_of = {}
    for i, c in enumerate(cosets):
        for g in c:
            coset_of[g] = i
    qn = len(cosets)
    reps = [min(c) for c in cosets]
    qtable = [[coset_of[group.mul(reps[i], reps[j])] for j in range(qn)]
              for i in range(qn)]
    q_id = coset_of[group.identity]

    subs = _abelian_subgroups_table(qtable, q_id)
    out = []
    for sub in subs:
        elements = sorted(set().union(*[cosets[i] for i in sub]))
        quotient_factors = _quotient_factors_table(qtable, q_id, sub)
        out.append((elements, quotient_factors))
    out.sort(key=lambda t: (len(t[0]), t[0]))
    return out


def _abelian_subgroups_table(table, identity):
    """All subgroups of a small abelian group given by its table."""
    n = len(table)
    all_mask = (1 << n) - 1

    def closure_of_cyclic(g):
        mask = 1 << identity
        x = g
        while not (mask >> x) & 1:
            mask |= 1 << x
            x = table[x][g]
        return mask

    cyclic = {}
    for g in range(n):
        cyclic.setdefault(closure_of_cyclic(g), g)
    subgroups = {1 << identity}
    frontier = [1 << identity]
    while frontier:
        new = []
        for h_mask in frontier:
            if h_mask == all_mask:
                continue
            for c_mask, gen in cyclic.items():
                if c_mask | h_mask == h_mask:
                    continue
                join = 0
                h_elems = [i for i in range(n) if (h_mask >> i) & 1]
                c_elems = [i for i in range(n) if (c_mask >> i) & 1]
                for a in h_elems:
                    row = table[a]
                    for b in c_elems:
                        join |= 1 << row[b]
                if join not in subgroups:
                    subgroups.add(join)
                    new.append(join)
        frontier = new
    out = []
    for mask in sorted(subgroups):
        out.append(sorted(i for i in range(n) if (mask >> i) & 1))
    return out


def _quotient_factors_table(table, identity, sub_elements):
    """Invariant factors of (abelian table group)/(subgroup)."""
    n = len(table)
    rows = []
    for a in range(n):
        for b in range(n):
            row = [0] * n
            row[a] += 1
            row[b] += 1
            row[table[a][b]] -= 1
            rows.append(row)
    for s in sub_elements:
        row = [0] * n
        row[s] += 1
        row[identity] -= 1
        rows.append(row)
    row = [0] * n
    row[identity] += 1
    rows.append(row)
    factors, free = invariant_factors(rows)
    assert free == 0
    return tuple(factors)


class _AbelianGroup:
    """Small helper: explicit abelian group prod Z/d_i as tuples."""

    def __init__(self, factors):
        self.factors = tuple(int(f) for f in factors if int(f) > 1)
        self.order = 1
        for f in self.factors:
            self.order *= f

    def elements(self):
        from itertools import product as iproduct
        return list(iproduct(*[range(f) for f in self.factors]))


def _subgroup_types_elementary(p, n):
    """(iso-type, count) for all subgroups of (Z/p)^n via echelon forms."""
    # number of k-dim subspaces = Gaussian binomial, enumerated honestly by
    # counting reduced echelon forms: choose pivot columns, count free cells.
    from itertools import combinations
    out = []
    for k in range(n + 1):
        total = 0
        for pivots in combinations(range(n), k):
            free = 0
            for i, c in enumerate(pivots):
                # free cells in row i: columns right of pivot c not pivotal
                free += sum(1 for j in range(c + 1, n) if j not in pivots)
            total += p ** free
        out.append(((p,) * k, total))
    return out


def _invariant_factors_of_subgroup(table, identity, elements):
    n = len(table)
    idx = {g: i for i, g in enumerate(elements)}
    k = len(elements)
    rows = []
    for a in elements:
        for b in elements:
            row = [0] * k
            row[idx[a]] += 1
            row[idx[b]] += 1
            row[idx[table[a][b]]] -= 1
            rows.append(row)
    row = [0] * k
    row[idx[identity]] += 1
    rows.append(row)
    factors, free = invariant_factors(rows)
    assert free == 0
    return tuple(factors)


_MOEBIUS_CACHE = {(): 1}


def _normalize_type(factors):
    """Canonical invariant-factor chain d_1 | d_2 | ... for an abelian type."""
    fac = [int(f) for f in factors if int(f) > 1]
    if not fac:
        return ()
    # decompose into prime powers, then reassemble the divisibility chain
    primes = {}
    for f in fac:
        m = f
        d = 2
        while d * d <= m:
            while m % d == 0:
                primes.setdefault(d, []).append(d)
                e = 1
                mm = m // d
                while mm % d == 0:
                    mm //= d
                    e += 1
                primes[d][-1] = d ** e
                m = mm
            d += 1
        if m > 1:
            primes.setdefault(m, []).append(m)
    for plist in primes.values():
        plist.sort(reverse=True)
    depth = max(len(v) for v in primes.values())
    chain = []
    for i in range(depth):
        val = 1
        for plist in primes.values():
            if i < len(plist):
                val *= plist[i]
        chain.append(val)
    chain.sort()
    return tuple(chain)


def moebius_abelian(factors):
    """Moebius value of a finite abelian group, via the subgroup recursion.

    Defined by sum over all subgroups B <= A of mu(B) = 1 if A = 0 else 0.
    """
    typ = _normalize_type(factors)
    if typ in _MOEBIUS_CACHE:
        return _MOEBIUS_CACHE[typ]
    total = 0
    for sub_type, count in subgroup_type_census(typ):
        if sub_type == typ:
            continue
        total += count * moebius_abelian(sub_type)
    value = -total
    _MOEBIUS_CACHE[typ] = value
    return value


def subgroup_type_census(factors):
    """Multiset of (iso type, count) over all subgroups of the abelian group.

    Coprime parts split: the lattice of an abelian group is the product of
    the lattices of its Sylow subgroups.
    """
    typ = _normalize_type(factors)
    if not typ:
        return [((), 1)]
    # split by prime
    primes = {}
    for f in typ:
        m = f
        d = 2
        while d * d <= m:
            if m % d == 0:
                e = 0
                while m % d == 0:
                    m //= d
                    e += 1
                primes.setdefault(d, []).append(d ** e)
            d += 1
        if m > 1:
            primes.setdefault(m, []).append(m)
    per_prime = []
    for p, parts in sorted(primes.items()):
        if all(x == p for x in parts):
            per_prime.append(_subgroup_types_elementary(p, len(parts)))
        else:
            per_prime.append(_subgroup_census_pgroup(parts))
    # combine across primes
    combined = [((), 1)]
    for census in per_prime:
        new = []
        for t1, c1 in combined:
            for t2, c2 in census:
                new.append((_normalize_type(t1 + t2), c1 * c2))
        merged = {}
        for t, c in new:
            merged[t] = merged.get(t, 0) + c
        combined = sorted(merged.items())
    return combined


def _subgroup_census_pgroup(parts):
    """Honest subgroup census of an abelian p-group prod Z/parts[i]."""
    grp = _AbelianGroup(parts)
    elems = grp.elements()
    n = len(elems)
    index = {e: i for i, e in enumerate(elems)}
    table = [[index[tuple((a[i] + b[i]) % grp.factors[i] for i in range(len(grp.factors)))]
              for b in elems] for a in elems]
    identity = index[tuple(0 for _ in grp.factors)]
    subs = _abelian_subgroups_table(table, identity)
    census = {}
    for sub in subs:
        t = _invariant_factors_of_subgroup(table, identity, sub)
        t = _normalize_type(t)
        census[t] = census.get(t, 0) + 1
    return sorted(census.items())


# -- constructors and serialization -------------------------------------------


def cyclic_group(n, name=None):
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    return FiniteGroup(table, name or f"Z{n}")


def direct_product(g1, g2, name=None):
    n1, n2 = g1.order, g2.order
    table = [[0] * (n1 * n2) for _ in range(n1 * n2)]
    for a1 in range(n1):
        for b1 in range(n2):
            for a2 in range(n1):
                for b2 in range(n2):
                    i = a1 * n2 + b1
                    j = a2 * n2 + b2
                    table[i][j] = g1.mul(a1, a2) * n2 + g2.mul(b1, b2)
    return FiniteGroup(table, name or f"{g1.name}x{g2.name}")


def from_permutations(perm_generators, name="G"):
    """Group generated by permutations (0-based lists); normalized to a table."""
    degree = len(perm_generators[0])
    for p in perm_generators:
        if sorted(p) != list(range(degree)):
            raise ValueError("generator is not a permutation")
    identity = tuple(range(degree))
    elements = [identity]
    seen = {identity}
    frontier = [identity]
    gens = [tuple(p) for p in perm_generators]
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = tuple(x[g[i]] for i in range(degree))
                if y not in seen:
                    seen.add(y)
                    elements.append(y)
                    new.append(y)
        frontier = new
    elements.sort()
    index = {e: i for i, e in enumerate(elements)}
    table = [[index[tuple(a[b[i]] for i in range(degree))] for b in elements]
             for a in elements]
    return FiniteGroup(table, name)


def symmetric_group(n, name=None):
    gens = []
    for i in range(n - 1):
        p = list(range(n))
        p[i], p[i + 1] = p[i + 1], p[i]
        gens.append(p)
    return from_permutations(gens, name or f"S{n}")


def dihedral_group(n, name=None):
    """Dihedral group of order 2n as permutations of the n-gon."""
    rot = [(i + 1) % n for i in range(n)]
    ref = [(n - i) % n for i in range(n)]
    return from_permutations([rot, ref], name or f"D{n}")


def quaternion_group(name="Q8"):
    """Q8 with elements ordered 1, -1, i, -i, j, -j, k, -k."""
    names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
    base = {"1": (1, "1"), "-1": (-1, "1"), "i": (1, "i"), "-i": (-1, "i"),
            "j": (1, "j"), "-j": (-1, "j"), "k": (1, "k"), "-k": (-1, "k")}
    quat = {("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"), ("1", "k"): (1, "k"),
            ("i", "1"): (1, "i"), ("j", "1"): (1, "j"), ("k", "1"): (1, "k"),
            ("i", "i"): (-1, "1"), ("j", "j"): (-1, "1"), ("k", "k"): (-1, "1"),
            ("i", "j"): (1, "k"), ("j", "i"): (-1, "k"),
            ("j", "k"): (1, "i"), ("k", "j"): (-1, "i"),
            ("k", "i"): (1, "j"), ("i", "k"): (-1, "j")}
    idx = {nm: i for i, nm in enumerate(names)}
    table = [[0] * 8 for _ in range(8)]
    for a, na in enumerate(names):
        sa, xa = base[na]
        for b, nb in enumerate(names):
            sb, xb = base[nb]
            s, x = quat[(xa, xb)]
            s *= sa * sb
            table[a][b] = idx[x if s == 1 else "-" + x] if x != "1" else idx["1" if s == 1 else "-1"]
    return FiniteGroup(table, name)


def load_group_json(path_or_dict):
    """Load a group spec: {"name", "perm_generators": [...]} or {"table": ...}."""
    if isinstance(path_or_dict, dict):
        data = path_or_dict
    else:
        with open(path_or_dict, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    name = data.get("name", "G")
    if "table" in data:
        return FiniteGroup(data["table"], name)
    if "perm_generators" in data:
        return from_permutations(data["perm_generators"], name)
    raise ValueError("group spec needs 'table' or 'perm_generators'")


def builtin_group(spec):
    """Named corpus groups: Z2, Z3, Z4, V4, S3, D4, Q8, or ZnxZm."""
    s = spec.strip()
    low = s.lower()
    if low == "v4":
        return direct_product(cyclic_group(2), cyclic_group(2), "V4")
    if low == "s3":
        return symmetric_group(3)
    if low == "d4":
        return dihedral_group(4)
    if low == "q8":
        return quaternion_group()
    if "x" in low:
        parts = low.split("x")
        groups = []
        for p in parts:
            if not p.startswith("z"):
                raise ValueError(f"unknown group spec {spec!r}")
            groups.append(cyclic_group(int(p[1:])))
        out = groups[0]
        for g in groups[1:]:
            out = direct_product(out, g)
        out.name = s
        return out
    if low.startswith("z"):
        return cyclic_group(int(low[1:]))
    raise ValueError(f"unknown group spec {spec!r}")
