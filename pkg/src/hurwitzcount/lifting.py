"""The universal marked central extension and its counting data.

U(G, C) is the group generated by symbols [g] for g in the conjugation
invariant generating set C, modulo [h][g][h]^-1 = [hgh^-1].  Its kernel
A over G is central, finitely generated abelian, with free rank the
number of geometric classes in C and torsion the reduced multiplier
H2(G, C).  Everything is computed exactly:

* a Reidemeister-Schreier presentation of ker(Free(C) -> G), rewritten
  through a minimal-length lexicographically least transversal,
* Smith normal form of the abelianized relator lattice,
* the arithmetic Frobenius in two forms: the raw generator substitution
  [g] -> [sigma g^(1/q) sigma^-1]^q (a group endomorphism that scales
  multidegrees by q) and the induced multidegree-preserving automorphism
  used for all fixed-point counts (its unique q-th root),
* lifting invariants of tuples, fiber membership by lattice solvability,
  and Frobenius-fixed counts of the fibers.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from itertools import product as iproduct

from .errors import BudgetExceeded, NonInvariantInput, NotGenerating
from .snf import CokernelPresentation, solve_integer


DEFAULT_CELL_BUDGET = 10 ** 8


def _cell_budget():
    return int(os.environ.get("HM_BUDGET", DEFAULT_CELL_BUDGET))


@dataclass(frozen=True)
class UElement:
    """Normal form of an element of U(G, C): image, multidegree, kernel coords.

    ``tors`` are coordinates in the invariant-factor basis of the torsion of
    A (this is H2(G, C)); ``free`` are the free coordinates, redundant given
    the multidegree but kept for exact evaluation of homomorphisms on A.
    """

    image: int
    tors: tuple
    free: tuple

    def key(self):
        return (self.image, self.tors, self.free)


class _FrobData:
    """Cached Frobenius action data on U for one (q, twist)."""

    __slots__ = ("frob", "m1_cols", "phi2_cols", "z1", "z2")

    def __init__(self, frob, m1_cols, phi2_cols, z1, z2):
        self.frob = frob
        self.m1_cols = m1_cols
        self.phi2_cols = phi2_cols
        self.z1 = z1
        self.z2 = z2


class LiftingData:
    """All exact data attached to U(G, C) for one (G, C) and one Frobenius."""

    def __init__(self, group, c_elements, frob=None, budget=None, section_seed=None):
        budget = budget or _cell_budget()
        self.group = group
        self.c_elements = tuple(sorted(set(c_elements)))
        if group.identity in self.c_elements:
            raise ValueError("C contains the identity")
        ct = group.conjugacy_table()
        self.ct = ct
        c_set = set(self.c_elements)
        for g in self.c_elements:
            if any(x not in c_set for x in ct.classes[ct.class_of[g]]):
                raise ValueError("C is not conjugation-invariant")
        if not group.generates(self.c_elements):
            raise NotGenerating("C does not generate G")
        self.class_ids = tuple(sorted({ct.class_of[g] for g in self.c_elements}))
        self.class_index = {cid: i for i, cid in enumerate(self.class_ids)}
        self.n_classes = len(self.class_ids)

        n_gens = len(self.c_elements) * group.order
        n_relator_rows = len(self.c_elements) ** 2 * group.order
        if n_gens * n_relator_rows > budget:
            raise BudgetExceeded("presentation matrix exceeds budget",
                                 attempted=n_gens * n_relator_rows, budget=budget)

        self.gen_order = list(self.c_elements)
        if section_seed is not None:
            import random
            rng = random.Random(section_seed)
            rng.shuffle(self.gen_order)

        self._build_transversal()
        self._build_schreier()
        self._build_kernel()
        self.frob = None
        if frob is not None:
            self.set_frobenius(frob)

    # -- presentation ----------------------------------------------------------

    def _build_transversal(self):
        g = self.group
        rep = {g.identity: ()}
        queue = [g.identity]
        tree = set()
        while queue:
            new = []
            for a in queue:
                for x in self.gen_order:
                    b = g.mul(a, x)
                    if b not in rep:
                        rep[b] = rep[a] + (x,)
                        tree.add((a, x))
                        new.append(b)
            queue = new
        assert len(rep) == g.order
        self.rep_word = rep
        self.tree_edges = tree

    def _build_schreier(self):
        g = self.group
        nontree = []
        index = {}
        for a in range(g.order):
            for x in self.c_elements:
                if (a, x) not in self.tree_edges:
                    index[(a, x)] = len(nontree)
                    nontree.append((a, x))
        self.schreier = nontree
        self.schreier_index = index

    def _rewrite(self, word):
        """Vector of a kernel word over the nontree Schreier generators.

        ``word`` is a list of (generator element, +-1); its image must be
        the identity.
        """
        g = self.group
        vec = [0] * len(self.schreier)
        a = g.identity
        for x, sign in word:
            if sign == 1:
                key = (a, x)
                if key in self.schreier_index:
                    vec[self.schreier_index[key]] += 1
                a = g.mul(a, x)
            else:
                a2 = g.mul(a, g.inv[x])
                key = (a2, x)
                if key in self.schreier_index:
                    vec[self.schreier_index[key]] -= 1
                a = a2
        assert a == g.identity, "word does not lie in the kernel"
        return vec

    def _word_image(self, word):
        g = self.group
        a = g.identity
        for x, sign in word:
            a = g.mul(a, x if sign == 1 else g.inv[x])
        return a

    def _build_kernel(self):
        g = self.group
        rows = []
        for a in range(g.order):
            conj = [(x, 1) for x in self.rep_word[a]]
            conj_inv = [(x, -1) for x in reversed(self.rep_word[a])]
            for h in self.c_elements:
                for x in self.c_elements:
                    target = g.conj(x, h)
                    relator = [(h, 1), (x, 1), (h, -1), (target, -1)]
                    rows.append(self._rewrite(conj + relator + conj_inv))
        self.presentation = CokernelPresentation(rows, n=len(self.schreier))
        self.torsion = tuple(self.presentation.torsion)
        self.free_rank = self.presentation.free_rank
        assert self.free_rank == self.n_classes, \
            f"free rank {self.free_rank} != class count {self.n_classes}"

        # multidegree of each Schreier generator, and of every section word
        self.section_rvec = {a: self._rvec_word([(x, 1) for x in w])
                             for a, w in self.rep_word.items()}
        amb_r = []
        for (a, x) in self.schreier:
            v = list(self.section_rvec[a])
            v[self.class_index[self.ct.class_of[x]]] += 1
            b = g.mul(a, x)
            v = [vi - wi for vi, wi in zip(v, self.section_rvec[b])]
            amb_r.append(v)
        self._amb_r = amb_r  # per Schreier generator

        # sanity: relators have zero multidegree image
        # R on A-coordinates via lifts of the basis
        self.r_free = []
        for j in range(self.free_rank):
            lift = self.presentation.lift(tuple(0 for _ in self.torsion),
                                          tuple(1 if i == j else 0
                                                for i in range(self.free_rank)))
            self.r_free.append(self._amb_apply_r(lift))
        for j in range(len(self.torsion)):
            lift = self.presentation.lift(tuple(1 if i == j else 0
                                                for i in range(len(self.torsion))),
                                          tuple(0 for _ in range(self.free_rank)))
            rv = self._amb_apply_r(lift)
            assert all(x == 0 for x in rv), "R does not kill torsion"

    def _amb_apply_r(self, vec):
        out = [0] * self.n_classes
        for s, c in enumerate(vec):
            if c:
                for k in range(self.n_classes):
                    out[k] += c * self._amb_r[s][k]
        return tuple(out)

    def _rvec_word(self, word):
        out = [0] * self.n_classes
        for x, sign in word:
            cid = self.ct.class_of[x]
            out[self.class_index[cid]] += sign
        return tuple(out)

    # -- elements and normal forms ----------------------------------------------

    def coords_of_word(self, word):
        """UElement of an arbitrary word (list of (element, sign)) in U."""
        h = self._word_image(word)
        inv_rep = [(x, -1) for x in reversed(self.rep_word[h])]
        vec = self._rewrite(word + inv_rep)
        tors, free = self.presentation.coords(vec)
        return UElement(h, tors, free)

    def lifting_invariant(self, entries):
        """Normal form of [g_1]...[g_n] for a tuple with entries in C."""
        for g in entries:
            if g not in set(self.c_elements):
                raise ValueError("tuple entry outside C")
        return self.coords_of_word([(g, 1) for g in entries])

    def multidegree_of(self, u):
        """R-image of a UElement in Z^classes (the full multidegree)."""
        rv = self._coords_apply_r(u.tors, u.free)
        base = self.section_rvec[u.image]
        return tuple(r + b for r, b in zip(rv, base))

    def _coords_apply_r(self, tors, free):
        out = [0] * self.n_classes
        for j, c in enumerate(free):
            if c:
                for k in range(self.n_classes):
                    out[k] += c * self.r_free[j][k]
        return tuple(out)

    def mul(self, u1, u2):
        g = self.group
        h = g.mul(u1.image, u2.image)
        tau = self._section_cocycle(u1.image, u2.image)
        tors = tuple((a + b + t) % d for a, b, t, d in
                     zip(u1.tors, u2.tors, tau.tors, self.torsion))
        free = tuple(a + b + t for a, b, t in zip(u1.free, u2.free, tau.free))
        return UElement(h, tors, free)

    def _section_cocycle(self, h1, h2):
        word = ([(x, 1) for x in self.rep_word[h1]] +
                [(x, 1) for x in self.rep_word[h2]])
        return self.coords_of_word(word)

    def identity_element(self):
        return UElement(self.group.identity,
                        tuple(0 for _ in self.torsion),
                        tuple(0 for _ in range(self.free_rank)))

    # -- Frobenius ---------------------------------------------------------------

    def set_frobenius(self, frob):
        """Attach the default FrobeniusStructure (builds both matrices)."""
        self.frob = frob
        self.frobenius_data(frob)

    def frobenius_data(self, frob):
        """Per-(q, twist) Frobenius data on U, built once and cached."""
        assert frob.group is self.group
        if not hasattr(self, "_frob_cache"):
            self._frob_cache = {}
        key = (frob.q, frob.twist)
        if key in self._frob_cache:
            return self._frob_cache[key]
        q = frob.q

        def f1_word(word):
            out = []
            for x, sign in word:
                y = frob.action(x)
                out.extend([(y, sign)] * q)
            return out

        m1_amb = []
        for (a, x) in self.schreier:
            word = ([(y, 1) for y in self.rep_word[a]] + [(x, 1)] +
                    [(y, -1) for y in reversed(self.rep_word[self.group.mul(a, x)])])
            m1_amb.append(self._rewrite(f1_word(word)))

        def m1_on_coords(tors, free):
            lift = self.presentation.lift(tors, free)
            vec = [0] * len(self.schreier)
            for s, c in enumerate(lift):
                if c:
                    for k, v in enumerate(m1_amb[s]):
                        if v:
                            vec[k] += c * v
            return self.presentation.coords(vec)

        cols = []
        for j in range(len(self.torsion)):
            cols.append(m1_on_coords(tuple(1 if i == j else 0
                                           for i in range(len(self.torsion))),
                                     tuple(0 for _ in range(self.free_rank))))
        for j in range(self.free_rank):
            cols.append(m1_on_coords(tuple(0 for _ in self.torsion),
                                     tuple(1 if i == j else 0
                                           for i in range(self.free_rank))))
        phi2 = [self._divide_by_q(c, q) for c in cols]

        z1, z2 = {}, {}
        g = self.group
        for h in range(g.order):
            gp = frob.action(h)
            rep_gp = [(x, 1) for x in self.rep_word[gp]]
            word1 = rep_gp * q + [(x, -1) for x in reversed(self.rep_word[g.power(gp, q)])]
            z1[h] = self.coords_of_word(word1)
            word2 = (f1_word([(x, 1) for x in self.rep_word[h]]) +
                     [(x, -1) for x in reversed(self.rep_word[g.conj(h, frob.twist)])])
            z2[h] = self.coords_of_word(word2)
        data = _FrobData(frob, cols, phi2, z1, z2)
        self._check_frobenius_consistency(data)
        self._frob_cache[key] = data
        return data

    def _divide_by_q(self, col, q):
        tors, free = col
        tors2 = tuple((t * pow(q, -1, d)) % d for t, d in zip(tors, self.torsion))
        free2 = []
        for x in free:
            assert x % q == 0, "twisted Frobenius is not integral"
            free2.append(x // q)
        return (tors2, tuple(free2))

    def _check_frobenius_consistency(self, data):
        # R . Phi2 = perm . R on the free basis
        perm = data.frob.class_perm
        for j in range(self.free_rank):
            tors, free = data.phi2_cols[len(self.torsion) + j]
            rv = self._coords_apply_r(tors, free)
            expected = [0] * self.n_classes
            for k, cid in enumerate(self.class_ids):
                expected[self.class_index[perm[cid]]] += self.r_free[j][k]
            assert list(rv) == expected, "R does not intertwine the twisted Frobenius"

    def frobenius_raw_matrix(self, frob=None):
        """The generator-formula endomorphism on A (scales multidegrees by q)."""
        return self.frobenius_data(frob or self.frob).m1_cols

    def _apply_cols(self, cols, tors, free):
        t = len(self.torsion)
        acc_t = [0] * t
        acc_f = [0] * self.free_rank
        coords = list(tors) + list(free)
        for j, c in enumerate(coords):
            if c:
                ct_, cf_ = cols[j]
                for i in range(t):
                    acc_t[i] += c * ct_[i]
                for i in range(self.free_rank):
                    acc_f[i] += c * cf_[i]
        return (tuple(x % d for x, d in zip(acc_t, self.torsion)), tuple(acc_f))

    def frobenius_on_kernel(self, tors, free, frob=None):
        """Twisted (multidegree-preserving) Frobenius on A-coordinates."""
        data = self.frobenius_data(frob or self.frob)
        return self._apply_cols(data.phi2_cols, tors, free)

    def frobenius_raw_on_kernel(self, tors, free, frob=None):
        """Generator-formula Frobenius on A-coordinates (multidegree times q)."""
        data = self.frobenius_data(frob or self.frob)
        return self._apply_cols(data.m1_cols, tors, free)

    def frobenius_on_element(self, u, frob=None):
        """Twisted Frobenius on any element of U with integral multidegree."""
        data = self.frobenius_data(frob or self.frob)
        frob = data.frob
        g = self.group
        q = frob.q
        gp = frob.action(u.image)
        m1t, m1f = self._apply_cols(data.m1_cols, u.tors, u.free)
        z2 = data.z2[u.image]
        z1 = data.z1[u.image]
        # q*b + z1 = M1(a) + z2 in A-coordinates
        tors_rhs = tuple((mt + z2t - z1t) % d for mt, z2t, z1t, d in
                         zip(m1t, z2.tors, z1.tors, self.torsion))
        free_rhs = tuple(mf + z2f - z1f for mf, z2f, z1f in
                         zip(m1f, z2.free, z1.free))
        tors_b = tuple((t * pow(q, -1, d)) % d for t, d in zip(tors_rhs, self.torsion))
        free_b = []
        for x in free_rhs:
            assert x % q == 0, "Frobenius image is not integral"
            free_b.append(x // q)
        return UElement(gp, tors_b, tuple(free_b))

    # -- fibers -------------------------------------------------------------------

    def nbar_vector(self, nbar):
        """Multidegree dict (class id -> count) as a vector over self.class_ids."""
        vec = [0] * self.n_classes
        for cid, cnt in nbar.items():
            if cnt and cid not in self.class_index:
                raise ValueError(f"class {cid} outside C")
            if cnt:
                vec[self.class_index[cid]] = int(cnt)
        return tuple(vec)

    def fiber_base_point(self, nbar, gamma):
        """A point of the fiber U(G,C)_{nbar, gamma}, or None if empty.

        The fiber consists of elements with multidegree nbar mapping to
        gamma^-1 in G; membership is exact lattice solvability.
        """
        g_img = self.group.inv[gamma]
        target = tuple(n - b for n, b in
                       zip(self.nbar_vector(nbar), self.section_rvec[g_img]))
        # solve R_free . x = target over Z (columns of r_free are rows here)
        mat = [list(self.r_free[j]) for j in range(self.free_rank)]
        sol = solve_integer(mat, list(target))
        if sol is None:
            return None
        return UElement(g_img, tuple(0 for _ in self.torsion), tuple(sol))

    def torsor_fixed_count(self, nbar, gamma, frob=None, return_details=False):
        """|U(G,C)_{nbar,gamma}(F_q)|: zero or the Frobenius-fixed H2 size."""
        frob = frob or self.frob
        if frob is None:
            raise ValueError("no Frobenius structure attached")
        perm = frob.class_perm
        for cid, cnt in nbar.items():
            if cnt and nbar.get(perm[cid], 0) != cnt:
                raise NonInvariantInput("multidegree is not Frobenius-invariant")
        if frob.action(gamma) != gamma:
            raise NonInvariantInput("gamma is not fixed by the twisted Frobenius")
        base = self.fiber_base_point(nbar, gamma)
        if base is None:
            return (0, "empty-fiber") if return_details else 0
        image = self.frobenius_on_element(base, frob)
        assert image.image == base.image and image.free == base.free, \
            "Frobenius does not preserve the fiber"
        delta = tuple((it - bt) % d for it, bt, d in
                      zip(image.tors, base.tors, self.torsion))
        count = self._count_torsion_solutions(delta, frob)
        if return_details:
            return count, ("fixed-points" if count else "no-rational-point")
        return count

    def _count_torsion_solutions(self, delta, frob=None):
        """Number of a in torsion(A) with (Phi2 - 1) a = -delta; 0 if none."""
        t = len(self.torsion)
        if t == 0:
            return 1
        data = self.frobenius_data(frob or self.frob)
        phi_t = [data.phi2_cols[j][0] for j in range(t)]
        count = 0
        for a in iproduct(*[range(d) for d in self.torsion]):
            ok = True
            for i in range(t):
                lhs = sum(phi_t[j][i] * a[j] for j in range(t)) - a[i] + delta[i]
                if lhs % self.torsion[i] != 0:
                    ok = False
                    break
            if ok:
                count += 1
        return count

    def h2_fixed_count(self, frob=None):
        """|H2(G, C)^Frob| for the given (default: attached) Frobenius."""
        return self._count_torsion_solutions(tuple(0 for _ in self.torsion), frob)

    def h2_order(self):
        out = 1
        for d in self.torsion:
            out *= d
        return out

    # -- serialization --------------------------------------------------------------

    def to_json(self):
        return {
            "group": self.group.name,
            "support": list(self.c_elements),
            "class_ids": list(self.class_ids),
            "free_rank": self.free_rank,
            "h2_invariant_factors": list(self.torsion),
            "r_free": [list(r) for r in self.r_free],
            "frobenius": None if self.frob is None else {
                "q": self.frob.q,
                "twist": self.frob.twist,
                "raw_matrix_cols": [
                    {"tors": list(c[0]), "free": list(c[1])}
                    for c in self.frobenius_data(self.frob).m1_cols],
                "twisted_matrix_cols": [
                    {"tors": list(c[0]), "free": list(c[1])}
                    for c in self.frobenius_data(self.frob).phi2_cols],
            },
        }

    def dump_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)


def build_lifting_data(group, c_elements, frob=None, budget=None, section_seed=None):
    return LiftingData(group, c_elements, frob=frob, budget=budget,
                       section_seed=section_seed)
