"""The obstruction group of (alpha, psi)-pairs and its residues.

An element is a pair: a homomorphism alpha on the kernel A of U(G,C) -> G
valued in Q/Z, and a vector psi recording the Frobenius value of a cocycle
on the multidegree lattice, subject to the compatibility

    alpha(Phi b) - alpha(b) = psi(perm(R b))     for all b in A,

modulo pairs (f.R, f - f.perm^-1) coming from functionals f on the
multidegree lattice.  Phi is the multidegree-preserving Frobenius on A.
The quotient is finite; every class is stored by a canonical representative
with denominators dividing a fixed modulus.  Residues at the finite classes
are orbit sums of psi, and the residue at infinity evaluates alpha on the
Frobenius defect of a lift of the boundary monodromy.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .errors import ClassOutsideC, NonInvariantInput
from .groups import FrobeniusStructure
from .snf import kernel_basis, smith_normal_form, solve_integer


class SubquotientGroup:
    """V / W for subgroups W <= V <= (Z/L)^N given by generators."""

    def __init__(self, v_gens, w_gens, modulus, dim):
        self.L = modulus
        self.N = dim
        self.v_gens = [list(v) for v in v_gens]
        # relation lattice: x in Z^a with sum x_i v_i in W + L Z^N
        a = len(self.v_gens)
        stacked = self.v_gens + [list(w) for w in w_gens] + \
            [[modulus if j == i else 0 for j in range(dim)] for i in range(dim)]
        kernel = kernel_basis(stacked)
        relations = [row[:a] for row in kernel]
        d, _, v, rank = smith_normal_form(relations) if relations else ([], None, None, 0)
        if relations:
            self._v = v
            diag = [d[i][i] for i in range(rank)]
        else:
            self._v = [[1 if i == j else 0 for j in range(a)] for i in range(a)]
            diag = []
            rank = 0
        self._tors_idx = [i for i in range(rank) if diag[i] > 1]
        self._free_idx = list(range(rank, a))
        assert not self._free_idx, "subquotient is not finite"
        self.factors = tuple(diag[i] for i in self._tors_idx)
        self._a = a

    def order(self):
        out = 1
        for f in self.factors:
            out *= f
        return out

    def coords_of_combination(self, x):
        """Class coordinates of sum x_i v_i."""
        from .snf import vec_mat
        w = vec_mat(list(x), self._v)
        return tuple(w[i] % f for i, f in zip(self._tors_idx, self.factors))

    def combination_for_coords(self, coords):
        """An x in Z^a whose class has the given coordinates."""
        from .snf import vec_mat
        from .snf import invert_unimodular
        w = [0] * self._a
        for i, c in zip(self._tors_idx, coords):
            w[i] = c
        vinv = invert_unimodular(self._v)
        return vec_mat(w, vinv)

    def vector_for_coords(self, coords):
        x = self.combination_for_coords(coords)
        out = [0] * self.N
        for xi, gen in zip(x, self.v_gens):
            if xi:
                for j in range(self.N):
                    out[j] += xi * gen[j]
        return [v % self.L for v in out]

    def coords_of_vector(self, vec):
        """Class coordinates of an explicit vector in V (mod L)."""
        mat = self.v_gens + [[self.L if j == i else 0 for j in range(self.N)]
                             for i in range(self.N)]
        sol = solve_integer(mat, list(vec))
        if sol is None:
            raise ValueError("vector is not in the subgroup")
        return self.coords_of_combination(sol[:len(self.v_gens)])

    def all_coords(self):
        from itertools import product as iproduct
        return list(iproduct(*[range(f) for f in self.factors]))


class BrauerElement:
    """A reduced (alpha, psi) pair over a LiftingData."""

    def __init__(self, group_obj, coords):
        self.parent = group_obj
        self.coords = tuple(coords)
        vec = group_obj.subquotient.vector_for_coords(coords)
        L = group_obj.modulus
        ld = group_obj.lifting
        t = len(ld.torsion)
        k = ld.free_rank
        self.alpha_tors = tuple(Fraction(v, L) for v in vec[:t])
        self.alpha_free = tuple(Fraction(v, L) for v in vec[t:t + k])
        self.psi = tuple(Fraction(v, L) for v in vec[t + k:])

    def __eq__(self, other):
        return self.parent is other.parent and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __add__(self, other):
        assert self.parent is other.parent
        v1 = self.parent.subquotient.vector_for_coords(self.coords)
        v2 = self.parent.subquotient.vector_for_coords(other.coords)
        vec = [(a + b) % self.parent.modulus for a, b in zip(v1, v2)]
        return BrauerElement(self.parent,
                             self.parent.subquotient.coords_of_vector(vec))

    def is_zero(self):
        return all(c == 0 for c in self.coords)

    # -- evaluation ------------------------------------------------------------

    def alpha_on(self, tors, free):
        out = Fraction(0)
        for c, a in zip(tors, self.alpha_tors):
            out += c * a
        for c, a in zip(free, self.alpha_free):
            out += c * a
        return out % 1

    def psi_on(self, class_vector):
        out = Fraction(0)
        for c, p in zip(class_vector, self.psi):
            out += c * p
        return out % 1

    def residue(self, orbit_id):
        """Corestricted residue at a Frobenius orbit of classes in C."""
        return self.parent.residue(self, orbit_id)

    def to_json(self):
        return {
            "coords": list(self.coords),
            "alpha_tors": [str(x) for x in self.alpha_tors],
            "alpha_free": [str(x) for x in self.alpha_free],
            "psi": [str(x) for x in self.psi],
        }


class BrauerGroup:
    """The full group of reduced (alpha, psi) pairs for one (G, C, Frobenius)."""

    def __init__(self, lifting, frob):
        self.lifting = lifting
        self.frob = frob
        ld = lifting
        g = ld.group
        t = len(ld.torsion)
        k = ld.free_rank
        nc = ld.n_classes
        self.N = t + k + nc

        perm = frob.class_perm
        # permutation on the indices of ld.class_ids
        self.perm_idx = [ld.class_index[perm[cid]] for cid in ld.class_ids]

        c_set = set(ld.c_elements)
        for g_el in ld.c_elements:
            if frob.action(g_el) not in c_set:
                raise NonInvariantInput("support C is not Frobenius-invariant")
        self.support_orbits = tuple(
            oid for oid in range(len(frob.class_orbits))
            if all(cid in ld.class_index for cid in frob.class_orbits[oid]))

        fd = ld.frobenius_data(frob)
        phi_cols = fd.phi2_cols  # (tors, free) per basis vector (tors first)

        # constraint rows: alpha(Phi b_j) - alpha(b_j) - psi(perm R b_j) = 0
        rows = []
        for j in range(t + k):
            pt, pf = phi_cols[j]
            row = [0] * self.N
            for i in range(t):
                row[i] += pt[i]
            for i in range(k):
                row[t + i] += pf[i]
            row[j] -= 1
            rbj = ([0] * nc if j < t else ld.r_free[j - t])
            for c in range(nc):
                if rbj[c]:
                    row[t + k + self.perm_idx[c]] -= rbj[c]
            rows.append(row)
        # torsion denominators: d_i * alpha_i = 0
        for i in range(t):
            row = [0] * self.N
            row[i] = ld.torsion[i]
            rows.append(row)
        self.constraints = rows

        # coboundary matrix: columns indexed by f_c
        cob_cols = []
        for c in range(nc):
            col = [0] * self.N
            for j in range(k):
                col[t + j] += ld.r_free[j][c]
            col[t + k + c] += 1
            # subtract f at perm^-1: psi_c -= f_{perm^-1(c)}, i.e. the
            # f_c-column contributes -1 at psi index perm(c)
            col[t + k + self.perm_idx[c]] -= 1
            cob_cols.append(col)
        self.cob_cols = cob_cols

        # modulus: reduced representatives have denominators dividing
        # |G|^2 lcm torsion; identifications need the elementary divisors
        # of the coboundary matrix.
        m0 = g.order ** 2
        for d in ld.torsion:
            m0 = m0 * d // gcd(m0, d)
        cmat = [[cob_cols[c][i] for c in range(nc)] for i in range(self.N)]
        dmat, _, _, rank = smith_normal_form(cmat)
        maxdiv = 1
        for i in range(rank):
            maxdiv = max(maxdiv, dmat[i][i])
        L = m0 * maxdiv
        self.modulus = L

        # V: solutions of constraints mod L
        v_gens = self._solutions_mod(rows, L)
        # W*: image of the coboundaries over Q/Z intersected with (1/L):
        # w in W* iff K w = 0 mod L for K the integer left kernel of C.
        k_rows = kernel_basis(cmat)
        w_gens = self._solutions_mod(k_rows, L)
        # sanity: W* inside V
        for w in w_gens:
            for row in rows:
                assert sum(r * x for r, x in zip(row, w)) % L == 0, \
                    "coboundary violates the cocycle condition"
        self.subquotient = SubquotientGroup(v_gens, w_gens, L, self.N)
        self.elements = [BrauerElement(self, c) for c in self.subquotient.all_coords()]

    @staticmethod
    def _solutions_mod(rows, L):
        """Generators of {x : rows . x = 0 mod L} as integer vectors."""
        if not rows:
            n = 0
        n = len(rows[0]) if rows else 0
        if not rows:
            return []
        r = len(rows)
        stacked = [[rows[i][j] for i in range(r)] for j in range(n)]
        stacked += [[L if i == j else 0 for i in range(r)] for j in range(r)]
        kernel = kernel_basis(stacked)
        gens = [row[:n] for row in kernel]
        return [[x % L for x in gen] for gen in gens]

    def __len__(self):
        return len(self.elements)

    def zero(self):
        return BrauerElement(self, tuple(0 for _ in self.subquotient.factors))

    # -- residues ----------------------------------------------------------------

    def residue(self, beta, orbit_id):
        ld = self.lifting
        orbit = self.frob.class_orbits[orbit_id]
        total = Fraction(0)
        for cid in orbit:
            if cid not in ld.class_index:
                raise ClassOutsideC(f"class {cid} outside C")
            total += beta.psi[ld.class_index[cid]]
        return total % 1

    def residue_table(self, beta):
        return {oid: self.residue(beta, oid) for oid in self.support_orbits}

    def residue_at_infinity(self, beta, sigma, gamma):
        """The boundary residue of beta at the local point (sigma, gamma).

        The pair must satisfy sigma gamma^(1/q) sigma^-1 = gamma.  The value
        is psi(rvec(lift)) + alpha(eta) - psi(R eta) with eta the Frobenius
        defect of the section lift of gamma, computed in the sigma-twisted
        Frobenius structure.
        """
        ld = self.lifting
        g = ld.group
        tw_frob = self._twisted(sigma)
        if tw_frob.action(gamma) != gamma:
            raise NonInvariantInput("(sigma, gamma) is not a compatible pair")
        base = ld.coords_of_word([(x, 1) for x in ld.rep_word[gamma]])
        img = ld.frobenius_on_element(base, tw_frob)
        assert img.image == base.image
        eta_tors = tuple((b - i) % d for b, i, d in
                         zip(base.tors, img.tors, ld.torsion))
        eta_free = tuple(b - i for b, i in zip(base.free, img.free))
        rvec_lift = ld.section_rvec[gamma]
        r_eta = ld._coords_apply_r(eta_tors, eta_free)
        value = beta.psi_on(rvec_lift) + beta.alpha_on(eta_tors, eta_free) \
            - beta.psi_on(r_eta)
        return value % 1

    def _twisted(self, sigma):
        if sigma == self.frob.twist:
            return self.frob
        return FrobeniusStructure(self.lifting.group, self.frob.q, twist=sigma)

    # -- obstruction criterion ------------------------------------------------------

    def obstruction_sum(self, beta, nbar, gamma, sigma=None):
        ld = self.lifting
        sigma = ld.group.identity if sigma is None else sigma
        perm = self.frob.class_perm
        total = self.residue_at_infinity(beta, sigma, gamma)
        seen = set()
        for cid, cnt in nbar.items():
            if not cnt:
                continue
            if nbar.get(perm[cid], 0) != cnt:
                raise NonInvariantInput("multidegree is not Frobenius-invariant")
            oid = self.frob.orbit_of_class[cid]
            if oid in seen:
                continue
            seen.add(oid)
            total += cnt * self.residue(beta, oid)
        return total % 1

    def obstruction_vanishes(self, beta, nbar, gamma, sigma=None):
        return self.obstruction_sum(beta, nbar, gamma, sigma) == 0

    def criterion_all(self, nbar, gamma, sigma=None):
        """True iff the obstruction sum vanishes for every enumerated beta."""
        return all(self.obstruction_vanishes(b, nbar, gamma, sigma)
                   for b in self.elements)

    # -- subsets ---------------------------------------------------------------------

    def subset_mask(self, weight, ell):
        """Mask of elements in Br_{C_f, ell}: residues on the minimal locus
        restrict to ell."""
        ell = Fraction(ell) % 1
        mask = []
        for beta in self.elements:
            ok = True
            for oid in weight.minimal_orbits:
                deg = self.frob.deg(oid)
                if self.residue(beta, oid) != (deg * ell) % 1:
                    ok = False
                    break
            mask.append(ok)
        return mask

    def unramified_mask(self):
        """Elements with vanishing residue on every orbit of C."""
        mask = []
        for beta in self.elements:
            mask.append(all(self.residue(beta, oid) == 0
                            for oid in self.support_orbits))
        return mask

    def to_json(self):
        return {
            "order": len(self.elements),
            "invariant_factors": list(self.subquotient.factors),
            "modulus": self.modulus,
            "elements": [b.to_json() for b in self.elements],
            "residues": [{str(oid): str(self.residue(b, oid))
                          for oid in self.support_orbits}
                         for b in self.elements],
        }


def enumerate_brauer(lifting, frob):
    """Complete list of reduced (alpha, psi) representatives with addition."""
    return BrauerGroup(lifting, frob)
