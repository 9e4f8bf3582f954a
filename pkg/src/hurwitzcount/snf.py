"""Exact integer matrix normal forms.

Everything here works on plain lists of Python ints, so all arithmetic is
arbitrary precision.  Matrices are row-major: ``M[i][j]``.  The central
routine is :func:`smith_normal_form`, which returns the diagonal form
together with the unimodular row/column transforms; the helpers built on
top of it (cokernel presentations, lattice membership, kernels, solving
modulo invariant factors) are what the rest of the package actually uses.
"""

from __future__ import annotations

from fractions import Fraction


def identity_matrix(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    n, k = len(a), len(b)
    m = len(b[0]) if b else 0
    bt = [[b[r][c] for r in range(k)] for c in range(m)]
    return [[sum(ra[i] * col[i] for i in range(k)) for col in bt] for ra in a]


def mat_vec(m, v):
    return [sum(row[i] * v[i] for i in range(len(v))) for row in m]


def vec_mat(v, m):
    cols = len(m[0]) if m else 0
    return [sum(v[i] * m[i][j] for i in range(len(v))) for j in range(cols)]


def _swap_rows(m, i, j):
    m[i], m[j] = m[j], m[i]


def _swap_cols(m, i, j):
    for row in m:
        row[i], row[j] = row[j], row[i]


def _add_row(m, src, dst, c):
    # dst += c * src
    row_s, row_d = m[src], m[dst]
    for k in range(len(row_d)):
        row_d[k] += c * row_s[k]


def _add_col(m, src, dst, c):
    for row in m:
        row[dst] += c * row[src]


def _negate_row(m, i):
    m[i] = [-x for x in m[i]]


def _negate_col(m, j):
    for row in m:
        row[j] = -row[j]


def smith_normal_form(mat):
    """Return (D, U, V, rank) with U*mat*V = D in Smith normal form.

    D has the same shape as ``mat`` with nonnegative diagonal entries
    d_1 | d_2 | ... ; U and V are unimodular.
    """
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    d = [list(r) for r in mat]
    u = identity_matrix(rows)
    v = identity_matrix(cols)
    if rows == 0 or cols == 0:
        return d, u, v, 0

    def pivot_search(s):
        best = None
        for i in range(s, rows):
            for j in range(s, cols):
                x = d[i][j]
                if x != 0 and (best is None or abs(x) < abs(d[best[0]][best[1]])):
                    best = (i, j)
        return best

    s = 0
    while s < min(rows, cols):
        pos = pivot_search(s)
        if pos is None:
            break
        i, j = pos
        if i != s:
            _swap_rows(d, s, i)
            _swap_rows(u, s, i)
        if j != s:
            _swap_cols(d, s, j)
            _swap_cols(v, s, j)
        if d[s][s] < 0:
            _negate_row(d, s)
            _negate_row(u, s)

        dirty = False
        for i in range(s + 1, rows):
            if d[i][s] != 0:
                q = d[i][s] // d[s][s]
                _add_row(d, s, i, -q)
                _add_row(u, s, i, -q)
                if d[i][s] != 0:
                    dirty = True
        for j in range(s + 1, cols):
            if d[s][j] != 0:
                q = d[s][j] // d[s][s]
                _add_col(d, s, j, -q)
                _add_col(v, s, j, -q)
                if d[s][j] != 0:
                    dirty = True
        if dirty:
            continue

        # Pivot divides its whole row/column; enforce divisibility of the
        # remaining block before moving on.
        offender = None
        for i in range(s + 1, rows):
            for j in range(s + 1, cols):
                if d[i][j] % d[s][s] != 0:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            _add_row(d, offender, s, 1)
            _add_row(u, offender, s, 1)
            continue
        s += 1

    rank = sum(1 for i in range(min(rows, cols)) if d[i][i] != 0)
    return d, u, v, rank


def invariant_factors(mat):
    """Nontrivial invariant factors (>1) plus the free rank of the cokernel.

    Returns (factors, free_rank) for the abelian group
    Z^cols / rowspace(mat).
    """
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    if rows == 0:
        return [], cols
    d, _, _, rank = smith_normal_form(mat)
    factors = [d[i][i] for i in range(rank) if d[i][i] > 1]
    return factors, cols - rank


class CokernelPresentation:
    """The abelian group Z^n / L where L is the row lattice of a matrix.

    Coordinates split into torsion components (moduli in ``torsion``) and
    free components; ``coords`` maps an integer vector to its class.
    """

    def __init__(self, mat, n=None):
        if n is None:
            n = len(mat[0]) if mat else 0
        self.n = n
        if not mat:
            mat = [[0] * n]
        d, _, v, rank = smith_normal_form(mat)
        self._v = v
        diag = [d[i][i] for i in range(rank)]
        # columns of the new coordinate system: x -> x * V
        self.torsion = [diag[i] for i in range(rank) if diag[i] > 1]
        self._tors_idx = [i for i in range(rank) if diag[i] > 1]
        self._free_idx = list(range(rank, n))
        self.free_rank = n - rank

    def coords(self, vec):
        """Class of ``vec``: (torsion tuple, free tuple)."""
        w = vec_mat(vec, self._v)
        tors = tuple(w[i] % self.torsion[k] for k, i in enumerate(self._tors_idx))
        free = tuple(w[i] for i in self._free_idx)
        return tors, free

    def lift(self, tors, free):
        """An integer vector in Z^n representing the given class."""
        w = [0] * self.n
        for k, i in enumerate(self._tors_idx):
            w[i] = tors[k]
        for k, i in enumerate(self._free_idx):
            w[i] = free[k]
        vinv = invert_unimodular(self._v)
        return vec_mat(w, vinv)


def invert_unimodular(m):
    """Exact inverse of a unimodular integer matrix."""
    n = len(m)
    aug = [[Fraction(m[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
           for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    out = []
    for i in range(n):
        row = []
        for j in range(n, 2 * n):
            x = aug[i][j]
            if x.denominator != 1:
                raise ValueError("matrix is not unimodular")
            row.append(int(x))
        out.append(row)
    return out


def row_lattice_contains(mat, vec):
    """Whether ``vec`` lies in the lattice spanned by the rows of ``mat``."""
    if not mat:
        return all(x == 0 for x in vec)
    d, _, v, rank = smith_normal_form(mat)
    w = vec_mat(vec, v)
    for i in range(len(w)):
        if i < rank:
            if w[i] % d[i][i] != 0:
                return False
        elif w[i] != 0:
            return False
    return True


def solve_integer(mat, target):
    """Solve x * mat = target over Z; returns one solution or None.

    ``mat`` is m x n, ``target`` length n, solution length m.
    """
    if not mat:
        return None if any(target) else []
    m = len(mat)
    d, u, v, rank = smith_normal_form(mat)
    w = vec_mat(target, v)
    y = [0] * m
    for i in range(len(w)):
        if i < rank:
            if w[i] % d[i][i] != 0:
                return None
            y[i] = w[i] // d[i][i]
        elif w[i] != 0:
            return None
    return vec_mat(y, u)


def kernel_basis(mat):
    """Basis (list of rows) of {x in Z^m : x * mat = 0} for an m x n matrix."""
    m = len(mat)
    if m == 0:
        return []
    d, u, _, rank = smith_normal_form(mat)
    return [u[i] for i in range(rank, m)]


def solve_mod(mat, moduli, target):
    """Solve sum_j M[i][j] * x[j] = target[i]  (mod moduli[i]) for all rows i.

    Unknowns x are integers (solutions differ by the solution lattice).
    Returns (solution vector or None, number of solutions modulo the
    column moduli) when ``col_moduli`` is given through ``moduli`` rows.

    This low-level form treats each congruence row with its own modulus by
    adding slack columns; used by the torsor and Brauer machinery.
    """
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    # Augment: [M | diag(moduli)] * (x ; k) = target over Z.
    aug = [list(mat[i]) + [moduli[i] if j == i else 0 for j in range(rows)]
           for i in range(rows)]
    # Solve aug * z = target with z length cols + rows (column-vector form):
    # transpose to reuse solve_integer (row-vector convention).
    tmat = [[aug[i][j] for i in range(rows)] for j in range(cols + rows)]
    sol = solve_integer(tmat, target)
    if sol is None:
        return None
    return sol[:cols]
