"""Small exact helpers for integer matrices, lattices and F2 vector spaces.

Matrices are tuples of row tuples of ints; vectors are tuples of ints or Fractions.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form

Mat = tuple[tuple[int, ...], ...]
Vec = tuple


def as_mat(rows: Sequence[Sequence[int]]) -> Mat:
    return tuple(tuple(int(x) for x in r) for r in rows)


def identity(n: int) -> Mat:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def transpose(a: Mat) -> Mat:
    if not a:
        return a
    return tuple(zip(*a))


def mat_mul(a: Mat, b: Mat) -> Mat:
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def mat_vec(a: Mat, v: Vec) -> Vec:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def mat_add(a: Mat, b: Mat) -> Mat:
    return tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(a, b))


def mat_sub(a: Mat, b: Mat) -> Mat:
    return tuple(tuple(x - y for x, y in zip(r, s)) for r, s in zip(a, b))


def dot(u: Vec, v: Vec):
    return sum(x * y for x, y in zip(u, v))


def vadd(u: Vec, v: Vec) -> Vec:
    return tuple(x + y for x, y in zip(u, v))


def vsub(u: Vec, v: Vec) -> Vec:
    return tuple(x - y for x, y in zip(u, v))


def vscale(c, v: Vec) -> Vec:
    return tuple(c * x for x in v)


@lru_cache(maxsize=None)
def mat_inv(a: Mat) -> Mat:
    """Inverse of a unimodular integer matrix."""
    inv = Matrix(a).inv()
    out = []
    for i in range(inv.rows):
        row = []
        for j in range(inv.cols):
            x = inv[i, j]
            if not x.is_integer:
                raise ValueError("matrix is not unimodular")
            row.append(int(x))
        out.append(tuple(row))
    return tuple(out)


def frac_mod1(x: Fraction) -> Fraction:
    x = Fraction(x)
    return x - (x.numerator // x.denominator)


def vec_mod1(v: Vec) -> Vec:
    return tuple(frac_mod1(x) for x in v)


def _echelon(rows: list[list[int]], track: list[list[int]] | None = None):
    """Integer row echelon form by unimodular row operations.

    If ``track`` is given, the same operations are applied to it.
    Returns the number of nonzero rows.
    """
    m = len(rows)
    n = len(rows[0]) if rows else 0
    r = 0
    for c in range(n):
        while True:
            piv = [i for i in range(r, m) if rows[i][c] != 0]
            if not piv:
                break
            p = min(piv, key=lambda i: abs(rows[i][c]))
            rows[r], rows[p] = rows[p], rows[r]
            if track is not None:
                track[r], track[p] = track[p], track[r]
            done = True
            for i in range(r + 1, m):
                if rows[i][c]:
                    f = rows[i][c] // rows[r][c]
                    rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
                    if track is not None:
                        track[i] = [x - f * y for x, y in zip(track[i], track[r])]
                    if rows[i][c]:
                        done = False
            if done:
                break
        if r < m and rows[r][c] != 0:
            if rows[r][c] < 0:
                rows[r] = [-x for x in rows[r]]
                if track is not None:
                    track[r] = [-x for x in track[r]]
            r += 1
    return r


def lattice_basis(vectors: Sequence[Sequence[int]], dim: int) -> list[tuple[int, ...]]:
    """A Z-basis (echelon form) of the lattice spanned by ``vectors``."""
    rows = [list(map(int, v)) for v in vectors if any(v)]
    if not rows:
        return []
    r = _echelon(rows)
    return [tuple(row) for row in rows[:r]]


def int_kernel(a: Mat, ncols: int | None = None) -> list[tuple[int, ...]]:
    """Saturated Z-basis of {x : a x = 0}."""
    n = ncols if ncols is not None else (len(a[0]) if a else 0)
    if not a:
        return [tuple(int(i == j) for j in range(n)) for i in range(n)]
    # row-reduce a^T with identity tracking: rows of the tracker whose image vanishes span the kernel
    rows = [list(col) for col in transpose(a)]
    track = [[int(i == j) for j in range(n)] for i in range(n)]
    r = _echelon(rows, track)
    kern = [tuple(t) for t in track[r:]]
    return lattice_basis(kern, n) if kern else []


def annihilator(vectors: Sequence[Sequence[int]], dim: int) -> list[tuple[int, ...]]:
    """Saturated basis of integer covectors vanishing on every given vector."""
    vs = [tuple(v) for v in vectors if any(v)]
    if not vs:
        return [tuple(int(i == j) for j in range(dim)) for i in range(dim)]
    return int_kernel(as_mat(vs), dim)


def rational_coords(basis: Sequence[Sequence[int]], v: Sequence) -> tuple[Fraction, ...] | None:
    """Coordinates of v in the Q-span of linearly independent ``basis``; None if outside."""
    k = len(basis)
    n = len(v)
    if k == 0:
        return () if not any(v) else None
    # solve sum c_i basis_i = v
    aug = [[Fraction(basis[i][r]) for i in range(k)] + [Fraction(v[r])] for r in range(n)]
    piv_cols = []
    row = 0
    for col in range(k):
        p = next((i for i in range(row, n) if aug[i][col] != 0), None)
        if p is None:
            continue
        aug[row], aug[p] = aug[p], aug[row]
        pv = aug[row][col]
        aug[row] = [x / pv for x in aug[row]]
        for i in range(n):
            if i != row and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[row])]
        piv_cols.append(col)
        row += 1
    for i in range(row, n):
        if aug[i][k] != 0:
            return None
    if len(piv_cols) != k:
        raise ValueError("basis vectors are linearly dependent")
    return tuple(aug[i][k] for i in range(k))


def smith_invariants(a: Sequence[Sequence[int]], nrows: int, ncols: int) -> list[int]:
    """Invariant factors of the cokernel of the integer matrix a (nrows x ncols).

    Free summands are reported as 0.
    """
    if nrows == 0:
        return []
    if ncols == 0 or not a:
        return [0] * nrows
    snf = smith_normal_form(Matrix(a), domain=ZZ)
    diag = [abs(int(snf[i, i])) for i in range(min(nrows, ncols))]
    return diag + [0] * (nrows - len(diag))


# F2 linear algebra on bit tuples


def f2_reduce(vectors: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Basis of the F2-span, in reduced echelon form, deterministic."""
    rows = [[x % 2 for x in v] for v in vectors]
    basis: list[list[int]] = []
    pivots: list[int] = []
    for v in rows:
        v = list(v)
        for b, p in zip(basis, pivots):
            if v[p]:
                v = [(x + y) % 2 for x, y in zip(v, b)]
        if any(v):
            p = v.index(1)
            for i, b in enumerate(basis):
                if b[p]:
                    basis[i] = [(x + y) % 2 for x, y in zip(b, v)]
            basis.append(v)
            pivots.append(p)
    order = sorted(range(len(basis)), key=lambda i: pivots[i])
    return [tuple(basis[i]) for i in order]


def f2_coords(basis: Sequence[Sequence[int]], v: Sequence[int]) -> tuple[int, ...] | None:
    """Coordinates of v in an echelon F2 basis (from f2_reduce); None if outside the span."""
    v = [x % 2 for x in v]
    coords = []
    for b in basis:
        p = list(b).index(1)
        c = v[p]
        coords.append(c)
        if c:
            v = [(x + y) % 2 for x, y in zip(v, b)]
    if any(v):
        return None
    return tuple(coords)


@lru_cache(maxsize=None)
def inv_transpose(a: Mat) -> Mat:
    """(a^-1)^T: how a Weyl matrix on cocharacters acts on characters."""
    return transpose(mat_inv(a))
