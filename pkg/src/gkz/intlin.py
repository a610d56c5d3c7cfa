"""Exact integer and rational linear algebra on plain Python ints and Fractions.

Matrices are tuples of row tuples; everything is pure and exact.  The three
workhorses are the row-style Hermite form (with its unimodular left factor),
the Smith form (with both unimodular factors), and rational Gaussian
elimination.  Saturated kernels and finite quotient enumeration are built on
top of those.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd
from typing import Optional, Sequence

from .errors import ConfigurationError, InfiniteIndexError

Vector = tuple
Matrix = tuple


def mat(rows) -> Matrix:
    """Normalize nested sequences into an integer matrix (tuple of tuples)."""
    out = tuple(tuple(int(x) for x in row) for row in rows)
    if not out or not out[0]:
        raise ValueError("matrix dimensions must be positive")
    width = len(out[0])
    if any(len(row) != width for row in out):
        raise ValueError("ragged matrix")
    return out


def identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def transpose(M: Matrix) -> Matrix:
    return tuple(zip(*M))


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    Bt = list(zip(*B))
    return tuple(
        tuple(sum(a * b for a, b in zip(row, col)) for col in Bt) for row in A
    )


def mat_vec(M: Matrix, v: Sequence) -> Vector:
    return tuple(sum(m * x for m, x in zip(row, v)) for row in M)


def vec_mat(v: Sequence, M: Matrix) -> Vector:
    cols = list(zip(*M))
    return tuple(sum(x * c for x, c in zip(v, col)) for col in cols)


def dot(u: Sequence, v: Sequence) -> object:
    return sum(a * b for a, b in zip(u, v))


def vec_primitive(v: Sequence[int]) -> Vector:
    """Divide out the content; orient so the first nonzero entry is positive."""
    g = 0
    for x in v:
        g = gcd(g, x)
    if g == 0:
        return tuple(v)
    w = [x // g for x in v]
    for x in w:
        if x != 0:
            if x < 0:
                w = [-y for y in w]
            break
    return tuple(w)


def det(M: Matrix) -> int:
    """Integer determinant via fraction-free (Bareiss) elimination."""
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("determinant needs a square matrix")
    A = [list(row) for row in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            pivot = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if pivot is None:
                return 0
            A[k], A[pivot] = A[pivot], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def hermite_normal_form(M: Matrix) -> tuple[Matrix, Matrix]:
    """Row-style Hermite form.

    Returns (H, U) with U unimodular and U*M == H.  H is in row echelon form
    with positive pivots and entries above each pivot reduced into [0, pivot).
    """
    M = mat(M)
    n, m = len(M), len(M[0])
    H = [list(row) for row in M]
    U = [list(row) for row in identity(n)]

    def addmul(dst, src, q):
        H[dst] = [a - q * b for a, b in zip(H[dst], H[src])]
        U[dst] = [a - q * b for a, b in zip(U[dst], U[src])]

    def swap(i, j):
        H[i], H[j] = H[j], H[i]
        U[i], U[j] = U[j], U[i]

    def negate(i):
        H[i] = [-a for a in H[i]]
        U[i] = [-a for a in U[i]]

    pr = 0
    for pc in range(m):
        while True:
            nz = [i for i in range(pr, n) if H[i][pc] != 0]
            if not nz:
                break
            best = min(nz, key=lambda i: (abs(H[i][pc]), i))
            if best != pr:
                swap(pr, best)
            done = True
            for i in range(pr + 1, n):
                if H[i][pc] != 0:
                    addmul(i, pr, H[i][pc] // H[pr][pc])
                    if H[i][pc] != 0:
                        done = False
            if done:
                break
        if pr < n and H[pr][pc] != 0:
            if H[pr][pc] < 0:
                negate(pr)
            p = H[pr][pc]
            for i in range(pr):
                q = H[i][pc] // p
                if q:
                    addmul(i, pr, q)
            pr += 1
            if pr == n:
                break
    return tuple(tuple(r) for r in H), tuple(tuple(r) for r in U)


def smith_normal_form(M: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """Smith form: returns (S, U, V) with U*M*V == S diagonal, d_i | d_{i+1}."""
    M = mat(M)
    n, m = len(M), len(M[0])
    S = [list(row) for row in M]
    U = [list(row) for row in identity(n)]
    V = [list(row) for row in identity(m)]

    def row_add(dst, src, q):
        S[dst] = [a - q * b for a, b in zip(S[dst], S[src])]
        U[dst] = [a - q * b for a, b in zip(U[dst], U[src])]

    def col_add(dst, src, q):
        for row in S:
            row[dst] -= q * row[src]
        for row in V:
            row[dst] -= q * row[src]

    def row_swap(i, j):
        S[i], S[j] = S[j], S[i]
        U[i], U[j] = U[j], U[i]

    def col_swap(i, j):
        for row in S:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    t = 0
    while t < min(n, m):
        entries = [
            (abs(S[i][j]), i, j)
            for i in range(t, n)
            for j in range(t, m)
            if S[i][j] != 0
        ]
        if not entries:
            break
        _, pi, pj = min(entries)
        if pi != t:
            row_swap(t, pi)
        if pj != t:
            col_swap(t, pj)
        while True:
            moved = False
            for i in range(t + 1, n):
                if S[i][t] != 0:
                    q = S[i][t] // S[t][t]
                    row_add(i, t, q)
                    if S[i][t] != 0:
                        row_swap(t, i)
                        moved = True
            for j in range(t + 1, m):
                if S[t][j] != 0:
                    q = S[t][j] // S[t][t]
                    col_add(j, t, q)
                    if S[t][j] != 0:
                        col_swap(t, j)
                        moved = True
            if not moved and all(S[i][t] == 0 for i in range(t + 1, n)) and all(
                S[t][j] == 0 for j in range(t + 1, m)
            ):
                # pivot must divide the rest of the submatrix
                bad = next(
                    (
                        (i, j)
                        for i in range(t + 1, n)
                        for j in range(t + 1, m)
                        if S[i][j] % S[t][t] != 0
                    ),
                    None,
                )
                if bad is None:
                    break
                row_add(t, bad[0], -1)
        if S[t][t] < 0:
            S[t] = [-a for a in S[t]]
            U[t] = [-a for a in U[t]]
        t += 1
    return (
        tuple(tuple(r) for r in S),
        tuple(tuple(r) for r in U),
        tuple(tuple(r) for r in V),
    )


def rational_inverse(M: Matrix) -> tuple:
    """Exact inverse over the rationals; raises ValueError when singular."""
    n = len(M)
    A = [[Fraction(M[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if A[i][col] != 0), None)
        if pivot is None:
            raise ValueError("matrix is singular")
        A[col], A[pivot] = A[pivot], A[col]
        d = A[col][col]
        A[col] = [x / d for x in A[col]]
        for i in range(n):
            if i != col and A[i][col] != 0:
                f = A[i][col]
                A[i] = [x - f * y for x, y in zip(A[i], A[col])]
    return tuple(tuple(row[n:]) for row in A)


def solve_rational(M: Matrix, rhs: Sequence) -> Optional[tuple]:
    """One exact solution of M x = rhs (free variables set to 0), or None."""
    rows, cols = len(M), len(M[0])
    A = [[Fraction(M[i][j]) for j in range(cols)] + [Fraction(rhs[i])] for i in range(rows)]
    pivots = []
    pr = 0
    for pc in range(cols):
        pivot = next((i for i in range(pr, rows) if A[i][pc] != 0), None)
        if pivot is None:
            continue
        A[pr], A[pivot] = A[pivot], A[pr]
        d = A[pr][pc]
        A[pr] = [x / d for x in A[pr]]
        for i in range(rows):
            if i != pr and A[i][pc] != 0:
                f = A[i][pc]
                A[i] = [x - f * y for x, y in zip(A[i], A[pr])]
        pivots.append(pc)
        pr += 1
        if pr == rows:
            break
    for i in range(pr, rows):
        if A[i][cols] != 0:
            return None
    x = [Fraction(0)] * cols
    for k, pc in enumerate(pivots):
        x[pc] = A[k][cols]
    return tuple(x)


def rational_rank(M: Matrix) -> int:
    H, _ = hermite_normal_form(M)
    return sum(1 for row in H if any(row))


@dataclass(frozen=True)
class LatticeBasis:
    """Basis of a saturated sublattice of Z^ambient_dim, one vector per row."""

    ambient_dim: int
    vectors: tuple

    @property
    def rank(self) -> int:
        return len(self.vectors)

    def contains(self, v: Sequence[int]) -> bool:
        c = self.coordinates(v)
        return c is not None and all(x.denominator == 1 for x in c)

    def coordinates(self, v: Sequence) -> Optional[tuple]:
        """Rational coordinates of v in this basis, or None if outside the span."""
        if self.rank == 0:
            return () if all(x == 0 for x in v) else None
        M = transpose(self.vectors)
        return solve_rational(M, v)


def integer_kernel(A: Matrix) -> LatticeBasis:
    """Saturated integer kernel {l : A l = 0} of an r x N integer matrix.

    The rows of the unimodular factor of HNF(A^T) that map to zero rows form
    a basis; since the factor is unimodular the basis is automatically
    saturated.  The basis is canonicalized by a final Hermite reduction.
    """
    A = mat(A)
    r, N = len(A), len(A[0])
    H, U = hermite_normal_form(transpose(A))
    rank = sum(1 for row in H if any(row))
    if rank < r:
        raise ConfigurationError("spanning", "matrix is rank-deficient over the rationals")
    kernel_rows = [U[i] for i in range(N) if not any(H[i])]
    if not kernel_rows:
        return LatticeBasis(N, ())
    K, _ = hermite_normal_form(kernel_rows)
    vectors = tuple(row for row in K if any(row))
    return LatticeBasis(N, vectors)


@dataclass(frozen=True)
class CosetReps:
    """Coset representatives of Z^ambient_dim modulo a full-rank sublattice."""

    ambient_dim: int
    divisors: tuple
    reps: tuple

    @property
    def index(self) -> int:
        return len(self.reps)


def coset_representatives(basis_rows: Sequence[Sequence[int]], ambient_dim: Optional[int] = None) -> CosetReps:
    """Enumerate Z^m / Lambda for the sublattice spanned by the given rows.

    Uses the Smith form: with U*B*V = D the map x -> x*V carries the
    sublattice onto the diagonal lattice, so residue tuples below the
    divisors pull back through V^-1 to representatives.
    """
    if not basis_rows:
        if ambient_dim in (None, 0):
            return CosetReps(0, (), ((),))
        raise InfiniteIndexError("empty basis of a positive-dimensional ambient lattice")
    B = mat(basis_rows)
    m = len(B[0])
    H, _ = hermite_normal_form(B)
    nz = [row for row in H if any(row)]
    if len(nz) < m:
        raise InfiniteIndexError(f"sublattice has rank {len(nz)} < ambient dimension {m}")
    S, U, V = smith_normal_form(mat(nz))
    divisors = tuple(S[i][i] for i in range(m))
    Vinv_frac = rational_inverse(V)
    Vinv = tuple(tuple(int(x) for x in row) for row in Vinv_frac)
    reps = tuple(vec_mat(t, Vinv) for t in product(*[range(d) for d in divisors]))
    return CosetReps(m, divisors, reps)
