"""Polyhedral structure of homogeneous integer point configurations.

A configuration is a finite list of integer column vectors spanning Z^r that
all lie on an integral hyperplane h = 1.  This module computes facet forms of
the positive hull, normalized volumes, regular (lower-hull) triangulations,
summation-sector geometry for series supports, and the saturation shift used
by the operator-rewriting layer.  All arithmetic is exact; floats never enter.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Optional, Sequence

from . import intlin
from .errors import (
    ConfigurationError,
    GenericityError,
    InconclusiveSearchError,
    InternalConsistencyError,
)

Simplex = tuple  # sorted tuple of 0-based column indices
FacetForm = tuple  # primitive integer linear form on Z^r


@dataclass(frozen=True)
class PointConfig:
    """Columns a_1..a_N in Z^r together with the homogeneity form h."""

    columns: tuple
    h: tuple

    @property
    def r(self) -> int:
        return len(self.columns[0])

    @property
    def N(self) -> int:
        return len(self.columns)

    def matrix(self) -> intlin.Matrix:
        """The r x N matrix whose columns are the configuration points."""
        return intlin.transpose(self.columns)

    def h_value(self, v: Sequence) -> object:
        return intlin.dot(self.h, v)


def point_config(columns) -> PointConfig:
    """Validate and build a configuration from a list of integer r-vectors.

    Checks the two defining conditions and names the failed one:
      spanning     the columns generate Z^r as a group (all Smith divisors 1);
      homogeneity  some integer linear form takes the value 1 on every column.
    """
    cols = intlin.mat(columns)
    r = len(cols[0])
    N = len(cols)
    if N < r:
        raise ConfigurationError("spanning", f"{N} points cannot span Z^{r}")
    A = intlin.transpose(cols)
    S, _, _ = intlin.smith_normal_form(A)
    divisors = [S[i][i] for i in range(r)]
    if any(d != 1 for d in divisors):
        raise ConfigurationError(
            "spanning", f"columns generate a proper subgroup of Z^{r} (divisors {divisors})"
        )
    h = intlin.solve_rational(cols, [1] * N)
    if h is None:
        raise ConfigurationError("homogeneity", "no linear form takes the value 1 on every column")
    if any(x.denominator != 1 for x in h):
        raise ConfigurationError("homogeneity", "homogeneity form is not integral")
    return PointConfig(cols, tuple(int(x) for x in h))


def point_config_from_matrix(rows) -> PointConfig:
    """Build a configuration from the r x N matrix (rows of coordinates)."""
    return point_config(intlin.transpose(intlin.mat(rows)))


def kernel_lattice(cfg: PointConfig) -> intlin.LatticeBasis:
    """Saturated lattice of integer relations among the columns."""
    return intlin.integer_kernel(cfg.matrix())


def facet_forms(cfg: PointConfig) -> tuple:
    """Primitive facet forms of the positive hull, sorted lexicographically.

    Brute force over (r-1)-subsets of columns: each spanning subset
    determines a primitive normal, kept when all columns lie on one side.
    """
    r, N = cfg.r, cfg.N
    found = set()
    if r == 1:
        sgn = 1 if cfg.columns[0][0] > 0 else -1
        return ((sgn,),)
    for subset in combinations(range(N), r - 1):
        M = intlin.mat([cfg.columns[i] for i in subset])
        if intlin.rational_rank(M) != r - 1:
            continue
        normal = _primitive_kernel_vector(M)
        values = [intlin.dot(normal, a) for a in cfg.columns]
        if all(v >= 0 for v in values):
            found.add(normal)
        elif all(v <= 0 for v in values):
            found.add(tuple(-x for x in normal))
    return tuple(sorted(found))


def _primitive_kernel_vector(M) -> tuple:
    """Primitive generator of the one-dimensional kernel {x : M x = 0}."""
    H, U = intlin.hermite_normal_form(intlin.transpose(M))
    rows = [U[i] for i in range(len(U)) if not any(H[i])]
    if len(rows) != 1:
        raise InternalConsistencyError("expected a one-dimensional kernel")
    return intlin.vec_primitive(rows[0])


def deep_face_vector(cfg: PointConfig, form: Sequence[int]) -> tuple:
    """Sum of the columns lying on the given facet; interior to that face."""
    cols = [a for a in cfg.columns if intlin.dot(form, a) == 0]
    if not cols:
        raise ValueError("form vanishes on no column")
    return tuple(sum(x) for x in zip(*cols))


@dataclass(frozen=True)
class Triangulation:
    """A set of maximal simplices (index tuples), with the inducing heights."""

    simplices: tuple
    heights: Optional[tuple] = None

    def __iter__(self):
        return iter(self.simplices)

    def __len__(self):
        return len(self.simplices)


def _lower_hull_cells(columns, heights) -> tuple:
    """Exact lower-hull simplices of the lifted configuration.

    A simplex J is a cell iff the unique linear form matching the heights on
    J stays strictly below the heights off J.  A weak tie means the supporting
    face is not a simplex, which is reported as non-generic.
    """
    N = len(columns)
    r = len(columns[0])
    cells = []
    for J in combinations(range(N), r):
        M = intlin.mat([columns[j] for j in J])
        if intlin.det(M) == 0:
            continue
        phi = intlin.solve_rational(M, [heights[j] for j in J])
        values = [intlin.dot(phi, a) for a in columns]
        ties = [i for i in range(N) if i not in J and values[i] == heights[i]]
        if all(values[i] <= heights[i] for i in range(N) if i not in J):
            if ties:
                raise GenericityError(
                    f"heights are degenerate: cell {tuple(j + 1 for j in J)} "
                    f"extends to points {tuple(i + 1 for i in ties)}"
                )
            cells.append(J)
    return tuple(cells)


def regular_triangulation(cfg: PointConfig, heights) -> Triangulation:
    heights = tuple(Fraction(x) for x in heights)
    if len(heights) != cfg.N:
        raise ValueError(f"expected {cfg.N} heights, got {len(heights)}")
    cells = _lower_hull_cells(cfg.columns, heights)
    if not cells:
        raise GenericityError("no full-dimensional lower cells; configuration degenerate")
    return Triangulation(tuple(sorted(cells)), heights)


def some_regular_triangulation(cfg: PointConfig) -> Triangulation:
    """Deterministic generic triangulation: first moment-curve heights that work."""
    for t in (2, 3, 5, 7, 11, 13, 17, 19):
        try:
            return regular_triangulation(cfg, [t ** i for i in range(cfg.N)])
        except GenericityError:
            continue
    raise GenericityError("no generic height vector found in the standard family")


def simplex_volume(cfg: PointConfig, J: Sequence[int]) -> int:
    return abs(intlin.det(intlin.mat([cfg.columns[j] for j in J])))


def normalized_volume(cfg: PointConfig, points: Optional[Sequence[int]] = None) -> int:
    """Normalized volume of the hull of a subset of columns (default: all).

    A simplex contributes |det|; anything larger is summed over the cells of
    a generic lower-hull triangulation of the sub-configuration.  The value
    is triangulation-independent, which the tests exercise separately.
    """
    idx = tuple(range(cfg.N)) if points is None else tuple(points)
    cols = [cfg.columns[i] for i in idx]
    r = cfg.r
    if intlin.rational_rank(intlin.mat(cols)) < r:
        return 0
    if len(cols) == r:
        return abs(intlin.det(intlin.mat(cols)))
    for t in (2, 3, 5, 7, 11, 13, 17, 19, 23):
        try:
            cells = _lower_hull_cells(cols, [t ** i for i in range(len(cols))])
        except GenericityError:
            continue
        return sum(abs(intlin.det(intlin.mat([cols[j] for j in J]))) for J in cells)
    raise GenericityError("no generic height vector found for volume computation")


def is_pyramid(cfg: PointConfig, lattice: Optional[intlin.LatticeBasis] = None) -> Optional[int]:
    """Smallest apex index (0-based), or None.

    A column is an apex exactly when every relation vanishes on it, i.e. the
    configuration is a pyramid over the remaining points.
    """
    basis = lattice if lattice is not None else kernel_lattice(cfg)
    for i in range(cfg.N):
        if all(v[i] == 0 for v in basis.vectors):
            return i
    return None


def _sector_rays(cfg: PointConfig, basis: intlin.LatticeBasis, I: Sequence[int]) -> tuple:
    """Extreme rays of {l in L x R : l_i >= 0 for i in I}, as primitive l-vectors.

    The complement of I indexes an independent column set, so the projection
    of the relation space to the I coordinates is a square isomorphism and
    the sector cone is simplicial: its rays are the inverse images of the
    coordinate rays.
    """
    d = basis.rank
    I = tuple(sorted(I))
    if len(I) != d:
        raise ValueError(f"sector index set must have size {d}")
    if d == 0:
        return ()
    M = intlin.mat([[v[i] for i in I] for v in basis.vectors])
    if intlin.det(M) == 0:
        raise GenericityError("degenerate sector: projected relation basis is singular")
    Minv = intlin.rational_inverse(M)
    rays = []
    for k in range(d):
        # coefficient rows c with c * M = e_k are the rows of M^{-1}
        c = list(Minv[k])
        denom = 1
        for x in c:
            denom = denom * x.denominator // _gcd(denom, x.denominator)
        c_int = [int(x * denom) for x in c]
        l = intlin.vec_mat(c_int, intlin.mat(basis.vectors))
        # divide out the content but keep the orientation: these are rays
        g = 0
        for x in l:
            g = _gcd(g, x)
        rays.append(tuple(x // g for x in l))
    return tuple(rays)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def is_convergence_direction(
    cfg: PointConfig,
    rho: Sequence,
    I: Sequence[int],
    lattice: Optional[intlin.LatticeBasis] = None,
) -> bool:
    """Whether rho grows along every nonzero relation in the sector over I."""
    basis = lattice if lattice is not None else kernel_lattice(cfg)
    rho = tuple(Fraction(x) for x in rho)
    rays = _sector_rays(cfg, basis, I)
    return all(intlin.dot(rho, ray) > 0 for ray in rays)


def triangulation_from_direction(
    cfg: PointConfig,
    rho: Sequence,
    lattice: Optional[intlin.LatticeBasis] = None,
) -> Triangulation:
    """Regular triangulation induced by rho-as-heights, cross-validated.

    Every simplex of the result must accept rho as a convergence direction
    for its sector, and every nonsimplex must reject it; a mismatch is an
    internal error, not bad input.
    """
    basis = lattice if lattice is not None else kernel_lattice(cfg)
    T = regular_triangulation(cfg, rho)
    members = set(T.simplices)
    for J in combinations(range(cfg.N), cfg.r):
        if intlin.det(intlin.mat([cfg.columns[j] for j in J])) == 0:
            continue
        I = tuple(i for i in range(cfg.N) if i not in J)
        ok = is_convergence_direction(cfg, rho, I, lattice=basis)
        if ok != (J in members):
            raise InternalConsistencyError(
                f"direction/triangulation mismatch at simplex {tuple(j + 1 for j in J)}"
            )
    return T


def saturation_point(
    cfg: PointConfig, lattice: Optional[intlin.LatticeBasis] = None
) -> tuple:
    """A shift p = delta * (a_1 + ... + a_N) deep enough for factorization.

    delta bounds the distance from any real relation vector to the relation
    lattice in the sup norm: rounding coordinates in the fixed basis moves
    each coordinate i by at most half the column sum of |b_{j,i}|.
    Returns (p, delta).
    """
    basis = lattice if lattice is not None else kernel_lattice(cfg)
    delta = 0
    for i in range(cfg.N):
        s = sum(abs(v[i]) for v in basis.vectors)
        delta = max(delta, -(-s // 2))
    p = tuple(delta * sum(col[k] for col in cfg.columns) for k in range(cfg.r))
    return p, delta


def nonneg_representation(
    cfg: PointConfig,
    target: Sequence[int],
    node_budget: int = 500_000,
    facets: Optional[tuple] = None,
) -> Optional[tuple]:
    """Nonnegative integer combination of the columns equal to target, or None.

    Complete at this scale: homogeneity pins the coefficient sum to h(target),
    so the search tree is finite.  Branches are pruned by facet positivity of
    the running remainder.  Exceeding the node budget raises instead of
    guessing.
    """
    target = tuple(int(x) for x in target)
    total = cfg.h_value(target)
    if total < 0:
        return None
    forms = facets if facets is not None else facet_forms(cfg)
    budget = [node_budget]

    def feasible(rem, rem_total):
        if rem_total < 0:
            return False
        return all(intlin.dot(f, rem) >= 0 for f in forms)

    def search(idx, rem, rem_total, acc):
        budget[0] -= 1
        if budget[0] < 0:
            raise InconclusiveSearchError("representation search exceeded its node budget")
        if rem_total == 0:
            if all(x == 0 for x in rem):
                return tuple(acc) + (0,) * (cfg.N - idx)
            return None
        if idx == cfg.N:
            return None
        col = cfg.columns[idx]
        if idx == cfg.N - 1:
            # last column must absorb the full remainder
            c = rem_total
            if all(rem_k == c * col_k for rem_k, col_k in zip(rem, col)):
                return tuple(acc + [c])
            return None
        for c in range(rem_total + 1):
            new_rem = tuple(rem_k - c * col_k for rem_k, col_k in zip(rem, col))
            if feasible(new_rem, rem_total - c):
                hit = search(idx + 1, new_rem, rem_total - c, acc + [c])
                if hit is not None:
                    return hit
        return None

    if not feasible(target, total):
        return None
    return search(0, target, total, [])


def supp_membership(
    cfg: PointConfig,
    T: Triangulation,
    l: Sequence[int],
    lattice: Optional[intlin.LatticeBasis] = None,
) -> bool:
    """Whether l lies in the convex closure of the union of sector cones of T."""
    basis = lattice if lattice is not None else kernel_lattice(cfg)
    d = basis.rank
    coords = basis.coordinates(l)
    if coords is None:
        return False
    rays_c = []
    for J in T.simplices:
        I = tuple(i for i in range(cfg.N) if i not in J)
        for ray in _sector_rays(cfg, basis, I):
            c = basis.coordinates(ray)
            rays_c.append(tuple(c))
    rays_c = sorted(set(rays_c))
    if d == 0 or not rays_c:
        return all(x == 0 for x in coords)
    return _cone_contains(rays_c, coords)


def _cone_contains(rays, x) -> bool:
    """Exact membership of x in the cone generated by the given rays.

    Works inside the linear span of the rays: outside the span is outside the
    cone; within it, membership is checked against all supporting facet
    normals found by brute force over (dim-1)-subsets of rays.  No facet
    normals at all means the rays positively span their space.
    """
    span_basis = _row_space_basis(rays)
    sdim = len(span_basis)
    if sdim == 0:
        return all(v == 0 for v in x)
    M = intlin.transpose(intlin.mat(span_basis))
    x_s = intlin.solve_rational(M, x)
    if x_s is None:
        return False
    rays_s = []
    for ray in rays:
        c = intlin.solve_rational(M, ray)
        if c is None:
            raise InternalConsistencyError("ray outside the joint ray span")
        m = _lcm_denoms(c)
        rays_s.append(tuple(int(v * m) for v in c))
    if sdim == 1:
        pos = any(r[0] > 0 for r in rays_s)
        neg = any(r[0] < 0 for r in rays_s)
        if pos and neg:
            return True
        return x_s[0] >= 0 if pos else x_s[0] <= 0
    facet_normals = set()
    for subset in combinations(range(len(rays_s)), sdim - 1):
        sub = intlin.mat([rays_s[i] for i in subset])
        if intlin.rational_rank(sub) != sdim - 1:
            continue
        H, U = intlin.hermite_normal_form(intlin.transpose(sub))
        normals = [U[i] for i in range(len(U)) if not any(H[i])]
        if len(normals) != 1:
            continue
        n = intlin.vec_primitive(normals[0])
        vals = [intlin.dot(n, r) for r in rays_s]
        if all(v >= 0 for v in vals):
            facet_normals.add(n)
        elif all(v <= 0 for v in vals):
            facet_normals.add(tuple(-a for a in n))
    return all(intlin.dot(n, x_s) >= 0 for n in facet_normals)


def _lcm_denoms(row) -> int:
    out = 1
    for v in row:
        q = Fraction(v).denominator
        out = out * q // _gcd(out, q)
    return out


def _row_space_basis(rows) -> tuple:
    """Canonical basis of the rational row space (rows may be fractional)."""
    cleaned = []
    for row in rows:
        m = _lcm_denoms(row)
        scaled = tuple(int(Fraction(v) * m) for v in row)
        if any(scaled):
            cleaned.append(scaled)
    if not cleaned:
        return ()
    H, _ = intlin.hermite_normal_form(intlin.mat(cleaned))
    return tuple(row for row in H if any(row))


def cone_facets_of_simplex(cfg: PointConfig, J: Sequence[int]) -> tuple:
    """Facet forms of the simplicial cone over an independent column set J.

    One form per dropped index: the primitive normal of the remaining
    columns, oriented positively on the dropped one.  Returned as
    (dropped_index, form) pairs.
    """
    J = tuple(sorted(J))
    r = cfg.r
    out = []
    for j0 in J:
        rest = [cfg.columns[j] for j in J if j != j0]
        if r == 1:
            n = (1,) if cfg.columns[j0][0] > 0 else (-1,)
            out.append((j0, n))
            continue
        n = _primitive_kernel_vector(intlin.mat(rest))
        v = intlin.dot(n, cfg.columns[j0])
        if v < 0:
            n = tuple(-x for x in n)
        elif v == 0:
            raise InternalConsistencyError("degenerate simplex in cone facet computation")
        out.append((j0, n))
    return tuple(out)
