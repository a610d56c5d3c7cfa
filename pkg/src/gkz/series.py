"""Truncated power-series solutions attached to simplices of a triangulation.

For a simplex J with complement I, an exponent vector gamma solves
A gamma = alpha with integral entries on I.  The attached series sums
v^(gamma+l) / Gamma(gamma+l+1) over lattice relations l whose I-entries stay
nonnegative; all arithmetic is rational, with coefficients stored relative
to a nonzero base term.  Truncation is measured in the h-degree of the
positive part of the offset, which makes the annihilation checks exact on a
well-defined window.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

from . import geom, intlin
from .errors import (
    DegenerateGammaError,
    InternalConsistencyError,
    PreconditionError,
    ResonanceError,
)
from .system import GkzSystem, is_nonresonant, is_T_nonresonant


@dataclass(frozen=True)
class GammaVector:
    """Exponent vector with its summation sector.

    gamma has integral entries on the sector I; the columns weighted by
    gamma reproduce the system parameter.
    """

    gamma: tuple
    sector: tuple


def h_degree(l: Sequence[int]) -> int:
    """Degree of the positive part of an offset vector."""
    return sum(x for x in l if x > 0)


def _term_key(l) -> tuple:
    return (h_degree(l), l)


def _gamma_ratio(g: Fraction, k: int) -> Fraction:
    """Gamma(g+1)/Gamma(g+k+1) as a finite product of linear factors."""
    if k >= 0:
        out = Fraction(1)
        for m in range(1, k + 1):
            out /= g + m
        return out
    out = Fraction(1)
    for m in range(0, -k):
        out *= g - m
    return out


def gamma_choices(sys: GkzSystem, J: Sequence[int]) -> list:
    """All exponent choices for the simplex J, one per coset of the sector
    projection of the relation lattice.

    The count equals the normalized volume of the simplex.  Representatives
    are shifted along the lattice until their sector entries are
    nonnegative, which keeps every base term and every coefficient ratio
    finite downstream.
    """
    cfg = sys.cfg
    J = tuple(sorted(int(j) for j in J))
    if len(J) != cfg.r or len(set(J)) != len(J):
        raise PreconditionError(f"a simplex needs {cfg.r} distinct column indices")
    A_J = intlin.mat([[cfg.columns[j][i] for j in J] for i in range(cfg.r)])
    delta = abs(intlin.det(A_J))
    if delta == 0:
        raise PreconditionError(f"columns {tuple(j + 1 for j in J)} are linearly dependent")
    I = tuple(j for j in range(cfg.N) if j not in J)
    basis = sys.lattice
    if not I:
        gamma = _solve_simplex_exponent(cfg, J, sys.alpha, (0,) * 0, I)
        return [GammaVector(gamma, I)]
    proj = tuple(tuple(b[i] for i in I) for b in basis.vectors)
    reps = intlin.coset_representatives(proj, ambient_dim=len(I))
    if reps.index != delta:
        raise InternalConsistencyError(
            f"sector projection index {reps.index} disagrees with the simplex volume {delta}"
        )
    out = []
    for t in reps.reps:
        # delta * (1, ..., 1) lies in the projected lattice, so a uniform
        # shift by multiples of delta reaches nonnegative representatives
        shift = 0
        for x in t:
            if x < 0:
                shift = max(shift, (-x + delta - 1) // delta)
        t2 = tuple(x + shift * delta for x in t)
        gamma = _solve_simplex_exponent(cfg, J, sys.alpha, t2, I)
        out.append(GammaVector(gamma, I))
    return out


def _solve_simplex_exponent(cfg, J, alpha, t, I) -> tuple:
    rhs = [
        Fraction(a) - sum(Fraction(t_k) * cfg.columns[i][row] for t_k, i in zip(t, I))
        for row, a in enumerate(alpha)
    ]
    M = intlin.mat([[cfg.columns[j][i] for j in J] for i in range(cfg.r)])
    sol = intlin.solve_rational(M, rhs)
    if sol is None:
        raise InternalConsistencyError("simplex system is inconsistent")
    gamma = [Fraction(0)] * cfg.N
    for pos, j in enumerate(J):
        gamma[j] = sol[pos]
    for t_k, i in zip(t, I):
        gamma[i] = Fraction(t_k)
    return tuple(gamma)


@dataclass(frozen=True)
class GammaSeries:
    """Truncated series with exact coefficients relative to its base term.

    terms maps each enumerated lattice offset to its rational coefficient;
    offsets whose coefficient vanishes by the integral-entry rule are kept
    with an exact zero.  The base offset 0 always carries coefficient 1.
    """

    cfg: geom.PointConfig
    lattice: intlin.LatticeBasis
    gamma: tuple
    sector: tuple
    truncation: int
    terms: dict

    def log_terms(self) -> dict:
        return self.terms

    def coefficient(self, l) -> Fraction:
        return self.terms.get(tuple(l), Fraction(0))

    def shells(self) -> dict:
        out: dict = {}
        for l, c in self.terms.items():
            out.setdefault(h_degree(l), {})[l] = c
        return out


def _sector_offsets(cfg, lattice, sector, lower, truncation):
    """All lattice vectors whose sector entries lie in [lower_i, truncation].

    The h-degree bound caps every entry of a relation vector at the
    truncation, so the box search is complete.
    """
    if lattice.rank == 0:
        yield (0,) * cfg.N
        return
    rows = [tuple(b[i] for i in sector) for b in lattice.vectors]
    M = intlin.mat(rows)
    Minv = intlin.rational_inverse(M)
    for s in product(*(range(max(lo, -truncation), truncation + 1) for lo in lower)):
        c = intlin.vec_mat(s, Minv)
        if any(x.denominator != 1 for x in c):
            continue
        l = tuple(
            sum(int(c_m) * b[j] for c_m, b in zip(c, lattice.vectors))
            for j in range(cfg.N)
        )
        if h_degree(l) <= truncation:
            yield l


def gamma_series(
    sys: GkzSystem, gamma, truncation: int = 8, lattice: Optional[intlin.LatticeBasis] = None
) -> GammaSeries:
    """The truncated series for an exponent vector.

    When the term at offset 0 vanishes, the exponent is shifted along the
    lattice to the first nonzero term (ordered by h-degree, then
    lexicographically) and the series is renormalized there; if every
    enumerated term vanishes the exponent is degenerate at this truncation.
    """
    if isinstance(gamma, GammaVector):
        gv = gamma
    else:
        raise TypeError("gamma must be a GammaVector (see gamma_choices)")
    cfg = sys.cfg if isinstance(sys, GkzSystem) else sys
    lat = lattice if lattice is not None else (
        sys.lattice if isinstance(sys, GkzSystem) else geom.kernel_lattice(cfg)
    )
    if isinstance(sys, GkzSystem):
        _check_exponent(sys, gv)
    g = tuple(Fraction(x) for x in gv.gamma)
    I = tuple(gv.sector)
    if truncation < 0:
        raise ValueError("truncation must be nonnegative")
    lower = []
    for i in I:
        if g[i].denominator != 1:
            raise PreconditionError(f"gamma entry {i + 1} must be integral on the sector")
        lower.append(-int(g[i]))
    candidates = sorted(_sector_offsets(cfg, lat, I, lower, truncation), key=_term_key)
    base = None
    for l in candidates:
        if not _zero_by_rule(g, l):
            base = l
            break
    if base is None:
        raise DegenerateGammaError(
            "every enumerated term vanishes at this truncation; the exponent "
            "has no normalizable base term"
        )
    if any(x != 0 for x in base):
        # the shifted exponent names the same series; re-enumerate around it
        # so the stored window is complete relative to the stored exponent
        g = tuple(g_i + b_i for g_i, b_i in zip(g, base))
        lower = [-int(g[i]) for i in I]
        candidates = sorted(_sector_offsets(cfg, lat, I, lower, truncation), key=_term_key)
    terms = {}
    for l in candidates:
        c = Fraction(1)
        for g_i, l_i in zip(g, l):
            c *= _gamma_ratio(g_i, l_i)
            if c == 0:
                break
        terms[l] = c
    if terms.get((0,) * cfg.N) != 1:
        raise InternalConsistencyError("base term normalization failed")
    return GammaSeries(cfg, lat, g, I, truncation, terms)


def _zero_by_rule(gamma, l) -> bool:
    return any(
        g_i.denominator == 1 and g_i + l_i < 0 for g_i, l_i in zip(gamma, l)
    )


def _check_exponent(sys: GkzSystem, gv: GammaVector) -> None:
    cfg = sys.cfg
    if len(gv.gamma) != cfg.N:
        raise PreconditionError("exponent length does not match the configuration")
    for row in range(cfg.r):
        val = sum(Fraction(g) * cfg.columns[j][row] for j, g in enumerate(gv.gamma))
        if val != sys.alpha[row]:
            raise PreconditionError(
                "exponent does not reproduce the parameter: row "
                f"{row + 1} gives {val} instead of {sys.alpha[row]}"
            )


def differentiate(series: GammaSeries, i: int) -> GammaSeries:
    """Partial derivative in the i-th variable, renormalized.

    The derivative of the series for gamma is proportional to the series
    for gamma - e_i; the result is rebased on its first nonzero term so the
    stored base coefficient stays 1.
    """
    n = series.cfg.N
    if not 0 <= i < n:
        raise ValueError("variable index out of range")
    g = tuple(
        g_k - 1 if k == i else g_k for k, g_k in enumerate(series.gamma)
    )
    raw = {}
    for l, c in series.terms.items():
        raw[l] = c * (series.gamma[i] + l[i])
    base = None
    for l in sorted(raw, key=_term_key):
        if raw[l] != 0:
            base = l
            break
    if base is None:
        raise DegenerateGammaError("the derivative vanishes at this truncation")
    scale = raw[base]
    g2 = tuple(g_k + b_k for g_k, b_k in zip(g, base))
    trunc2 = series.truncation - h_degree(base)
    terms = {}
    for l, c in raw.items():
        z = tuple(l_k - b_k for l_k, b_k in zip(l, base))
        if h_degree(z) > trunc2:
            continue
        if any(z[i] + g2[i] < 0 for i in series.sector):
            # the slab leaving the sector is exactly the kernel of the
            # derivative, so nothing nonzero is dropped
            if c != 0:
                raise InternalConsistencyError("nonzero term left the sector")
            continue
        terms[z] = c / scale
    return GammaSeries(series.cfg, series.lattice, g2, series.sector, trunc2, terms)


@dataclass(frozen=True)
class EvalResult:
    value: complex
    last_shell_magnitude: float
    in_regime: Optional[bool]
    warning: Optional[str]


def _principal_power(v: complex, q: Fraction) -> complex:
    if v == 0:
        if q > 0:
            return 0j
        if q == 0:
            return 1 + 0j
        raise ValueError("zero coordinate with negative exponent")
    return cmath.exp(float(q) * cmath.log(v))


def evaluate(series: GammaSeries, point: Sequence[complex], rho=None) -> EvalResult:
    """Partial sum of the stored terms at a point, principal branches.

    The magnitude of the top h-degree shell is reported as a crude error
    proxy.  When a degeneration direction rho is supplied, it is checked
    against the sector's convergence cone and a failing check sets the
    warning flag instead of refusing to sum.
    """
    pt = [complex(x) for x in point]
    if len(pt) != series.cfg.N:
        raise ValueError("point length does not match the configuration")
    total = 0j
    shell_mag = {}
    for l, c in series.terms.items():
        if c == 0:
            continue
        term = complex(Fraction(c))
        for v, g_i, l_i in zip(pt, series.gamma, l):
            term *= _principal_power(v, g_i + l_i)
        total += term
        d = h_degree(l)
        shell_mag[d] = shell_mag.get(d, 0.0) + abs(term)
    last = shell_mag[max(shell_mag)] if shell_mag else 0.0
    in_regime = None
    warning = None
    if rho is not None:
        in_regime = geom.is_convergence_direction(
            series.cfg, rho, series.sector, lattice=series.lattice
        )
        if not in_regime:
            warning = (
                "the supplied degeneration direction lies outside the "
                "convergence cone of this summation sector"
            )
    return EvalResult(total, last, in_regime, warning)


@dataclass(frozen=True)
class SupportCertificate:
    """Witness that the series terms are eventually nonzero on an open cone.

    kind is "full_space" when every series term is nonzero outright (all
    constrained coordinates fractional), or "cone" with generators spanning
    a full-dimensional cone of nonzero terms and a strictly interior lattice
    direction.
    """

    kind: str
    fractional_support: tuple
    generators: tuple
    interior_point: Optional[tuple]


def full_support_cone(sys: GkzSystem, gamma) -> SupportCertificate:
    """Certify an open cone of relation vectors with nonzero coefficients.

    The coefficient of a term can only vanish through an integral entry of
    gamma going negative, so the obstruction is carried by the coordinate
    forms at the integral positions.  Nonresonance forces the origin out of
    their convex hull, which yields the cone by a standard duality.
    """
    report = is_nonresonant(sys)
    if not report.nonresonant:
        raise PreconditionError(
            "support certificates require a nonresonant parameter; facet "
            f"{report.first_integral_form()} takes an integral value"
        )
    gv = gamma.gamma if isinstance(gamma, GammaVector) else tuple(gamma)
    gv = tuple(Fraction(x) for x in gv)
    cfg = sys.cfg
    R = tuple(i for i in range(cfg.N) if gv[i].denominator != 1)
    basis = sys.lattice
    k = basis.rank
    if len(R) == cfg.r:
        gens = tuple(b for b in basis.vectors) + tuple(
            tuple(-x for x in b) for b in basis.vectors
        )
        return SupportCertificate("full_space", R, gens, None)
    constrained = [i for i in range(cfg.N) if i not in R]
    forms = {i: tuple(b[i] for b in basis.vectors) for i in constrained}
    witness = _zero_in_hull(list(forms.values()))
    if witness is not None:
        raise InternalConsistencyError(
            "origin lies in the hull of the constrained coordinate forms "
            f"(weights {witness}) despite nonresonance"
        )
    rays = _cone_rays([forms[i] for i in constrained], k)
    gens = tuple(
        tuple(sum(d_m * b[j] for d_m, b in zip(d, basis.vectors)) for j in range(cfg.N))
        for d in rays
    )
    interior = None
    if gens:
        s = tuple(sum(g[j] for g in gens) for j in range(cfg.N))
        interior = intlin.vec_primitive(s) if any(s) else None
    return SupportCertificate("cone", R, gens, interior)


def _zero_in_hull(points) -> Optional[tuple]:
    """Exact test for 0 in the convex hull, by affinely independent subsets.

    If 0 is a convex combination at all, it is one over an affinely
    independent subset, where the weights are the unique solution of a
    square-ish linear system; checking all small subsets is complete.
    """
    from itertools import combinations

    pts = [tuple(Fraction(x) for x in p) for p in points]
    k = len(pts[0]) if pts else 0
    for size in range(1, k + 2):
        for S in combinations(range(len(pts)), size):
            M = tuple(
                tuple(pts[j][c] for j in S) for c in range(k)
            ) + ((Fraction(1),) * size,)
            sol = intlin.solve_rational(M, [0] * k + [1])
            if sol is None:
                continue
            if all(x >= 0 for x in sol):
                residual = [
                    sum(x * pts[j][c] for x, j in zip(sol, S)) for c in range(k)
                ]
                if all(v == 0 for v in residual):
                    full = [Fraction(0)] * len(pts)
                    for x, j in zip(sol, S):
                        full[j] = x
                    return tuple(full)
    return None


def _cone_rays(forms, k) -> list:
    """Generators of {x in R^k : f . x >= 0 for all f}, hull test passed.

    The common kernel of the forms is the lineality space, contributed as
    paired opposite generators.  The pointed part is computed in the
    quotient: the span of the forms is a complement of the kernel, and
    there the cone is pointed with full-dimensional interior, so its
    extreme rays arise from maximal proper subsets of active constraints.
    """
    from itertools import combinations

    nz = [f for f in forms if any(f)]
    if not nz:
        return [tuple(int(i == j) for j in range(k)) for i in range(k)] + [
            tuple(-int(i == j) for j in range(k)) for i in range(k)
        ]
    # greedy independent subset spanning the forms
    span_rows = []
    for f in nz:
        if intlin.rational_rank(intlin.mat(span_rows + [list(f)])) > len(span_rows):
            span_rows.append(list(f))
    q = len(span_rows)
    lineality = (
        intlin.integer_kernel(intlin.mat(span_rows)).vectors if q < k else ()
    )
    # constraints expressed on the complement coordinates x = sum y_m u_m
    u = [tuple(row) for row in span_rows]
    g = [tuple(intlin.dot(f, u_m) for u_m in u) for f in nz]

    def feasible(y):
        return all(intlin.dot(gi, y) >= 0 for gi in g)

    rays_y = []
    if q == 1:
        sign = 1 if g[0][0] > 0 else -1
        rays_y.append((sign,))
    else:
        for S in combinations(range(len(g)), q - 1):
            sub = [list(g[j]) for j in S]
            if intlin.rational_rank(intlin.mat(sub)) != q - 1:
                continue
            null = intlin.integer_kernel(intlin.mat(sub)).vectors
            if len(null) != 1:
                raise InternalConsistencyError("quotient cone has hidden lineality")
            for d in (null[0], tuple(-x for x in null[0])):
                if feasible(d):
                    p = intlin.vec_primitive(d)
                    if p not in rays_y:
                        rays_y.append(p)
    out = sorted(
        intlin.vec_primitive(
            tuple(sum(y_m * u_m[c] for y_m, u_m in zip(y, u)) for c in range(k))
        )
        for y in rays_y
    )
    for v in lineality:
        out.append(tuple(v))
        out.append(tuple(-x for x in v))
    return out


def basis_for_triangulation(sys: GkzSystem, T: geom.Triangulation, truncation: int = 8) -> list:
    """One series per exponent choice per simplex; a basis when T-nonresonant.

    The count is the normalized volume.  T-resonant parameters make some
    exponent choices collide modulo the lattice and need the logarithmic
    construction instead.
    """
    rep = is_T_nonresonant(sys, T)
    if not rep.nonresonant:
        J, form, val = rep.integral_cone_facets[0]
        raise ResonanceError(
            "parameter is resonant for this triangulation (simplex "
            f"{tuple(j + 1 for j in J)}, facet form {form}, value {val}); "
            "use the logarithmic basis construction in the logseries module"
        )
    out = []
    for J in T.simplices:
        for gv in gamma_choices(sys, J):
            out.append(gamma_series(sys, gv, truncation))
    vol = geom.normalized_volume(sys.cfg)
    if len(out) != vol:
        raise InternalConsistencyError(
            f"basis size {len(out)} does not match the volume {vol}"
        )
    return out
