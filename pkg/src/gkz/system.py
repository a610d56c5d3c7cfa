"""Hypergeometric systems attached to a point configuration and a parameter.

A system bundles the configuration A, the rational parameter vector alpha,
the saturated relation lattice, and the facet forms of the cone over A.  The
annihilating operators come in two families: the homogeneity operators
Z_i - alpha_i, and one box operator per relation vector.

Resonance is detected facet by facet; the finer simplex-wise test inspects
the cone facets of every simplex of a triangulation.  Rank counting,
restriction to a facet, and the construction of a reducibility witness all
reduce to exact lattice computations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import geom, intlin, weyl
from .errors import ConfigurationError, InternalConsistencyError, PreconditionError


@dataclass(frozen=True)
class GkzSystem:
    cfg: geom.PointConfig
    alpha: tuple
    lattice: intlin.LatticeBasis
    facets: tuple

    @property
    def n_vars(self) -> int:
        return self.cfg.N


def build_system(columns, alpha) -> GkzSystem:
    cfg = columns if isinstance(columns, geom.PointConfig) else geom.point_config(columns)
    alpha = tuple(Fraction(a) for a in alpha)
    if len(alpha) != cfg.r:
        raise ConfigurationError(
            "parameter length",
            f"alpha has {len(alpha)} entries but the configuration lives in rank {cfg.r}",
        )
    lattice = geom.kernel_lattice(cfg)
    facets = geom.facet_forms(cfg)
    return GkzSystem(cfg, alpha, lattice, facets)


def euler_annihilator(sys: GkzSystem, i: int) -> weyl.DiffOperator:
    """Z_i - alpha_i, the i-th homogeneity annihilator."""
    op = weyl.euler_operator(sys.cfg, i)
    return op - weyl.DiffOperator.one(sys.n_vars).scale(sys.alpha[i])

def box_operator(sys_or_cfg, l: Sequence[int]) -> weyl.DiffOperator:
    """d^(l+) - d^(l-) for a relation vector l of the configuration."""
    cfg = sys_or_cfg.cfg if isinstance(sys_or_cfg, GkzSystem) else sys_or_cfg
    l = tuple(int(x) for x in l)
    if len(l) != cfg.N:
        raise PreconditionError("relation vector length mismatch")
    image = tuple(
        sum(l_j * cfg.columns[j][k] for j, l_j in enumerate(l)) for k in range(cfg.r)
    )
    if any(image):
        raise PreconditionError(
            f"{l} is not a relation of the configuration (A*l = {image})"
        )
    plus = tuple(max(x, 0) for x in l)
    minus = tuple(max(-x, 0) for x in l)
    return weyl.DiffOperator.d_monomial(plus) - weyl.DiffOperator.d_monomial(minus)


def annihilators(sys: GkzSystem) -> list:
    """Labelled generators: homogeneity annihilators and lattice box operators."""
    out = []
    for i in range(sys.cfg.r):
        out.append((f"euler[{i + 1}]", euler_annihilator(sys, i)))
    for b in sys.lattice.vectors:
        out.append((f"box{tuple(b)}", box_operator(sys, b)))
    return out


@dataclass(frozen=True)
class ResonanceReport:
    nonresonant: bool
    integral_facets: tuple  # (form, value) pairs with value an integer

    def first_integral_form(self) -> Optional[tuple]:
        return self.integral_facets[0][0] if self.integral_facets else None


def is_nonresonant(sys: GkzSystem) -> ResonanceReport:
    """No facet form of the cone takes an integer value at alpha."""
    bad = []
    for form in sys.facets:
        val = sum(Fraction(f) * a for f, a in zip(form, sys.alpha))
        if val.denominator == 1:
            bad.append((form, int(val)))
    return ResonanceReport(not bad, tuple(bad))


@dataclass(frozen=True)
class TResonanceReport:
    nonresonant: bool
    integral_cone_facets: tuple  # (simplex, form, value) triples


def is_T_nonresonant(sys: GkzSystem, T: geom.Triangulation) -> TResonanceReport:
    """No cone facet of any simplex of T takes an integer value at alpha.

    Every facet of the full cone is a cone facet of some simplex, so this
    refines the plain resonance test.
    """
    bad = []
    for J in T.simplices:
        for _, form in geom.cone_facets_of_simplex(sys.cfg, J):
            val = sum(Fraction(f) * a for f, a in zip(form, sys.alpha))
            if val.denominator == 1:
                bad.append((J, form, int(val)))
    return TResonanceReport(not bad, tuple(bad))


@dataclass(frozen=True)
class RankResult:
    rank: int
    volume: int
    warnings: tuple


def rank(sys: GkzSystem) -> RankResult:
    """Holonomic rank reported as the normalized volume, with caveats.

    The volume count is exact for nonresonant parameters.  A resonant
    parameter can push the rank above the volume, and a pyramid
    configuration has extra degenerate directions worth flagging, so both
    conditions attach a warning instead of silently returning the count.
    """
    vol = geom.normalized_volume(sys.cfg)
    warnings = []
    report = is_nonresonant(sys)
    if not report.nonresonant:
        form, val = report.integral_facets[0]
        warnings.append(
            f"parameter is resonant (facet {form} evaluates to the integer {val}); "
            "the true rank may exceed the volume"
        )
    apex = geom.is_pyramid(sys.cfg)
    if apex is not None:
        warnings.append(
            f"configuration is a pyramid with apex column {apex + 1}; "
            "solutions are pulled back from the base"
        )
    return RankResult(vol, vol, tuple(warnings))


@dataclass(frozen=True)
class FaceRestriction:
    """Restriction of a system to a facet of its cone.

    columns_kept are the 0-based indices of the columns lying on the facet,
    transform is the unimodular change of coordinates applied on the left,
    and system is the restricted system with its own (smaller) rank.
    """

    parent: GkzSystem
    form: tuple
    columns_kept: tuple
    transform: tuple
    system: GkzSystem

    def lift_exponent(self, gamma_face: Sequence) -> tuple:
        """Embed a face exponent vector back into the ambient variables."""
        out = [Fraction(0)] * self.parent.cfg.N
        for pos, j in enumerate(self.columns_kept):
            out[j] = Fraction(gamma_face[pos])
        return tuple(out)


def _facet_completion(form) -> tuple:
    """Rows of a coordinate map identifying the facet hyperplane lattice
    with Z^(r-1).

    Coordinate projections are preferred for readable output: dropping the
    coordinate j is an isomorphism on the hyperplane lattice exactly when
    |form_j| = 1.  When no coordinate works, the dual basis of a saturated
    hyperplane lattice basis serves, with rational entries.
    """
    r = len(form)
    for j in range(r):
        if abs(form[j]) == 1:
            K = tuple(k for k in range(r) if k != j)
            return tuple(
                tuple(Fraction(int(k == c)) for c in range(r)) for k in K
            )
    H = intlin.integer_kernel(intlin.mat([list(form)])).vectors
    # dual rows: R = (H H^T)^{-1} H gives lattice coordinates on the hyperplane
    G = intlin.mat_mul(H, intlin.transpose(H))
    Ginv = intlin.rational_inverse(G)
    return tuple(
        tuple(sum(Ginv[i][k] * H[k][c] for k in range(len(H))) for c in range(r))
        for i in range(len(H))
    )


def face_restrict(sys: GkzSystem, form: Sequence[int]) -> FaceRestriction:
    """Restrict to the columns on a facet, in facet-adapted coordinates.

    The kept columns are those where the facet form vanishes.  A unimodular
    completion of the form re-expresses them in r-1 coordinates; the
    restricted parameter is the matching projection of alpha, which must lie
    in the rational span of the kept columns.
    """
    form = tuple(int(f) for f in form)
    if form not in sys.facets:
        raise PreconditionError(f"{form} is not a facet form of the configuration")
    kept = tuple(
        j for j in range(sys.cfg.N) if intlin.dot(form, sys.cfg.columns[j]) == 0
    )
    if not kept:
        raise PreconditionError("no columns lie on the facet")
    face_cols = [sys.cfg.columns[j] for j in kept]
    rows = _facet_completion(form)
    # alpha must lie in the rational span of the facet columns
    spanmat = intlin.mat([list(c) for c in face_cols])
    if intlin.solve_rational(intlin.transpose(spanmat), list(sys.alpha)) is None:
        raise PreconditionError(
            "alpha does not lie in the span of the facet columns; "
            "restriction needs a parameter on the facet hyperplane"
        )
    new_cols = []
    for col in face_cols:
        image = tuple(sum(x * c for x, c in zip(row, col)) for row in rows)
        if any(x.denominator != 1 for x in image):
            raise InternalConsistencyError("facet coordinates are not integral")
        new_cols.append(tuple(int(x) for x in image))
    new_alpha = tuple(
        sum(x * a for x, a in zip(row, sys.alpha)) for row in rows
    )
    sub = build_system(new_cols, new_alpha)
    return FaceRestriction(sys, form, kept, tuple(rows), sub)


@dataclass(frozen=True)
class ReducibilityWitness:
    """A facet certificate that the parameter admits a proper subsystem.

    form is the facet whose value at alpha is integral, shift is a column
    combination m with form(alpha + A m) arranged to vanish after deep
    shifting, and beta = alpha + A m is the resonant parameter whose facet
    solutions embed.
    """

    form: tuple
    value: int
    shift: tuple
    beta: tuple


def reducibility_witness(sys: GkzSystem) -> Optional[ReducibilityWitness]:
    """A witness facet for reducibility, or None when nonresonant.

    For a normal configuration the monodromy representation is reducible
    exactly when some facet form is integral at alpha; the witness shifts
    alpha by lattice points of the cone until the facet value is zero while
    all other facets stay nonnegative, exhibiting a parameter whose facet
    subsystem genuinely embeds.
    """
    report = is_nonresonant(sys)
    if report.nonresonant:
        return None
    form, val = report.integral_facets[0]
    cfg = sys.cfg
    # integer m with form(A m) = -val, so that form(alpha + A m) = 0;
    # the facet values of the columns have gcd 1 because the columns
    # generate Z^r and the form is primitive
    coeffs = [intlin.dot(form, c) for c in cfg.columns]
    M = intlin.mat([coeffs])
    S, U, V = intlin.smith_normal_form(M)
    g = S[0][0]
    if g == 0 or (-val * U[0][0]) % g != 0:
        raise InternalConsistencyError("facet values of the columns are not coprime")
    y = (-val * U[0][0]) // g
    m0 = tuple(V[j][0] * y for j in range(cfg.N))
    # deep shifts keep the other facet values growing, so finitely many
    # steps land beta inside every other facet's nonnegative side
    deep = geom.deep_face_vector(cfg, form)
    def beta_of(m):
        return tuple(
            a + sum(m_j * cfg.columns[j][i] for j, m_j in enumerate(m))
            for i, a in enumerate(sys.alpha)
        )
    m = m0
    for _ in range(cfg.N * 64):
        beta = beta_of(m)
        ok = all(
            sum(Fraction(f) * b for f, b in zip(other, beta)) >= 0
            for other in sys.facets
            if other != form
        )
        if ok:
            return ReducibilityWitness(form, val, m, beta)
        m = tuple(m_j + d_j for m_j, d_j in zip(m, deep))
    raise InternalConsistencyError("deep shifting failed to enter the cone")
