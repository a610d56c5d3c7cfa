"""Differential operators with Laurent-monomial coefficients, and their action.

An operator is a finite sum of terms q * v^m * d^u with q rational, m an
integer vector (Laurent exponents in the variables) and u a nonnegative
integer vector of partial-derivative exponents.  Operators act exactly on
truncated series whose terms are rational multiples of v^(gamma+l) times a
polynomial in log v.

The facet valuation of a d-monomial, the valuation-raising rewrite, and the
factorization through a chosen partial derivative implement the contiguity
machinery; equivalence modulo the system ideal is certified by acting on a
solution basis rather than by any Groebner computation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Optional, Sequence

from . import geom, intlin
from .errors import (
    EffortExceededError,
    InternalConsistencyError,
    PreconditionError,
    ResonanceError,
)

LogPoly = dict  # log-exponent tuple -> Fraction


def logpoly_scale(p: LogPoly, q) -> LogPoly:
    if q == 0:
        return {}
    return {k: v * q for k, v in p.items()}


def logpoly_add_into(dst: LogPoly, src: LogPoly) -> None:
    for k, v in src.items():
        w = dst.get(k, Fraction(0)) + v
        if w == 0:
            dst.pop(k, None)
        else:
            dst[k] = w


def logpoly_clean(p: LogPoly) -> LogPoly:
    return {k: v for k, v in p.items() if v != 0}


def _logpoly_d(p: LogPoly, exponent: Fraction, i: int) -> LogPoly:
    # d_i (v^c * log^k v_i) = v^(c-1) * (c log^k v_i + k log^(k-1) v_i)
    out: LogPoly = {}
    for mono, q in p.items():
        logpoly_add_into(out, {mono: q * exponent})
        if mono[i] > 0:
            lowered = mono[:i] + (mono[i] - 1,) + mono[i + 1 :]
            logpoly_add_into(out, {lowered: q * mono[i]})
    return out


@dataclass
class DiffOperator:
    """Canonical sum of (v-exponent, d-exponent) -> coefficient terms."""

    n_vars: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        self.terms = {
            (tuple(m), tuple(u)): Fraction(q)
            for (m, u), q in self.terms.items()
            if q != 0
        }

    @classmethod
    def zero(cls, n: int) -> "DiffOperator":
        return cls(n, {})

    @classmethod
    def one(cls, n: int) -> "DiffOperator":
        z = (0,) * n
        return cls(n, {(z, z): Fraction(1)})

    @classmethod
    def d_monomial(cls, u: Sequence[int], coeff=1) -> "DiffOperator":
        u = tuple(int(x) for x in u)
        if any(x < 0 for x in u):
            raise ValueError("derivative exponents must be nonnegative")
        return cls(len(u), {((0,) * len(u), u): Fraction(coeff)})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        out = dict(self.terms)
        for key, q in other.terms.items():
            w = out.get(key, Fraction(0)) + q
            if w == 0:
                out.pop(key, None)
            else:
                out[key] = w
        return DiffOperator(self.n_vars, out)

    def __sub__(self, other: "DiffOperator") -> "DiffOperator":
        return self + other.scale(-1)

    def scale(self, q) -> "DiffOperator":
        q = Fraction(q)
        if q == 0:
            return DiffOperator.zero(self.n_vars)
        return DiffOperator(self.n_vars, {k: v * q for k, v in self.terms.items()})

    def compose(self, other: "DiffOperator") -> "DiffOperator":
        """Operator product self * other (self applied after other)."""
        out: dict = {}
        for (m1, u1), q1 in self.terms.items():
            for (m2, u2), q2 in other.terms.items():
                for m, u, q in _reorder_term(m1, u1, m2, u2, q1 * q2):
                    key = (m, u)
                    w = out.get(key, Fraction(0)) + q
                    if w == 0:
                        out.pop(key, None)
                    else:
                        out[key] = w
        return DiffOperator(self.n_vars, out)

    def shift_degree(self) -> int:
        """Max over terms of the homogeneity drop sum_i max(u_i - m_i, 0).

        A result term at offset z only collects contributions from input
        terms within shift_degree of z, so applying an operator shrinks the
        trustworthy window by exactly this amount.
        """
        if not self.terms:
            return 0
        return max(
            sum(max(u_i - m_i, 0) for m_i, u_i in zip(m, u)) for (m, u) in self.terms
        )

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for (m, u), q in sorted(self.terms.items()):
            factors = []
            if q != 1 or (not any(m) and not any(u)):
                factors.append(str(q))
            for i, e in enumerate(m):
                if e:
                    factors.append(f"v{i + 1}" + (f"^{e}" if e != 1 else ""))
            for i, e in enumerate(u):
                if e:
                    factors.append(f"d{i + 1}" + (f"^{e}" if e != 1 else ""))
            bits.append("*".join(factors))
        return " + ".join(bits)


def _reorder_term(m1, u1, m2, u2, q):
    """Normal-order q * v^m1 d^u1 v^m2 d^u2 into sum of v^m d^u terms.

    Coordinatewise Leibniz: d^a v^b = sum_k C(a,k) * b(b-1)..(b-k+1) *
    v^(b-k) d^(a-k), valid for Laurent b.
    """
    n = len(m1)
    parts = [((), (), q)]
    for i in range(n):
        a, b = u1[i], m2[i]
        new_parts = []
        for mm, uu, qq in parts:
            for k in range(a + 1):
                fall = Fraction(1)
                for s in range(k):
                    fall *= b - s
                c = comb(a, k) * fall
                if c == 0:
                    continue
                new_parts.append((mm + (m1[i] + b - k,), uu + (a - k + u2[i],), qq * c))
        parts = new_parts
    return parts


def euler_operator(cfg: geom.PointConfig, i: int) -> DiffOperator:
    """The i-th homogeneity operator sum_j a_{ij} v_j d_j."""
    n = cfg.N
    terms = {}
    for j in range(n):
        a = cfg.columns[j][i]
        if a:
            e = tuple(int(j == k) for k in range(n))
            terms[(e, e)] = Fraction(a)
    return DiffOperator(n, terms)


@dataclass
class AppliedSeries:
    """Result of acting on a series: offsets keyed in Z^N relative to gamma."""

    gamma: tuple
    terms: dict  # offset tuple -> LogPoly
    truncation: int

    def log_terms(self) -> dict:
        return self.terms

    def is_zero(self) -> bool:
        return all(not logpoly_clean(p) for p in self.terms.values())


def _as_log_terms(series) -> dict:
    raw = series.log_terms()
    out = {}
    for l, p in raw.items():
        if isinstance(p, dict):
            out[l] = p
        else:
            n = len(l)
            out[l] = {(0,) * n: Fraction(p)}
    return out


def offset_degree(z: Sequence[int]) -> int:
    return sum(x for x in z if x > 0)


def apply(op: DiffOperator, series) -> AppliedSeries:
    """Act with op on a truncated series, shrinking the window soundly.

    Series objects expose gamma (tuple of Fractions), log_terms() mapping
    integer offset vectors to either Fractions or log-polynomials, and an
    integer truncation.
    """
    gamma = tuple(Fraction(g) for g in series.gamma)
    n = len(gamma)
    if op.n_vars != n:
        raise ValueError("operator/series variable count mismatch")
    d_op = op.shift_degree()
    window = series.truncation - d_op
    if window < 0:
        # the operator digs deeper than the stored terms reach; the result
        # carries no safe-degree terms and its window records that honestly
        return AppliedSeries(gamma, {}, window)
    out: dict = {}
    src = _as_log_terms(series)
    for (m, u), q in op.terms.items():
        for l, poly in src.items():
            z = tuple(l_i + m_i - u_i for l_i, m_i, u_i in zip(l, m, u))
            if offset_degree(z) > window:
                continue
            cur = logpoly_scale(poly, q)
            for i in range(n):
                for step in range(u[i]):
                    cur = _logpoly_d(cur, gamma[i] + l[i] - step, i)
                if not cur:
                    break
            if not cur:
                continue
            slot = out.setdefault(z, {})
            logpoly_add_into(slot, cur)
    out = {z: p for z, p in out.items() if logpoly_clean(p)}
    return AppliedSeries(gamma, out, window)


def series_equal(a, b, window: Optional[int] = None) -> bool:
    """Exact termwise equality of two series on the common trusted window."""
    ga = tuple(Fraction(g) for g in a.gamma)
    gb = tuple(Fraction(g) for g in b.gamma)
    if ga != gb:
        return False
    w = min(a.truncation, b.truncation)
    if window is not None:
        w = min(w, window)
    ta = {z: logpoly_clean(p) for z, p in _as_log_terms(a).items() if offset_degree(z) <= w}
    tb = {z: logpoly_clean(p) for z, p in _as_log_terms(b).items() if offset_degree(z) <= w}
    ta = {z: p for z, p in ta.items() if p}
    tb = {z: p for z, p in tb.items() if p}
    return ta == tb


def residual_is_zero(applied: AppliedSeries) -> bool:
    return applied.is_zero()


def facet_valuation_of_monomial(cfg: geom.PointConfig, u: Sequence[int], form: Sequence[int]) -> int:
    return sum(u_j * intlin.dot(form, cfg.columns[j]) for j, u_j in enumerate(u))


def valuation(op: DiffOperator, cfg: geom.PointConfig, form: Sequence[int]) -> int:
    """Minimal facet valuation over the operator's d-monomials."""
    if op.is_zero():
        raise ValueError("the zero operator has no valuation")
    return min(facet_valuation_of_monomial(cfg, u, form) for (_, u) in op.terms)


def raise_valuation(sys, u: Sequence[int], form: Sequence[int]) -> DiffOperator:
    """Rewrite d^u modulo the system as terms of strictly larger facet valuation.

    Uses the commutation of d^u with the facet homogeneity operator: d^u is
    congruent to (1 / l(alpha - u)) * sum_j l(a_j) v_j d_j d^u, where
    l(alpha - u) = l(alpha) - val_l(d^u).  Nonresonance keeps the scalar
    nonzero, every surviving term raises the valuation along this facet by at
    least one, and no other facet valuation drops.
    """
    cfg = sys.cfg
    u = tuple(int(x) for x in u)
    lv = facet_valuation_of_monomial(cfg, u, form)
    scalar = intlin.dot(form, sys.alpha) - lv
    if scalar == 0:
        raise PreconditionError("facet value of alpha minus the valuation vanishes")
    terms = {}
    for j in range(cfg.N):
        aj = intlin.dot(form, cfg.columns[j])
        if aj == 0:
            continue
        m = tuple(int(j == k) for k in range(cfg.N))
        w = tuple(u_k + int(j == k) for k, u_k in enumerate(u))
        terms[(m, w)] = Fraction(aj) / scalar
    return DiffOperator(cfg.N, terms)


def box_rewrite(
    cfg: geom.PointConfig,
    w: Sequence[int],
    u: Sequence[int],
    facets: Optional[tuple] = None,
) -> Optional[tuple]:
    """Factor d^w as d^w' d^u modulo one box relation, when possible.

    Succeeds iff A(w-u) is a nonnegative integer combination of the columns;
    the witness w' satisfies A w' = A(w-u) and the returned relation
    lam = w - w' - u certifies d^w - d^(w'+u) as a multiple of a box
    operator.  Returns (w', lam) or None; a blown search budget raises and is
    distinct from None.
    """
    w = tuple(int(x) for x in w)
    u = tuple(int(x) for x in u)
    target = tuple(
        sum((w_j - u_j) * cfg.columns[j][k] for j, (w_j, u_j) in enumerate(zip(w, u)))
        for k in range(cfg.r)
    )
    rep = geom.nonneg_representation(cfg, target, facets=facets)
    if rep is None:
        return None
    lam = tuple(w_j - r_j - u_j for w_j, r_j, u_j in zip(w, rep, u))
    return rep, lam


@dataclass
class ContiguityResult:
    operator: DiffOperator
    rounds: int
    certificate_window: int
    basis_size: int


def default_effort() -> int:
    return int(os.environ.get("GKZ_EFFORT", "64"))


def contiguity_inverse(
    sys,
    i: int,
    truncation: int = 8,
    effort: Optional[int] = None,
    basis: Optional[list] = None,
) -> ContiguityResult:
    """An operator P' with P' d_i congruent to 1 modulo the system ideal.

    Construction: starting from 1, repeatedly raise the facet valuations of
    all terms until each exceeds the valuation of d_i shifted by the
    saturation point; then every d-monomial factors through d_i via a box
    relation.  The result is certified by applying P' d_i to every basis
    series and demanding exact termwise identity on the trusted window.
    """
    from .system import is_nonresonant  # local import avoids a cycle

    cfg = sys.cfg
    if effort is None:
        effort = default_effort()
    report = is_nonresonant(sys)
    if not report.nonresonant:
        raise ResonanceError(
            "contiguity inversion requires a nonresonant parameter; "
            f"facet {report.first_integral_form()} takes an integral value"
        )
    p, _ = geom.saturation_point(cfg, lattice=sys.lattice)
    e_i = tuple(int(k == i) for k in range(cfg.N))
    facets = sys.facets
    targets = {
        form: facet_valuation_of_monomial(cfg, e_i, form) + intlin.dot(form, p)
        for form in facets
    }
    P = DiffOperator.one(cfg.N)
    rounds = 0
    for form in sorted(facets):
        while True:
            low = [
                (m, u)
                for (m, u) in P.terms
                if facet_valuation_of_monomial(cfg, u, form) < targets[form]
            ]
            if not low:
                break
            rounds += 1
            if rounds > effort:
                raise EffortExceededError(
                    f"valuation raising along facet {form} still below target "
                    f"{targets[form]} after {effort} rounds; raise GKZ_EFFORT"
                )
            nxt = DiffOperator.zero(cfg.N)
            for (m, u), q in P.terms.items():
                t = DiffOperator(cfg.N, {(m, u): q})
                if (m, u) in low:
                    repl = raise_valuation(sys, u, form)
                    t = DiffOperator(cfg.N, {(m, (0,) * cfg.N): q}).compose(repl)
                nxt = nxt + t
            P = nxt
            if P.is_zero():
                raise InternalConsistencyError("raising cancelled every term")
    # factor each monomial through d_i
    terms2: dict = {}
    for (m, u), q in P.terms.items():
        hit = box_rewrite(cfg, u, e_i, facets=facets)
        if hit is None:
            raise InternalConsistencyError(
                f"saturation guarantee failed: d^{u} does not factor through d_{i + 1}"
            )
        w_prime, _ = hit
        key = (m, tuple(w_prime))
        terms2[key] = terms2.get(key, Fraction(0)) + q
    P_prime = DiffOperator(cfg.N, terms2)
    R = P_prime.compose(DiffOperator.d_monomial(e_i))
    if basis is None:
        from .logseries import full_basis  # local import avoids a cycle

        # the certificate window shrinks by the composed operator's shift
        # degree, so the freshly built basis digs deeper by that amount
        T = geom.some_regular_triangulation(cfg)
        basis = full_basis(sys, T, truncation + R.shift_degree())
    window = None
    for s in basis:
        if s.truncation < R.shift_degree():
            raise PreconditionError(
                f"certificate basis truncation {s.truncation} is shallower "
                f"than the inverse operator's shift degree {R.shift_degree()}"
            )
        out = apply(R, s)
        window = out.truncation if window is None else min(window, out.truncation)
        if not series_equal(out, s):
            raise InternalConsistencyError(
                "contiguity certificate failed: P' d_i does not act as the "
                "identity on a basis series"
            )
    return ContiguityResult(P_prime, rounds, window if window is not None else truncation, len(basis))


def annihilation_report(sys, solutions, operators=None) -> list:
    """(solution index, operator label, exactly-zero flag) for each pair."""
    from .system import annihilators

    ops = operators if operators is not None else annihilators(sys)
    out = []
    for idx, s in enumerate(solutions):
        for label, op in ops:
            res = apply(op, s)
            out.append((idx, label, res.is_zero()))
    return out
