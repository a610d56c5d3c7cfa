"""Logarithmic solution bases through exact first-order parameter motion.

When several simplices of a triangulation share an exponent class modulo the
relation lattice, the plain series collide and logarithms appear.  Moving
the parameter along a generic rational direction separates the exponents;
the perturbed series have coefficients that are exact truncated polynomials
(jets) in the motion size, and Gaussian elimination on the jet filtration
recovers a full set of honest solutions carrying powers of log v.

All jet arithmetic is rational and truncation-exact; a jet that would need
inverting with zero constant term signals a defect and raises instead of
approximating.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Optional, Sequence

from . import geom, intlin
from .errors import (
    InconclusiveSearchError,
    InsufficientOrderError,
    InternalConsistencyError,
    PreconditionError,
    ResonanceError,
)
from .series import GammaSeries, GammaVector, gamma_choices, gamma_series, h_degree
from .system import GkzSystem, is_nonresonant


# ---------------------------------------------------------------------------
# jets: tuples of Fractions, index = power of the motion parameter


def jet_from_linear(c0, c1, order: int) -> tuple:
    out = [Fraction(0)] * (order + 1)
    out[0] = Fraction(c0)
    if order >= 1:
        out[1] = Fraction(c1)
    return tuple(out)


def jet_mul(a: tuple, b: tuple) -> tuple:
    D = len(a) - 1
    out = [Fraction(0)] * (D + 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j in range(0, D + 1 - i):
            if b[j] != 0:
                out[i + j] += x * b[j]
    return tuple(out)


def jet_inverse(a: tuple) -> tuple:
    if a[0] == 0:
        raise InternalConsistencyError(
            "jet with zero constant term required inversion; a pole survived "
            "the normalization"
        )
    D = len(a) - 1
    out = [Fraction(0)] * (D + 1)
    out[0] = 1 / a[0]
    for s in range(1, D + 1):
        acc = Fraction(0)
        for m in range(1, s + 1):
            acc += a[m] * out[s - m]
        out[s] = -acc / a[0]
    return tuple(out)


def jet_unit(order: int) -> tuple:
    return (Fraction(1),) + (Fraction(0),) * order


def gamma_ratio_jet(g0, g1, k: int, order: int) -> tuple:
    """Jet of Gamma(g+1)/Gamma(g+k+1) along g = g0 + eps*g1."""
    g0 = Fraction(g0)
    g1 = Fraction(g1)
    if k >= 0:
        denom = jet_unit(order)
        for m in range(1, k + 1):
            denom = jet_mul(denom, jet_from_linear(g0 + m, g1, order))
        return jet_inverse(denom)
    out = jet_unit(order)
    for m in range(0, -k):
        out = jet_mul(out, jet_from_linear(g0 - m, g1, order))
    return out


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EpsSeries:
    """Series for a moved exponent, coefficients as jets in the motion size.

    gamma is the (shifted-to-nonzero-base) unperturbed exponent, direction
    the motion of the exponent, and terms maps each lattice offset to the
    jet of its coefficient relative to the base term.  The log carrier of
    the series is sum_j direction_j * log v_j.
    """

    cfg: geom.PointConfig
    lattice: intlin.LatticeBasis
    simplex: tuple
    gamma: tuple
    sector: tuple
    direction: tuple
    eps_order: int
    truncation: int
    terms: dict


@dataclass(frozen=True)
class LogSeries:
    """Solution with polynomial log dependence and exact coefficients.

    terms maps lattice offsets to polynomials in the formal symbols
    log v_1 ... log v_N, encoded as {exponent tuple: Fraction}.  The weight
    bounds the total log degree; weight 0 reduces to a plain series.
    """

    cfg: geom.PointConfig
    lattice: intlin.LatticeBasis
    gamma: tuple
    truncation: int
    weight: int
    terms: dict

    def log_terms(self) -> dict:
        return self.terms

    def max_log_degree(self) -> int:
        best = 0
        for poly in self.terms.values():
            for mono, c in poly.items():
                if c != 0:
                    best = max(best, sum(mono))
        return best


def plain_as_log(series: GammaSeries) -> LogSeries:
    """View a plain series as a weight-0 log solution."""
    zero = (0,) * series.cfg.N
    terms = {l: {zero: c} for l, c in series.terms.items()}
    return LogSeries(
        series.cfg, series.lattice, series.gamma, series.truncation, 0, terms
    )


def resonating_simplices(sys: GkzSystem, T: geom.Triangulation, gamma0) -> tuple:
    """Simplices of T whose complementary entries of gamma0 are all integral.

    These are exactly the simplices whose exponent class collides with
    gamma0 modulo the lattice, so they must be treated together.
    """
    g = tuple(Fraction(x) for x in gamma0)
    _validate_exponent(sys, g)
    out = []
    for J in sorted(T.simplices):
        comp = [i for i in range(sys.cfg.N) if i not in J]
        if all(g[i].denominator == 1 for i in comp):
            out.append(tuple(J))
    return tuple(out)


def _validate_exponent(sys: GkzSystem, g) -> None:
    if len(g) != sys.cfg.N:
        raise PreconditionError("exponent length does not match the configuration")
    for row in range(sys.cfg.r):
        val = sum(x * sys.cfg.columns[j][row] for j, x in enumerate(g))
        if val != sys.alpha[row]:
            raise PreconditionError(
                f"exponent does not reproduce the parameter in row {row + 1}"
            )


def choose_generic_direction(sys: GkzSystem, T: geom.Triangulation) -> tuple:
    """A rational parameter direction off every simplex-facet hyperplane.

    Any direction on which all cone-facet forms of all simplices are nonzero
    keeps the moved parameter clear of resonance for every small nonzero
    motion.  The search walks a fixed candidate list (unit vectors, then
    moment vectors) and returns the first success, deterministically.
    """
    r = sys.cfg.r
    forms = []
    for J in T.simplices:
        for _, form in geom.cone_facets_of_simplex(sys.cfg, J):
            if form not in forms:
                forms.append(form)
    candidates = [tuple(int(i == j) for j in range(r)) for i in range(r)]
    for t in range(1, 34):
        candidates.append(tuple(t**i for i in range(r)))
    for cand in candidates:
        if all(intlin.dot(form, cand) != 0 for form in forms):
            return tuple(Fraction(x) for x in cand)
    raise InconclusiveSearchError(
        "no candidate direction avoided every simplex-facet hyperplane"
    )


def _simplex_direction(cfg, J, alpha_prime) -> tuple:
    """Solve for the exponent motion supported on the simplex columns."""
    M = intlin.mat([[cfg.columns[j][i] for j in J] for i in range(cfg.r)])
    sol = intlin.solve_rational(M, list(alpha_prime))
    if sol is None:
        raise InternalConsistencyError("simplex columns do not span the direction")
    out = [Fraction(0)] * cfg.N
    for pos, j in enumerate(J):
        out[j] = sol[pos]
    return tuple(out)


def perturbed_solutions(
    sys: GkzSystem,
    T: geom.Triangulation,
    gamma0,
    alpha_prime,
    eps_order: int,
    truncation: int = 8,
) -> list:
    """One jet-coefficient series per resonating simplex of gamma0's class.

    Every returned series shares the same base exponent and the same jet
    constant terms (the plain series of the class); they differ in their
    motion directions, which is where the logarithms come from.
    """
    g0 = tuple(Fraction(x) for x in gamma0)
    B = resonating_simplices(sys, T, g0)
    b = len(B)
    if b < 2:
        raise PreconditionError(
            f"the exponent class resonates on {b} simplex(es); the "
            "construction needs at least 2"
        )
    if eps_order < b - 1:
        raise InsufficientOrderError(
            f"eps_order {eps_order} cannot resolve a depth-{b - 1} filtration"
        )
    out = []
    shared_gamma = None
    for J in B:
        if shared_gamma is None:
            gv = _choice_in_class(sys, J, g0)
            plain = gamma_series(sys, gv, truncation)
            shared_gamma = plain.gamma
        else:
            # later charts re-enumerate around the base the first chart
            # fixed; the class property keeps it integral on their sectors,
            # and every intrinsically nonzero term lies in every chart's
            # cone, so the plain coefficients agree dict-for-dict
            comp = tuple(i for i in range(sys.cfg.N) if i not in J)
            gv = GammaVector(shared_gamma, comp)
            plain = gamma_series(sys, gv, truncation)
            if plain.gamma != shared_gamma:
                raise InternalConsistencyError(
                    "resonating series normalized to different base exponents"
                )
        direction = _simplex_direction(sys.cfg, J, alpha_prime)
        gstar = plain.gamma
        for k, x in enumerate(gstar):
            if x.denominator == 1 and x < 0:
                raise InternalConsistencyError(
                    f"normalized exponent keeps a negative integral entry at {k + 1}"
                )
        terms = {}
        for l in plain.terms:
            jet = jet_unit(eps_order)
            for g_k, d_k, l_k in zip(gstar, direction, l):
                if l_k:
                    jet = jet_mul(jet, gamma_ratio_jet(g_k, d_k, l_k, eps_order))
            if jet[0] != plain.terms[l]:
                raise InternalConsistencyError("jet constant term mismatch")
            terms[l] = jet
        out.append(
            EpsSeries(
                sys.cfg,
                sys.lattice,
                tuple(J),
                gstar,
                plain.sector,
                direction,
                eps_order,
                plain.truncation,
                terms,
            )
        )
    return out


def _choice_in_class(sys: GkzSystem, J, g0) -> GammaVector:
    for gv in gamma_choices(sys, J):
        diff = tuple(Fraction(a) - Fraction(b) for a, b in zip(gv.gamma, g0))
        if all(d.denominator == 1 for d in diff) and sys.lattice.contains(
            tuple(int(d) for d in diff)
        ):
            return gv
    raise InternalConsistencyError(
        f"no exponent choice of simplex {tuple(j + 1 for j in J)} lies in the class"
    )


def _carrier_powers(direction, n_vars: int, order: int) -> list:
    """(sum_j d_j log v_j)^n / n! for n = 0..order, as log polynomials."""
    zero = (0,) * n_vars
    powers = [{zero: Fraction(1)}]
    carrier = {}
    for j, d in enumerate(direction):
        if d != 0:
            mono = tuple(int(j == m) for m in range(n_vars))
            carrier[mono] = Fraction(d)
    cur = {zero: Fraction(1)}
    for n in range(1, order + 1):
        nxt: dict = {}
        for m1, c1 in cur.items():
            for m2, c2 in carrier.items():
                key = tuple(a + b for a, b in zip(m1, m2))
                nxt[key] = nxt.get(key, Fraction(0)) + c1 * c2
        cur = {k: v for k, v in nxt.items() if v != 0}
        powers.append({k: v / factorial(n) for k, v in cur.items()})
    return powers


def _layers_of(psi: EpsSeries) -> list:
    """Coefficient of each jet power as a map (offset, log monomial) -> value."""
    D = psi.eps_order
    n = psi.cfg.N
    powers = _carrier_powers(psi.direction, n, D)
    layers = [dict() for _ in range(D + 1)]
    for l, jet in psi.terms.items():
        for s in range(D + 1):
            acc: dict = {}
            for m in range(s + 1):
                c = jet[s - m]
                if c == 0:
                    continue
                for mono, w in powers[m].items():
                    acc[mono] = acc.get(mono, Fraction(0)) + c * w
            for mono, v in acc.items():
                if v != 0:
                    layers[s][(l, mono)] = v
    return layers


def _valuation(layers) -> Optional[int]:
    for s, layer in enumerate(layers):
        if any(v != 0 for v in layer.values()):
            return s
    return None


def _in_span_subtract(lead: dict, pivots: list) -> Optional[list]:
    """Coefficients writing lead over the pivot leads, or None."""
    if not pivots:
        return None
    keys = sorted(set(lead) | {k for p in pivots for k in p})
    if not keys:
        return None
    M = tuple(
        tuple(p.get(key, Fraction(0)) for p in pivots) for key in keys
    )
    rhs = [lead.get(key, Fraction(0)) for key in keys]
    sol = intlin.solve_rational(M, rhs)
    return list(sol) if sol is not None else None


def extract_log_basis(psis: Sequence[EpsSeries], truncation: Optional[int] = None) -> list:
    """Independent log solutions from the jet filtration of the moved series.

    Items are processed by increasing jet valuation; each leading layer is
    tested exactly against the span of the leads already emitted, with exact
    elimination raising the valuation on dependence.  The emitted leads are
    independent by construction and their valuations are the weights.
    """
    if not psis:
        raise PreconditionError("no perturbed series supplied")
    gamma = psis[0].gamma
    D = min(p.eps_order for p in psis)
    trunc = min(p.truncation for p in psis)
    if truncation is not None:
        trunc = min(trunc, truncation)
    for p in psis:
        if p.gamma != gamma:
            raise InternalConsistencyError("perturbed series bases disagree")
    pool = []
    for idx, p in enumerate(psis):
        layers = [dict(layer) for layer in _layers_of(p)[: D + 1]]
        pool.append([layers, idx])
    emitted = []  # (weight, lead dict, full layers)
    results = []
    while pool:
        vals = []
        for layers, idx in pool:
            w = _valuation(layers)
            if w is None:
                raise InternalConsistencyError(
                    "a perturbed series eliminated to zero through every jet "
                    "order; the series are not independent to this depth"
                )
            vals.append((w, idx))
        w, idx = min(vals)
        pos = next(i for i, item in enumerate(pool) if item[1] == idx)
        layers = pool[pos][0]
        lead = {k: v for k, v in layers[w].items() if v != 0}
        coeffs = _in_span_subtract(lead, [e[1] for e in emitted])
        if coeffs is not None:
            for c, (wp, _, full) in zip(coeffs, emitted):
                if c == 0:
                    continue
                shift = w - wp
                for s in range(w, D + 1):
                    src = full[s - shift]
                    dst = layers[s]
                    for k, v in src.items():
                        nv = dst.get(k, Fraction(0)) - c * v
                        if nv == 0:
                            dst.pop(k, None)
                        else:
                            dst[k] = nv
            if any(v != 0 for v in layers[w].values()):
                raise InternalConsistencyError("elimination failed to clear the lead")
            continue
        emitted.append((w, lead, [dict(layer) for layer in layers]))
        terms: dict = {}
        for (l, mono), v in lead.items():
            if h_degree(l) <= trunc:
                terms.setdefault(l, {})[mono] = v
        results.append(
            LogSeries(psis[0].cfg, psis[0].lattice, gamma, trunc, w, terms)
        )
        pool.pop(pos)
    return results


def full_basis(sys: GkzSystem, T: geom.Triangulation, truncation: int = 8) -> list:
    """A volume-sized solution set for a nonresonant parameter.

    Exponent choices over all simplices are grouped by class modulo the
    lattice; singleton classes give plain series and each class of size b
    contributes b log solutions through the jet construction.
    """
    report = is_nonresonant(sys)
    if not report.nonresonant:
        raise ResonanceError(
            "full bases require a nonresonant parameter; facet "
            f"{report.first_integral_form()} takes an integral value"
        )
    groups: list = []  # [rep gamma, [(J, gv), ...]]
    for J in sorted(T.simplices):
        for gv in gamma_choices(sys, J):
            placed = False
            for group in groups:
                diff = tuple(
                    Fraction(a) - Fraction(b) for a, b in zip(gv.gamma, group[0])
                )
                if all(d.denominator == 1 for d in diff) and sys.lattice.contains(
                    tuple(int(d) for d in diff)
                ):
                    group[1].append((J, gv))
                    placed = True
                    break
            if not placed:
                groups.append([gv.gamma, [(J, gv)]])
    alpha_prime = None
    out = []
    for rep, members in groups:
        if len(members) == 1:
            out.append(plain_as_log(gamma_series(sys, members[0][1], truncation)))
            continue
        if alpha_prime is None:
            alpha_prime = choose_generic_direction(sys, T)
        b = len(members)
        psis = perturbed_solutions(sys, T, rep, alpha_prime, b, truncation)
        if len(psis) != b:
            raise InternalConsistencyError("class size and motion count disagree")
        out.extend(extract_log_basis(psis, truncation))
    vol = geom.normalized_volume(sys.cfg)
    if len(out) != vol:
        raise InternalConsistencyError(
            f"basis size {len(out)} does not match the volume {vol}"
        )
    return out
