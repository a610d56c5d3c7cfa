"""Operator arithmetic, valuations, valuation raising, contiguity inverses."""

from fractions import Fraction

import pytest

import gkz
from gkz import geom, intlin, logseries, series, weyl
from gkz.weyl import DiffOperator

from conftest import E1_COLUMNS, E3_COLUMNS

F = Fraction
Z4 = (0, 0, 0, 0)
U1 = (-1, 1, 1, -1)


def e(i, n=4):
    return tuple(int(k == i) for k in range(n))


def v_op(j, n=4, power=1):
    return DiffOperator(n, {(tuple(power * x for x in e(j, n)), (0,) * n): F(1)})


class TestDiffOperatorAlgebra:
    def test_zero_and_one(self):
        assert DiffOperator.zero(4).is_zero()
        one = DiffOperator.one(4)
        assert one.terms == {(Z4, Z4): F(1)}

    def test_addition_cancels(self):
        a = DiffOperator.d_monomial((1, 0, 0, 0))
        assert (a - a).is_zero()
        b = DiffOperator.d_monomial((0, 1, 0, 0))
        assert (a + b) - b == a

    def test_zero_coefficients_dropped(self):
        op = DiffOperator(4, {(Z4, (1, 0, 0, 0)): F(0)})
        assert op.is_zero()

    def test_d_monomial_rejects_negative(self):
        with pytest.raises(ValueError):
            DiffOperator.d_monomial((-1, 0, 0, 0))

    def test_compose_normal_orders(self):
        d1 = DiffOperator.d_monomial((1, 0, 0, 0))
        assert d1.compose(v_op(0)).terms == {
            ((1, 0, 0, 0), (1, 0, 0, 0)): F(1),
            (Z4, Z4): F(1),
        }

    def test_compose_laurent_coefficient(self):
        # d1 * v1^(-1) = v1^(-1) d1 - v1^(-2)
        d1 = DiffOperator.d_monomial((1, 0, 0, 0))
        got = d1.compose(v_op(0, power=-1))
        assert got.terms == {
            ((-1, 0, 0, 0), (1, 0, 0, 0)): F(1),
            ((-2, 0, 0, 0), Z4): F(-1),
        }

    def test_compose_second_derivative(self):
        # d1^2 * v1 = v1 d1^2 + 2 d1
        d11 = DiffOperator.d_monomial((2, 0, 0, 0))
        got = d11.compose(v_op(0))
        assert got.terms == {
            ((1, 0, 0, 0), (2, 0, 0, 0)): F(1),
            (Z4, (1, 0, 0, 0)): F(2),
        }

    def test_compose_associative_randomized(self, rng):
        def random_op():
            terms = {}
            for _ in range(rng.randint(1, 3)):
                m = tuple(rng.randint(-1, 1) for _ in range(4))
                u = tuple(rng.randint(0, 2) for _ in range(4))
                terms[(m, u)] = F(rng.randint(-3, 3), rng.randint(1, 4))
            return DiffOperator(4, terms)

        for _ in range(15):
            P, Q, R = random_op(), random_op(), random_op()
            assert P.compose(Q).compose(R) == P.compose(Q.compose(R))

    def test_canonical_commutator(self):
        # [d_i, v_j] = delta_ij as operators
        one = DiffOperator.one(4)
        for i in range(4):
            for j in range(4):
                di = DiffOperator.d_monomial(e(i))
                lhs = di.compose(v_op(j))
                rhs = v_op(j).compose(di) + (one if i == j else DiffOperator.zero(4))
                assert lhs == rhs

    def test_shift_degree(self):
        assert DiffOperator.one(4).shift_degree() == 0
        assert DiffOperator.d_monomial((2, 0, 0, 1)).shift_degree() == 3
        mixed = DiffOperator(4, {((0, 1, 0, 0), (0, 1, 0, 0)): F(1)})
        assert mixed.shift_degree() == 0


class TestApply:
    def test_identity_fixes_series(self, e1_sys):
        gv = gkz.gamma_choices(e1_sys, (0, 1, 3))[0]
        s = gkz.gamma_series(e1_sys, gv, truncation=8)
        out = gkz.apply(DiffOperator.one(4), s)
        assert weyl.series_equal(out, s)

    def test_euler_acts_as_scalar(self, e1_sys):
        gv = gkz.gamma_choices(e1_sys, (0, 1, 3))[0]
        s = gkz.gamma_series(e1_sys, gv, truncation=8)
        out = gkz.apply(weyl.euler_operator(e1_sys.cfg, 0), s)
        scaled = series.GammaSeries(
            s.cfg,
            s.lattice,
            s.gamma,
            s.sector,
            s.truncation,
            {l: F(1, 5) * c for l, c in s.terms.items()},
        )
        assert weyl.series_equal(out, scaled)

    def test_box_annihilates(self, e1_sys):
        gv = gkz.gamma_choices(e1_sys, (0, 1, 3))[0]
        s = gkz.gamma_series(e1_sys, gv, truncation=8)
        box = gkz.box_operator(e1_sys, U1)
        assert gkz.apply(box, s).is_zero()

    def test_linearity(self, e1_sys):
        gv = gkz.gamma_choices(e1_sys, (0, 1, 3))[0]
        s = gkz.gamma_series(e1_sys, gv, truncation=8)
        P = weyl.euler_operator(e1_sys.cfg, 1)
        Q = DiffOperator.d_monomial((0, 0, 1, 0))
        a, b = F(2, 3), F(-5)
        combined = gkz.apply(P.scale(a) + Q.scale(b), s)
        parts = [(a, gkz.apply(P, s)), (b, gkz.apply(Q, s))]
        for z, poly in combined.terms.items():
            want: dict = {}
            for coef, part in parts:
                if z in part.terms:
                    weyl.logpoly_add_into(want, weyl.logpoly_scale(part.terms[z], coef))
            assert weyl.logpoly_clean(poly) == weyl.logpoly_clean(want)

    def test_leibniz_delta(self, e1_sys):
        # d_i (v_j s) - v_j (d_i s) = delta_ij s, via nested application
        gv = gkz.gamma_choices(e1_sys, (0, 1, 3))[0]
        s = gkz.gamma_series(e1_sys, gv, truncation=8)
        one = DiffOperator.one(4)
        for i, j in ((1, 1), (1, 2), (3, 0), (2, 2)):
            di = DiffOperator.d_monomial(e(i))
            nested = gkz.apply(di, gkz.apply(v_op(j), s))
            resid_op = di.compose(v_op(j)) - v_op(j).compose(di)
            if i == j:
                resid_op = resid_op - one
            assert gkz.apply(resid_op, s).is_zero()
            direct = gkz.apply(di.compose(v_op(j)), s)
            assert weyl.series_equal(nested, direct)

    def test_log_rule(self, e1_T):
        # d_i(v^c log v_i) = v^(c-1) (c log v_i + 1), checked through a
        # genuine log solution
        sys = gkz.build_system(E1_COLUMNS, (F(1), F(1, 2), F(1, 2)))
        basis = gkz.full_basis(sys, e1_T, truncation=8)
        log_member = next(s for s in basis if s.weight == 1)
        for _, op in gkz.annihilators(sys):
            assert gkz.apply(op, log_member).is_zero()

    def test_too_deep_operator_yields_empty_window(self, e1_sys):
        # an operator digging past the stored terms leaves nothing safe to
        # report, so the residual is vacuously zero on a negative window
        gv = gkz.gamma_choices(e1_sys, (0, 1, 3))[0]
        s = gkz.gamma_series(e1_sys, gv, truncation=4)
        out = gkz.apply(DiffOperator.d_monomial((5, 0, 0, 0)), s)
        assert out.terms == {}
        assert out.truncation < 0
        assert out.is_zero()


class TestSeriesEqual:
    def test_reflexive(self, e1_sys):
        gv = gkz.gamma_choices(e1_sys, (0, 1, 3))[0]
        s = gkz.gamma_series(e1_sys, gv, truncation=6)
        assert weyl.series_equal(s, s)

    def test_gamma_mismatch(self, e1_sys, e2_sys):
        s1 = gkz.gamma_series(e1_sys, gkz.gamma_choices(e1_sys, (0, 1, 3))[0], 6)
        s2 = gkz.gamma_series(e2_sys, gkz.gamma_choices(e2_sys, (0, 1))[0], 6)
        assert not weyl.series_equal(s1, s2)

    def test_window_restriction(self, e1_sys):
        gv = gkz.gamma_choices(e1_sys, (0, 1, 3))[0]
        s = gkz.gamma_series(e1_sys, gv, truncation=8)
        deep = tuple(4 * x for x in U1)
        tampered = series.GammaSeries(
            s.cfg,
            s.lattice,
            s.gamma,
            s.sector,
            s.truncation,
            {**s.terms, deep: s.terms[deep] + 1},
        )
        assert not weyl.series_equal(s, tampered)
        assert weyl.series_equal(s, tampered, window=6)


class TestValuation:
    def test_constant_operator(self, e1_sys):
        assert weyl.valuation(DiffOperator.one(4), e1_sys.cfg, (0, 1, 0)) == 0

    def test_single_derivative(self, e1_sys):
        d4 = DiffOperator.d_monomial((0, 0, 0, 1))
        assert weyl.valuation(d4, e1_sys.cfg, (0, 1, 0)) == 1

    def test_box_terms_share_valuation(self, e1_sys):
        box = gkz.box_operator(e1_sys, U1)
        for form in e1_sys.facets:
            vals = {
                weyl.facet_valuation_of_monomial(e1_sys.cfg, u, form)
                for (_, u) in box.terms
            }
            assert len(vals) == 1

    def test_zero_operator_rejected(self, e1_sys):
        with pytest.raises(ValueError):
            weyl.valuation(DiffOperator.zero(4), e1_sys.cfg, (0, 1, 0))


class TestRaiseValuation:
    def test_frozen_example(self, e1_sys):
        P = weyl.raise_valuation(e1_sys, Z4, (0, 1, 0))
        assert P.terms == {
            ((0, 1, 0, 0), (0, 1, 0, 0)): F(3),
            ((0, 0, 0, 1), (0, 0, 0, 1)): F(3),
        }

    def test_valuation_strictly_raised(self, e1_sys):
        for form in e1_sys.facets:
            for u in (Z4, (0, 0, 0, 1), (1, 0, 1, 0)):
                before = weyl.facet_valuation_of_monomial(e1_sys.cfg, u, form)
                P = weyl.raise_valuation(e1_sys, u, form)
                assert weyl.valuation(P, e1_sys.cfg, form) > before
                for other in e1_sys.facets:
                    base = weyl.facet_valuation_of_monomial(
                        e1_sys.cfg, u, other
                    )
                    assert weyl.valuation(P, e1_sys.cfg, other) >= base

    def test_ideal_equivalence(self, e1_sys, e1_T):
        basis = gkz.basis_for_triangulation(e1_sys, e1_T, truncation=8)
        for u in (Z4, (0, 0, 0, 1)):
            for form in e1_sys.facets:
                P = weyl.raise_valuation(e1_sys, u, form)
                diff = P - DiffOperator.d_monomial(u)
                for s in basis:
                    assert gkz.apply(diff, s).is_zero()

    def test_resonant_value_rejected(self):
        sys = gkz.build_system(E1_COLUMNS, (F(1, 2), F(0), F(1, 2)))
        with pytest.raises(gkz.PreconditionError):
            weyl.raise_valuation(sys, Z4, (0, 1, 0))


class TestBoxRewrite:
    def test_trivial_factor(self, e1_sys):
        u = (0, 1, 0, 0)
        assert weyl.box_rewrite(e1_sys.cfg, u, u) == (Z4, Z4)

    def test_frozen_relation(self, e1_sys):
        got = weyl.box_rewrite(e1_sys.cfg, (1, 0, 0, 1), (0, 1, 1, 0))
        assert got == (Z4, (1, -1, -1, 1))

    def test_witness_properties(self, e1_sys):
        w, u = (1, 1, 0, 0), Z4
        w_prime, lam = weyl.box_rewrite(e1_sys.cfg, w, u)
        cfg = e1_sys.cfg
        target = tuple(
            sum((w[j] - u[j]) * cfg.columns[j][k] for j in range(4))
            for k in range(3)
        )
        image = tuple(
            sum(w_prime[j] * cfg.columns[j][k] for j in range(4))
            for k in range(3)
        )
        assert image == target
        assert lam == tuple(w[j] - w_prime[j] - u[j] for j in range(4))
        assert e1_sys.lattice.contains(lam)

    def test_unrepresentable_returns_none(self, e2_sys):
        # A(w - u) = (1, 5) needs a single column with second entry 5
        assert weyl.box_rewrite(e2_sys.cfg, (0, 0, 0, 2), (0, 1, 0, 0)) is None


class TestContiguityInverse:
    def test_e1_certified_inverse(self, e1_sys):
        res = gkz.contiguity_inverse(e1_sys, 3, truncation=8)
        assert res.basis_size == 2
        assert res.rounds == 10
        assert res.certificate_window == 8
        assert len(res.operator.terms) == 17
        T = geom.some_regular_triangulation(e1_sys.cfg)
        basis = gkz.full_basis(e1_sys, T, truncation=8)
        R = res.operator.compose(DiffOperator.d_monomial((0, 0, 0, 1)))
        for s in basis:
            assert weyl.series_equal(gkz.apply(R, s), s)

    def test_second_configuration_invertible(self, e2_sys):
        # the deeper saturation point of this configuration forces an
        # inverse operator whose shift degree exceeds the requested window,
        # exercising the deepened certificate basis
        res = gkz.contiguity_inverse(e2_sys, 3, truncation=4)
        assert not res.operator.is_zero()
        assert res.certificate_window == 4
        assert res.basis_size == 3

    def test_resonant_rejected(self):
        sys = gkz.build_system(E1_COLUMNS, (F(1, 2), F(0), F(1, 2)))
        with pytest.raises(gkz.ResonanceError):
            gkz.contiguity_inverse(sys, 3, truncation=8)

    def test_pyramid_apex_nonresonant_succeeds(self):
        # the apex derivative of a pyramid is still invertible whenever the
        # parameter is nonresonant: v4 d4 equals the third homogeneity
        # operator, which acts as the nonzero scalar alpha_3
        sys = gkz.build_system(E3_COLUMNS, (F(1, 5), F(1, 3), F(1, 7)))
        res = gkz.contiguity_inverse(sys, 3, truncation=8)
        T = geom.some_regular_triangulation(sys.cfg)
        basis = gkz.full_basis(sys, T, truncation=8)
        R = res.operator.compose(DiffOperator.d_monomial((0, 0, 0, 1)))
        for s in basis:
            assert weyl.series_equal(gkz.apply(R, s), s)

    def test_pyramid_apex_resonant_rejected(self):
        # the genuinely non-invertible apex parameter alpha_3 = 0 is
        # resonant, so the precheck refuses the construction
        sys = gkz.build_system(E3_COLUMNS, (F(1, 5), F(1, 3), F(0)))
        with pytest.raises(gkz.ResonanceError):
            gkz.contiguity_inverse(sys, 3, truncation=8)

    def test_effort_bound_reported(self, e1_sys):
        with pytest.raises(gkz.EffortExceededError):
            gkz.contiguity_inverse(e1_sys, 3, truncation=8, effort=0)

    def test_supplied_basis_used(self, e1_sys, e1_T):
        basis = gkz.basis_for_triangulation(e1_sys, e1_T, truncation=8)
        res = gkz.contiguity_inverse(e1_sys, 3, truncation=8, basis=basis)
        assert res.basis_size == len(basis)


class TestAnnihilationReport:
    def test_all_flags_true_on_basis(self, e1_sys, e1_T):
        basis = gkz.basis_for_triangulation(e1_sys, e1_T, truncation=8)
        report = gkz.annihilation_report(e1_sys, basis)
        assert report
        assert all(ok for (_, _, ok) in report)
        labels = {label for (_, label, _) in report}
        assert any(label.startswith("euler") for label in labels)
        assert any(label.startswith("box") for label in labels)

    def test_wrong_series_flagged(self, e1_sys):
        gv = gkz.gamma_choices(e1_sys, (0, 1, 3))[0]
        wrong = series.GammaSeries(
            e1_sys.cfg,
            e1_sys.lattice,
            gv.gamma,
            gv.sector,
            8,
            {Z4: F(1), U1: F(1)},
        )
        report = gkz.annihilation_report(e1_sys, [wrong])
        assert any(not ok for (_, _, ok) in report)
