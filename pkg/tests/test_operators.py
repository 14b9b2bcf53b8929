import math

import numpy as np
import pytest

from dergreen.errors import DegenerateReduction
from dergreen.exppoly import (BivariateExpPoly, ExpPoly, HalfPlane,
                              PiecewiseKernel, Region)
from dergreen.operators import (DiffPoly, ReflectionOperator, apply,
                                apply_kernel, companion, compose,
                                reduce_operator, reduction_stats)

SQRT2 = math.sqrt(2.0)

CUBIC = ReflectionOperator.make([1, 0, 0, 0], [1, 0, 0, 1])
SQRT2_OP = ReflectionOperator.make([SQRT2, 1], [1, 0])


def random_operator(rng, max_order=4):
    n = rng.integers(1, max_order + 1)
    while True:
        a = rng.uniform(-3, 3, n + 1)
        b = rng.uniform(-3, 3, n + 1)
        if abs(a[-1]) > 1e-3 or abs(b[-1]) > 1e-3:
            return ReflectionOperator.make(a, b)


class TestCompose:
    def test_commutative_subring(self):
        P = ReflectionOperator.make([0, 0], [1, 1])      # D + 1
        Q = ReflectionOperator.make([0, 0], [-1, 1])     # D - 1
        assert compose(P, Q) == ReflectionOperator.make([0, 0, 0], [-1, 0, 1])

    def test_reflection_square(self):
        P = ReflectionOperator.make([1, 1], [0, 0])      # phi*D + phi*
        sq = compose(P, P)
        assert sq == ReflectionOperator.make([0, 0, 0], [1, 0, -1])

    def test_sign_rule(self):
        D = ReflectionOperator.derivative()
        phi = ReflectionOperator.reflection()
        assert compose(D, phi) == ReflectionOperator.make([0, -1], [0, 0])
        assert compose(phi, D) == ReflectionOperator.make([0, 1], [0, 0])

    def test_trailing_pair_collapse_detected(self):
        # (phi* + 1) D: top-order pair cancels under reduction
        P = ReflectionOperator.make([0, 1], [0, 1])
        R = companion(P)
        assert compose(R, P).order < 2


class TestCompanion:
    def test_cubic_example(self):
        assert companion(CUBIC) == \
            ReflectionOperator.make([1, 0, 0, 0], [-1, 0, 0, 1])

    def test_sqrt2_example(self):
        assert companion(SQRT2_OP) == \
            ReflectionOperator.make([SQRT2, 1], [-1, 0])

    def test_pure_derivative_fixed(self):
        D = ReflectionOperator.derivative()
        assert companion(D) == D


class TestReduce:
    def test_cubic_gives_order_six(self):
        S = reduce_operator(CUBIC)
        assert S == DiffPoly.make([0, 0, 0, 0, 0, 0, 1])

    def test_sqrt2_gives_one_minus_dsq(self):
        S = reduce_operator(SQRT2_OP)
        assert S.order == 2
        assert S.c[0] == pytest.approx(1.0, abs=1e-12)
        assert S.c[1] == 0.0
        assert S.c[2] == pytest.approx(-1.0, abs=1e-12)

    def test_even_symbol_degenerates(self):
        L = ReflectionOperator.make([0, 0, 0, 1], [0, 0, 0, 1])
        with pytest.raises(DegenerateReduction):
            reduce_operator(L)

    def test_cross_check_stays_exact(self):
        before = dict(reduction_stats)
        rng = np.random.default_rng(11)
        for _ in range(200):
            try:
                reduce_operator(random_operator(rng))
            except DegenerateReduction:
                pass
        assert reduction_stats["tolerance"] == before["tolerance"]


class TestApply:
    def test_kernel_function(self):
        P = ReflectionOperator.make([0, 0, 0], [-1, 0, 1])  # D^2 - 1
        assert apply(P, ExpPoly.exponential(1.0)).is_zero

    def test_reflection_of_odd_function(self):
        out = apply(ReflectionOperator.reflection(), ExpPoly.sin())
        for x in (0.2, -0.7):
            assert out.eval(x) == pytest.approx(-math.sin(x), abs=1e-14)

    def test_companion_applied_to_sine(self):
        # R = D^3 + phi* - 1 on sin t; oracle: exact derivative arithmetic
        # (-cos t) + (-sin t) - sin t, confirmed by finite differences
        R = companion(CUBIC)
        out = apply(R, ExpPoly.sin())
        h = 1e-2
        f = ExpPoly.sin()
        for x in (-0.8, 0.1, 0.9):
            fd3 = (f.eval(x + 2 * h) - 2 * f.eval(x + h)
                   + 2 * f.eval(x - h) - f.eval(x - 2 * h)) / (2 * h ** 3)
            expect = fd3 + math.sin(-x) - math.sin(x)
            assert out.eval(x) == pytest.approx(expect, rel=1e-3, abs=1e-3)
            assert out.eval(x) == pytest.approx(
                -math.cos(x) - 2 * math.sin(x), abs=1e-13)


class TestApplyKernel:
    def test_identity(self):
        K = PiecewiseKernel.single(
            1.0, BivariateExpPoly.from_product(ExpPoly.monomial(1),
                                               ExpPoly.monomial(1)))
        out = apply_kernel(ReflectionOperator.identity(), K)
        assert out.eval(0.5, 0.25) == pytest.approx(K.eval(0.5, 0.25))

    def test_derivative_of_product(self):
        K = PiecewiseKernel.single(
            1.0, BivariateExpPoly.from_product(ExpPoly.monomial(1),
                                               ExpPoly.monomial(1)))
        out = apply_kernel(ReflectionOperator.derivative(), K)
        assert out.eval(0.7, 0.4) == pytest.approx(0.4)

    def test_reflection_splits_regions(self):
        lower = BivariateExpPoly.constant(1.0)
        upper = BivariateExpPoly.constant(2.0)
        K = PiecewiseKernel.from_pieces(1.0, [
            (Region.of(HalfPlane(1, -1, 0, False)), lower),
            (Region.of(HalfPlane(-1, 1, 0, True)), upper),
        ])
        out = apply_kernel(ReflectionOperator.reflection(), K)
        assert out.eval(0.5, 0.0) == pytest.approx(2.0)   # K(-0.5, 0)
        assert out.eval(-0.5, 0.0) == pytest.approx(1.0)

    def test_companion_yields_four_regions(self):
        from dergreen.boundary import BoundarySpec
        from dergreen.greens import BVProblem, green_build
        from _reference import CUBIC_ALPHA, CUBIC_BETA, cubic_der_kernel

        R = companion(CUBIC)
        S = reduce_operator(CUBIC)
        from dergreen.boundary import extend_conditions
        B = BoundarySpec.make(1.0, CUBIC_ALPHA, CUBIC_BETA)
        E = extend_conditions(B, R)
        G = green_build(BVProblem(S, BoundarySpec.make(1.0, E.Gamma,
                                                       E.Theta), 1.0))
        Gbar = apply_kernel(R, G)
        assert len(Gbar.pieces) == 4
        rng = np.random.default_rng(13)
        for t, s in rng.uniform(-1, 1, (40, 2)):
            assert Gbar.eval(t, s) == pytest.approx(
                cubic_der_kernel(t, s), abs=1e-12)


class TestAlgebraicInvariants:
    def test_companion_commutes(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            L = random_operator(rng)
            R = companion(L)
            assert compose(R, L) == compose(L, R)

    def test_reduction_purity(self):
        rng = np.random.default_rng(19)
        for _ in range(50):
            L = random_operator(rng)
            S = compose(companion(L), L)
            assert all(x == 0 for x in S.a)
            assert all(S.b[k] == 0 for k in range(1, S.order + 1, 2))

    def test_apply_is_operator_homomorphism(self):
        rng = np.random.default_rng(23)
        xs = rng.uniform(-1, 1, 20)
        for _ in range(10):
            P, Q = random_operator(rng, 3), random_operator(rng, 3)
            u = ExpPoly.exponential(0.5, (1.0, 0.5)) + ExpPoly.sin(1.2)
            lhs = apply(compose(P, Q), u)
            rhs = apply(P, apply(Q, u))
            for x in xs:
                a, b = lhs.eval(x), rhs.eval(x)
                assert a == pytest.approx(b, rel=1e-10, abs=1e-9)

    def test_extreme_coefficients_exact(self):
        rng = np.random.default_rng(29)
        for _ in range(50):
            L = random_operator(rng)
            n = L.order
            try:
                c = reduce_operator(L).c
            except DegenerateReduction:
                continue
            assert c[0] == L.a[0] ** 2 - L.b[0] ** 2
            full = list(c) + [0.0] * (2 * n + 1 - len(c))
            assert full[2 * n] == (-1.0) ** n * (L.a[n] ** 2 - L.b[n] ** 2)
