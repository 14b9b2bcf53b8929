import math

import numpy as np
import pytest

from dergreen.boundary import BoundarySpec, conditions_residual
from dergreen.errors import NonUniqueBVP
from dergreen.exppoly import BivariateExpPoly, ExpPoly, PiecewiseKernel
from dergreen.greens import (BVProblem, compose_kernels, green_build,
                             green_verify, solve_with_kernel,
                             transpose_kernel)
from dergreen.operators import (DiffPoly, ReflectionOperator, apply_diffpoly,
                                apply_kernel, companion, reduce_operator)

from _reference import (CUBIC_ALPHA, CUBIC_BETA, E2, cubic_der_kernel,
                        cubic_factor_kernel, cubic_reduced_kernel,
                        cubic_solution, sqrt2_factor_kernel, sample_points)


def string_problem():
    B = BoundarySpec.make(1.0, [[1, 0], [0, 0]], [[0, 0], [1, 0]])
    return BVProblem(DiffPoly.make([0, 0, 1]), B, 1.0)


def cubic_factor_problem():
    B = BoundarySpec.make(1.0, CUBIC_ALPHA, CUBIC_BETA)
    return BVProblem(DiffPoly.make([0, 0, 0, 1]), B, 1.0)


def sqrt2_factor_problem():
    B = BoundarySpec.make(1.0, [[1.0]], [[-1.0]])
    return BVProblem(DiffPoly.make([1.0, 1.0]), B, 1.0)


class TestGreenBuild:
    def test_string_kernel(self):
        G = green_build(string_problem())
        for t, s in sample_points(50, seed=1):
            want = -(1 - t) * (1 + s) / 2 if s <= t else -(1 - s) * (1 + t) / 2
            assert G.eval(t, s) == pytest.approx(want, abs=1e-12)

    def test_string_kernel_brute_force_properties(self):
        # independent oracle: solve u'' = -2 with zero boundary values
        G = green_build(string_problem())
        u = solve_with_kernel(G, ExpPoly.constant(-2.0))
        for t in np.linspace(-1, 1, 11):
            assert u.eval(t) == pytest.approx(1 - t * t, abs=1e-12)

    def test_cubic_factor_kernel(self):
        G = green_build(cubic_factor_problem())
        for t, s in sample_points(100, seed=2):
            assert G.eval(t, s) == pytest.approx(cubic_factor_kernel(t, s),
                                                 abs=1e-12)

    def test_sqrt2_factor_kernel(self):
        G = green_build(sqrt2_factor_problem())
        for t, s in sample_points(100, seed=3):
            assert G.eval(t, s) == pytest.approx(sqrt2_factor_kernel(t, s),
                                                 abs=1e-12)
        # diagonal resolves to the s <= t branch
        assert G.eval(0.3, 0.3) == pytest.approx(E2 / (E2 - 1))

    def test_nonunique_detected(self):
        # u'' = h with u'(−1) = u'(1) = 0 admits constants
        B = BoundarySpec.make(1.0, [[0, 1], [0, 0]], [[0, 0], [0, 1]])
        with pytest.raises(NonUniqueBVP):
            green_build(BVProblem(DiffPoly.make([0, 0, 1]), B, 1.0))


class TestGreenVerify:
    def test_built_kernels_pass(self):
        for prob in (string_problem(), cubic_factor_problem(),
                     sqrt2_factor_problem()):
            G = green_build(prob)
            assert green_verify(prob, G).passed

    def test_corrupted_jump_fails(self):
        prob = string_problem()
        G = green_build(prob)
        # doubling one piece breaks the diagonal jump
        bad = PiecewiseKernel(G.T, (
            (G.pieces[0][0], G.pieces[0][1].scale(2.0)),
            G.pieces[1],
        ))
        report = green_verify(prob, bad)
        assert not report.passed
        names = [c.name for c in report.checks if not c.ok]
        assert any("jump" in n for n in names)

    def test_composed_order_six_kernel_passes(self):
        L = ReflectionOperator.make([1, 0, 0, 0], [1, 0, 0, 1])
        R = companion(L)
        S = reduce_operator(L)
        from dergreen.boundary import extend_conditions
        B = BoundarySpec.make(1.0, CUBIC_ALPHA, CUBIC_BETA)
        E = extend_conditions(B, R)
        B6 = BoundarySpec.make(1.0, E.Gamma, E.Theta)
        G1 = green_build(cubic_factor_problem())
        G = compose_kernels(G1, G1)
        assert green_verify(BVProblem(S, B6, 1.0), G).passed


class TestCompose:
    def test_cubic_composition_matches_closed_form(self):
        G1 = green_build(cubic_factor_problem())
        G = compose_kernels(G1, G1)
        assert G.eval(0.0, 0.5) == pytest.approx(
            cubic_reduced_kernel(0.0, 0.5), abs=1e-9)
        assert G.eval(0.5, 0.0) == pytest.approx(
            cubic_reduced_kernel(0.5, 0.0), abs=1e-9)
        for t, s in sample_points(100, seed=4):
            assert G.eval(t, s) == pytest.approx(cubic_reduced_kernel(t, s),
                                                 abs=1e-10)

    def test_sqrt2_composition_sign(self):
        # minus the self-transposed composition gives the displayed branch
        G1 = green_build(sqrt2_factor_problem())
        K = compose_kernels(G1, transpose_kernel(G1))
        for t, s in sample_points(60, seed=5):
            want = -(math.exp(s - t + 2) + math.exp(t - s)) / (2 * E2 - 2) \
                if s <= t else \
                -(math.exp(s - t) + math.exp(-s + t + 2)) / (2 * E2 - 2)
            assert -K.eval(t, s) == pytest.approx(want, abs=1e-12)

    def test_zero_kernel(self):
        G1 = green_build(string_problem())
        Z = G1.scale(0.0)
        K = compose_kernels(G1, Z)
        for t, s in sample_points(10, seed=6):
            assert K.eval(t, s) == 0


class TestTranspose:
    def test_branch_swap(self):
        G1 = green_build(sqrt2_factor_problem())
        Gt = transpose_kernel(G1)
        assert Gt.eval(-0.5, 0.5) == pytest.approx(
            math.exp(-0.5 - 0.5 + 2) / (E2 - 1))

    def test_involution(self):
        G1 = green_build(cubic_factor_problem())
        Gtt = transpose_kernel(transpose_kernel(G1))
        for t, s in sample_points(30, seed=7):
            assert Gtt.eval(t, s) == pytest.approx(G1.eval(t, s), abs=1e-14)

    def test_symmetric_kernel_fixed(self):
        G = green_build(string_problem())
        Gt = transpose_kernel(G)
        for t, s in sample_points(40, seed=8):
            assert Gt.eval(t, s) == pytest.approx(G.eval(t, s), abs=1e-10)


class TestSolveWithKernel:
    def test_string_constant_load(self):
        G = green_build(string_problem())
        u = solve_with_kernel(G, ExpPoly.constant(-2.0))
        for t in np.linspace(-1, 1, 9):
            assert u.eval(t) == pytest.approx(1 - t * t, abs=1e-12)

    def test_cubic_der_kernel_solution(self):
        L = ReflectionOperator.make([1, 0, 0, 0], [1, 0, 0, 1])
        R = companion(L)
        S = reduce_operator(L)
        from dergreen.boundary import extend_conditions
        B = BoundarySpec.make(1.0, CUBIC_ALPHA, CUBIC_BETA)
        E = extend_conditions(B, R)
        G = green_build(BVProblem(
            S, BoundarySpec.make(1.0, E.Gamma, E.Theta), 1.0))
        Gbar = apply_kernel(R, G)
        u = solve_with_kernel(Gbar, ExpPoly.sin())
        assert u.eval(0.0) == pytest.approx(cubic_solution(0.0), abs=1e-12)
        for t in np.linspace(-1, 1, 9):
            assert u.eval(t) == pytest.approx(cubic_solution(t), abs=1e-11)

    def test_zero_rhs(self):
        G = green_build(string_problem())
        assert solve_with_kernel(G, ExpPoly.zero()).is_zero


class TestInvariants:
    def _random_problem(self, rng, order):
        while True:
            c = rng.uniform(-3, 3, order + 1)
            if abs(c[-1]) < 0.5:
                continue
            alpha = rng.uniform(-2, 2, (order, order))
            beta = rng.uniform(-2, 2, (order, order))
            try:
                prob = BVProblem(DiffPoly.make(c),
                                 BoundarySpec.make(1.0, alpha, beta), 1.0)
                G = green_build(prob)
                return prob, G
            except NonUniqueBVP:
                continue

    def test_random_problems_verify_and_solve(self):
        rng = np.random.default_rng(9)
        h = ExpPoly.sin(1.1) + ExpPoly.exponential(0.4)
        for order in (2, 3):
            for _ in range(5):
                prob, G = self._random_problem(rng, order)
                assert green_verify(prob, G).passed
                u = solve_with_kernel(G, h)
                res = apply_diffpoly(prob.S, u) - h
                ts = np.linspace(-1, 1, 21)
                scale = 1.0 + np.abs(h.eval_many(ts)).max()
                assert np.abs(res.eval_many(ts)).max() <= 1e-7 * scale
                bres = conditions_residual(prob.B, u)
                bscale = 1.0 + max(abs(u.eval(-1)), abs(u.eval(1)), 1.0)
                assert np.abs(bres).max() <= 1e-8 * bscale * 100

    def test_composition_associates_with_solving(self):
        G1 = green_build(cubic_factor_problem())
        G2 = green_build(sqrt2_factor_problem())
        # orders differ, but composition is still the operator product
        h = ExpPoly.cos(0.7)
        lhs = solve_with_kernel(compose_kernels(G1, G2), h)
        rhs = solve_with_kernel(G1, solve_with_kernel(G2, h))
        ts = np.linspace(-1, 1, 21)
        a, b = lhs.eval_many(ts), rhs.eval_many(ts)
        assert np.abs(a - b).max() <= 1e-8 * (1 + np.abs(b).max())

    def test_adjoint_problem_kernel_is_transpose(self):
        # first factor problem and its adjoint (periodic conditions)
        G1 = green_build(sqrt2_factor_problem())
        B = BoundarySpec.make(1.0, [[1.0]], [[-1.0]])
        adj = BVProblem(DiffPoly.make([1.0, -1.0]), B, 1.0)
        G2 = green_build(adj)
        Gt = transpose_kernel(G1)
        for t, s in sample_points(50, seed=10):
            if abs(t - s) < 1e-6:
                continue
            assert G2.eval(t, s) == pytest.approx(Gt.eval(t, s), abs=1e-10)
