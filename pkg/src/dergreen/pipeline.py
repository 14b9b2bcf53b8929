"""End-to-end solver for reflection problems.

The method: build the companion operator R, reduce to an ordinary
problem of doubled order with extended conditions, obtain that problem's
Green's function either directly or as a composition of two factor
kernels, apply R in the first variable, and integrate against the right
hand side.  When both kernel routes run they are cross-checked on a
grid.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from statistics import median

import numpy as np

from .boundary import (BoundarySpec, DecomposedConditions,
                       conditions_residual, decompose_conditions,
                       extend_conditions)
from .errors import (ComplexFactorizationSkipped, DegenerateReduction,
                     NonUniqueBVP, NotDecomposable)
from .exppoly import ExpPoly, PiecewiseKernel
from .factorization import EvenPoly, factor_even
from .greens import (BVProblem, compose_kernels, green_build, green_verify,
                     solve_with_kernel, transpose_kernel)
from .operators import (DiffPoly, ReflectionOperator, apply, apply_kernel,
                        companion, reduce_operator)


@dataclass(frozen=True)
class DERProblem:
    """Order-n reflection equation with n two-point conditions."""
    L: ReflectionOperator
    B: BoundarySpec
    T: float
    h: ExpPoly

    def __post_init__(self):
        if self.B.n != self.L.order:
            raise ValueError("need exactly as many conditions as the order")


@dataclass(frozen=True)
class FactoredSystem:
    L1: tuple      # coefficients of the first factor, ascending
    L2: tuple      # coefficients of the second factor (carries the scale)
    conds: DecomposedConditions
    scale: float


@dataclass
class SolutionBundle:
    G_reduced: PiecewiseKernel
    G_der: PiecewiseKernel
    u: ExpPoly
    route: str
    diagnostics: dict = field(default_factory=dict)


def _formal_adjoint(coeffs):
    return tuple((-1) ** k * c for k, c in enumerate(coeffs))


def adjoint_shortcut(G1: PiecewiseKernel, sys: FactoredSystem,
                     prebuilt_G2: PiecewiseKernel | None = None,
                     grid_n=15, tol=1e-8):
    """Transposed first kernel, when the second problem is the adjoint.

    The polynomial gate accepts L2 equal to the formal adjoint of L1 up
    to sign; the decisive check compares the independently built second
    kernel with the transpose of the first on a grid.  Returns None when
    either test fails (the factor conditions need not be adjoint ones).
    """
    l1 = np.array(sys.L1, dtype=complex)
    l2 = np.array(sys.L2, dtype=complex)
    if l1.shape != l2.shape:
        return None
    adj = np.array(_formal_adjoint(tuple(l1)))
    scale = np.abs(l1).max()
    if not (np.abs(l2 - adj).max() <= 1e-12 * scale
            or np.abs(l2 + adj).max() <= 1e-12 * scale):
        return None
    if prebuilt_G2 is None:
        try:
            prebuilt_G2 = green_build(
                BVProblem(tuple(sys.L2), sys.conds.Vtilde, G1.T))
        except NonUniqueBVP:
            return None
    Gt = transpose_kernel(G1)
    xs = np.linspace(-G1.T, G1.T, grid_n)
    tt, ss = np.meshgrid(xs, xs)
    # exclude exact diagonal hits: the kernel value there is only a
    # tie-breaking convention and differs by the jump
    off = np.abs(tt - ss) > 1e-9 * G1.T
    a = Gt.eval_many(tt[off], ss[off])
    b = prebuilt_G2.eval_many(tt[off], ss[off])
    if np.abs(a - b).max() > tol * (1.0 + np.abs(b).max()):
        return None
    return Gt


def _try_factored(S: DiffPoly, E, T, allow_complex):
    """Factored-route kernel; raises the spec errors on failure."""
    fact = factor_even(EvenPoly.from_diffpoly(S))
    if not fact.all_real and not allow_complex:
        raise ComplexFactorizationSkipped(
            "factors are complex; pass allow_complex_factors=True")
    if fact.all_real:
        q, qm = fact.as_real_pair()
    else:
        q, qm = fact.q, fact.q_minus
    scale = fact.leading
    last_exc = None
    for l1, l2 in ((q, qm), (qm, q)):
        l2_scaled = tuple(scale * c for c in l2)
        try:
            dec = decompose_conditions(E, l1)
            G1 = green_build(BVProblem(l1, dec.V, T))
            G2 = green_build(BVProblem(l2_scaled, dec.Vtilde, T))
        except (NotDecomposable, NonUniqueBVP) as exc:
            last_exc = exc
            continue
        sys = FactoredSystem(tuple(l1), l2_scaled, dec, scale)
        route = "factored"
        shortcut = adjoint_shortcut(G1, sys, prebuilt_G2=G2)
        if shortcut is not None:
            G2 = shortcut
            route = "factored_adjoint"
        return compose_kernels(G1, G2), sys, route
    raise last_exc if last_exc is not None else NotDecomposable(
        "no factor assignment decomposes the conditions")


def solve_der(P: DERProblem, route_preference="auto",
              allow_complex_factors=False) -> SolutionBundle:
    """Solve the reflection problem and cross-verify the result.

    Route preferences: ``direct`` builds only the doubled-order kernel;
    ``factored`` insists on the factor route; ``auto`` tries the factor
    route and falls back; ``both`` runs the two and checks agreement.

    Raises
    ------
    DegenerateReduction
        if the reduced operator vanishes or collapses in order.
    NonUniqueBVP, NotDecomposable, ComplexFactorizationSkipped
        per route, as described above.
    """
    if route_preference not in ("auto", "direct", "factored", "both"):
        raise ValueError(f"unknown route preference {route_preference!r}")
    n = P.L.order
    R = companion(P.L)
    S = reduce_operator(P.L)
    if S.order != 2 * n:
        raise DegenerateReduction(
            f"reduced operator has order {S.order}, expected {2 * n}; "
            "the doubled condition set is not well posed")
    E = extend_conditions(P.B, R)
    B2n = BoundarySpec.make(P.T, E.Gamma, E.Theta)
    diagnostics = {}

    G_fact = sys = None
    route = None
    if route_preference in ("factored", "auto", "both"):
        try:
            G_fact, sys, route = _try_factored(
                S, E, P.T, allow_complex_factors)
        except (NotDecomposable, ComplexFactorizationSkipped,
                NonUniqueBVP) as exc:
            if route_preference == "factored":
                raise
            diagnostics["factored_error"] = f"{type(exc).__name__}: {exc}"

    G_direct = None
    if route_preference in ("direct", "both") or G_fact is None:
        G_direct = green_build(BVProblem(S, B2n, P.T))

    G = G_fact if G_fact is not None else G_direct
    if G_fact is None:
        route = "direct"
    Gbar = apply_kernel(R, G)

    if G_direct is not None and G_fact is not None:
        Gbar_direct = apply_kernel(R, G_direct)
        xs = np.linspace(-P.T, P.T, 21)
        tt, ss = np.meshgrid(xs, xs)
        va = Gbar.eval_many(tt, ss)
        vb = Gbar_direct.eval_many(tt, ss)
        disc = float(np.abs(va - vb).max())
        scale = 1.0 + float(np.abs(vb).max())
        diagnostics["route_agreement"] = disc
        if disc > 1e-7 * scale:
            raise AssertionError(
                f"direct and factored kernels disagree by {disc:.3e}")

    u = solve_with_kernel(Gbar, P.h)

    ts = np.linspace(-P.T, P.T, 21)
    lu = apply(P.L, u)
    hvals = P.h.eval_many(ts)
    resid = float(np.abs(lu.eval_many(ts) - hvals).max())
    eq_scale = 1.0 + float(np.abs(hvals).max())
    bres = float(np.abs(conditions_residual(P.B, u, P.T)).max())
    bscale = 1.0 + _condition_scale(P.B, u, P.T)
    diagnostics["equation_residual"] = resid
    diagnostics["boundary_residual"] = bres
    diagnostics["reduced_verify"] = green_verify(
        BVProblem(S, B2n, P.T), G)
    if resid > 1e-6 * eq_scale:
        raise AssertionError(
            f"solution residual {resid:.3e} exceeds tolerance")
    if bres > 1e-7 * bscale:
        raise AssertionError(
            f"boundary residual {bres:.3e} exceeds tolerance")
    if sys is not None:
        diagnostics["factored_system"] = sys
    return SolutionBundle(G, Gbar, u, route, diagnostics)


def _condition_scale(B: BoundarySpec, u: ExpPoly, T) -> float:
    ders = []
    du = u
    for _ in range(B.n):
        ders.append((abs(du.eval(-T)), abs(du.eval(T))))
        du = du.diff()
    worst = 0.0
    for k in range(B.n):
        worst = max(worst, sum(
            abs(B.alpha[k, j]) * ders[j][0] + abs(B.beta[k, j]) * ders[j][1]
            for j in range(B.n)))
    return worst


@dataclass
class BenchReport:
    repetitions: int
    direct_median: float | None = None
    factored_median: float | None = None
    factored_available: bool = False
    agreement: float | None = None

    def __str__(self):
        if self.repetitions == 0:
            return "bench: no repetitions requested"
        lines = [f"direct kernel construction: {self.direct_median:.6f} s"]
        if self.factored_available:
            lines.append(
                f"factored kernel construction: {self.factored_median:.6f} s")
            lines.append(f"max grid discrepancy: {self.agreement:.3e}")
        else:
            lines.append("factored kernel construction: n/a")
        return "\n".join(lines)


def bench(P: DERProblem, repetitions=3) -> BenchReport:
    """Wall-clock medians for the two kernel routes, report only."""
    if repetitions == 0:
        return BenchReport(0)
    R = companion(P.L)
    S = reduce_operator(P.L)
    if S.order != 2 * P.L.order:
        raise DegenerateReduction("reduced operator collapsed in order")
    E = extend_conditions(P.B, R)
    B2n = BoundarySpec.make(P.T, E.Gamma, E.Theta)

    direct_times = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        G_direct = green_build(BVProblem(S, B2n, P.T))
        direct_times.append(time.perf_counter() - t0)

    report = BenchReport(repetitions, direct_median=median(direct_times))
    try:
        fact_times = []
        for _ in range(repetitions):
            t0 = time.perf_counter()
            G_fact, _, _ = _try_factored(S, E, P.T, False)
            fact_times.append(time.perf_counter() - t0)
    except (NotDecomposable, ComplexFactorizationSkipped, NonUniqueBVP):
        return report

    xs = np.linspace(-P.T, P.T, 21)
    tt, ss = np.meshgrid(xs, xs)
    disc = float(np.abs(G_fact.eval_many(tt, ss) -
                        G_direct.eval_many(tt, ss)).max())
    report.factored_available = True
    report.factored_median = median(fact_times)
    report.agreement = disc
    return report
