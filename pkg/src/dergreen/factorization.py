"""Factoring the reduced even polynomial into opposite-root halves.

An even real polynomial p of degree 2n splits as alpha_2n * q * q_minus
where q is monic of degree n and q_minus carries the opposite roots.  The
split is built constructively from the roots of the half-degree polynomial
p~(y) = p(sqrt(y)); q is real exactly when p~ has no negative roots, for
which a sign test on p~(-y) gives a cheap sufficient certificate.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, NoRealFactorization
from .operators import DiffPoly, ReflectionOperator, reduce_operator

TAU_ROOT = 1e-6           # clustering tolerance, relative to root magnitude
RESIDUAL_TOL = 1e-7       # acceptance threshold on |p(root)| / scale
REAL_COEFF_TOL = 1e-9     # |Im| below this counts a coefficient as real


def _poly_eval(p, x):
    acc = 0j
    for c in reversed(p):
        acc = acc * x + c
    return acc


def roots(p):
    """All complex roots of a polynomial with multiplicities.

    ``p`` is a coefficient list ascending by degree.  Roots are found from
    the companion-matrix eigenvalues, then near-coincident values are
    clustered; each cluster reports its centroid and summed multiplicity.

    Raises
    ------
    ConvergenceFailure
        if any reported root leaves a residual above tolerance.
    """
    p = [complex(x) for x in p]
    if len(p) < 2:
        raise ValueError("degree must be at least 1")
    if p[-1] == 0:
        raise ValueError("leading coefficient must be nonzero")
    raw = np.roots(np.array(p[::-1], dtype=np.complex128))

    clusters = [[z] for z in raw]
    merged = True
    while merged:
        merged = False
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                ci = sum(clusters[i]) / len(clusters[i])
                cj = sum(clusters[j]) / len(clusters[j])
                tol = TAU_ROOT * max(1.0, abs(ci), abs(cj))
                if abs(ci - cj) <= tol:
                    clusters[i].extend(clusters[j])
                    del clusters[j]
                    merged = True
                    break
            if merged:
                break

    out = []
    cmax = max(abs(c) for c in p)
    for cl in clusters:
        centroid = complex(sum(cl) / len(cl))
        scale = cmax * max(1.0, abs(centroid)) ** (len(p) - 1)
        if abs(_poly_eval(p, centroid)) > RESIDUAL_TOL * scale:
            raise ConvergenceFailure(
                f"root {centroid} residual exceeds {RESIDUAL_TOL} * scale")
        out.append((centroid, len(cl)))
    out.sort(key=lambda rm: (rm[0].real, rm[0].imag))
    return out


@dataclass(frozen=True)
class EvenPoly:
    """Coefficients alpha_0, alpha_2, ..., alpha_2n of an even polynomial."""
    alpha: tuple

    @staticmethod
    def make(alpha) -> "EvenPoly":
        alpha = tuple(float(x) for x in alpha)
        if not alpha or alpha[-1] == 0:
            raise ValueError("leading even coefficient must be nonzero")
        return EvenPoly(alpha)

    @staticmethod
    def from_diffpoly(S: DiffPoly) -> "EvenPoly":
        m = max((abs(x) for x in S.c), default=0.0)
        for k in range(1, len(S.c), 2):
            if abs(S.c[k]) > 1e-12 * max(m, 1.0):
                raise ValueError("operator has odd-order coefficients")
        return EvenPoly.make(S.c[::2])

    @property
    def half_degree(self) -> int:
        return len(self.alpha) - 1

    def halved(self) -> tuple:
        """p~ coefficients: same numbers read as a degree-n polynomial."""
        return self.alpha

    def full_coeffs(self) -> tuple:
        out = [0.0] * (2 * len(self.alpha) - 1)
        out[::2] = self.alpha
        return tuple(out)


@dataclass(frozen=True)
class Factorization:
    """Monic opposite-root factors with the scalar pulled out front."""
    leading: float
    q: tuple          # complex coefficients, ascending, monic
    q_minus: tuple
    all_real: bool

    def as_real_pair(self):
        """The factors as real coefficient lists (requires all_real)."""
        if not self.all_real:
            raise ValueError("factor is not real")
        return (tuple(c.real for c in self.q),
                tuple(c.real for c in self.q_minus))


def opposite_poly(q):
    """Coefficients of the monic polynomial with roots negated."""
    q = tuple(complex(c) for c in q)
    n = len(q) - 1
    if abs(q[-1] - 1) > 1e-9:
        raise ValueError("input must be monic")
    return tuple((-1) ** (k + n) * c for k, c in enumerate(q))


def descartes_no_negative_roots(ptilde):
    """Sign certificate that p~ has no negative roots.

    Returns ``"guaranteed"`` when every coefficient of p~(-y) shares the
    sign of its leading one (allowing zeros); sufficient, never necessary.
    """
    p = [float(x) for x in ptilde]
    flipped = [c * (-1) ** k for k, c in enumerate(p)]
    lead = next((c for c in reversed(flipped) if c != 0), 0.0)
    if lead == 0:
        return "inconclusive"
    sgn = 1.0 if lead > 0 else -1.0
    if all(sgn * c >= 0 for c in flipped):
        return "guaranteed"
    return "inconclusive"


def _poly_mul(p, q):
    out = [0j] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        for j, y in enumerate(q):
            out[i + j] += x * y
    return out


def factor_even(p: EvenPoly) -> Factorization:
    """Split p into leading * q * q_minus via roots of the halved poly.

    Root assignment follows the constructive recipe: a positive root
    lambda^2 of p~ contributes (x - lambda) to q with lambda > 0, a
    negative one contributes (x - i*lambda), a conjugate pair contributes
    the real quadratic with the minus cross term, and zero roots split as
    x^sigma into both factors.
    """
    alpha = p.alpha
    amax = max(abs(x) for x in alpha)
    ptilde = list(alpha)
    sigma = 0
    while abs(ptilde[0]) <= 1e-12 * amax and len(ptilde) > 1:
        ptilde.pop(0)
        sigma += 1

    lin_q, lin_qm, quad_q, quad_qm = [], [], [], []
    if len(ptilde) > 1:
        pos_im = []
        neg_im = 0
        for r, m in roots(ptilde):
            if abs(r.imag) <= TAU_ROOT * max(1.0, abs(r)):
                lam = math.sqrt(abs(r.real))
                if r.real >= 0:
                    lin_q += [(-lam, 1)] * m     # (x - lam)
                    lin_qm += [(lam, 1)] * m
                else:
                    lin_q += [(-1j * lam, 1)] * m   # (x - i lam)
                    lin_qm += [(1j * lam, 1)] * m
            elif r.imag > 0:
                pos_im.append((r, m))
            else:
                neg_im += m
        if neg_im != sum(m for _, m in pos_im):
            raise ConvergenceFailure(
                "complex roots failed to pair into conjugates")
        for r, m in pos_im:
            mu, nu = -2.0 * r.real, abs(r)
            cross = math.sqrt(max(2.0 * nu - mu, 0.0))
            quad_q += [(nu, -cross, 1)] * m
            quad_qm += [(nu, cross, 1)] * m

    q = [0j] * sigma + [1 + 0j]
    qm = [0j] * sigma + [1 + 0j]
    for f in sorted(lin_q, key=lambda f: (f[0].real, f[0].imag)) + \
            sorted(quad_q, key=lambda f: (f[0].real, f[1].real)):
        q = _poly_mul(q, f)
    for f in sorted(lin_qm, key=lambda f: (-f[0].real, -f[0].imag)) + \
            sorted(quad_qm, key=lambda f: (f[0].real, -f[1].real)):
        qm = _poly_mul(qm, f)

    recon = [alpha[-1] * v for v in _poly_mul(q, qm)]
    full = p.full_coeffs()
    err = max(abs(recon[k] - full[k]) for k in range(len(full)))
    if err > 1e-8 * amax:
        raise ConvergenceFailure(
            f"factor reconstruction residual {err:.3e} exceeds tolerance")

    all_real = all(abs(c.imag) <= REAL_COEFF_TOL for c in q)
    return Factorization(alpha[-1], tuple(q), tuple(qm), all_real)


def factor_n2_closed_form(L: ReflectionOperator):
    """Closed-form factor candidates for an order-2 operator.

    Solves the quadratic coefficient system directly.  Case (I): the
    halved reduced polynomial has a conjugate root pair; two candidates.
    Case (II): it has two nonnegative roots; four candidates indexed by
    xi = +-1.  Every returned candidate reproduces the reduced polynomial.

    Raises
    ------
    NoRealFactorization
        when neither case's sign conditions hold.
    """
    if L.order != 2:
        raise ValueError("closed form applies to order-2 operators only")
    a, b = L.a, L.b
    c4 = a[2] ** 2 - b[2] ** 2
    if c4 == 0:
        raise ValueError("degenerate top order: a_2^2 = b_2^2")
    S = reduce_operator(L)
    c = list(S.c) + [0.0] * (5 - len(S.c))
    c0, c2 = c[0], c[2]

    prod = (b[0] ** 2 - a[0] ** 2) * (b[2] ** 2 - a[2] ** 2)  # == c0 * c4
    case1 = prod > 0 and abs(c2) < 2.0 * math.sqrt(prod)
    case2 = (c4 >= 0 and c0 >= 0 and -c2 >= 2.0 * math.sqrt(max(c0 * c4, 0.0))) \
        or (c4 <= 0 and c0 <= 0 and c2 >= 2.0 * math.sqrt(max(c0 * c4, 0.0)))
    if not case1 and not case2:
        raise NoRealFactorization(
            "no real closed-form factorization for this operator")

    sgn4 = 1.0 if c4 > 0 else -1.0
    root_prod = math.sqrt(abs(prod))
    xis = (1.0,) if case1 else (1.0, -1.0)
    candidates = []
    for xi in xis:
        a0 = xi * math.sqrt((b[0] ** 2 - a[0] ** 2) /
                            (b[2] ** 2 - a[2] ** 2))
        arg = (2.0 * xi * sgn4 * root_prod - c2) / c4
        if arg < 0:
            if arg < -1e-9 * max(1.0, abs(c2 / c4)):
                continue
            arg = 0.0
        for sign in (1.0, -1.0):
            a1 = sign * math.sqrt(arg)
            q = (complex(a0), complex(a1), 1 + 0j)
            recon = [c4 * v for v in _poly_mul(list(q), list(opposite_poly(q)))]
            cmax = max(abs(x) for x in c[:5])
            if max(abs(recon[k] - c[k]) for k in range(5)) <= 1e-8 * cmax:
                candidates.append(Factorization(
                    c4, q, opposite_poly(q), True))
            if a1 == 0:
                break
    if not candidates:
        raise NoRealFactorization("closed-form candidates failed to expand")
    return candidates
