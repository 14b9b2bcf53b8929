"""Two-point boundary conditions and their decomposition across factors.

A condition set is a pair of square matrices acting on the derivative
vectors at -T and T.  Extending a set with the companion-operator rows
doubles it into the block-triangular form required by the reduced
problem; the decomposition lemmas then split the doubled set into
conditions for the two factor problems whenever the compatibility
equation holds, which is verified both by the explicit change of basis
and by a row-space rank test.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NotDecomposable
from .exppoly import ExpPoly

KAPPA_MAX = 1e8     # condition-number cap for treating a block as invertible
RANK_TOL = 1e-10    # singular values below this (relative) count as zero


def _ro_array(M, dtype=None):
    A = np.array(M, dtype=dtype if dtype is not None else None)
    if A.dtype.kind not in "fc":
        A = A.astype(np.float64)
    A.setflags(write=False)
    return A


@dataclass(frozen=True, eq=False)
class BoundarySpec:
    """n conditions sum_j alpha[k,j] u^(j)(-T) + beta[k,j] u^(j)(T) = 0."""
    T: float
    alpha: np.ndarray
    beta: np.ndarray

    @staticmethod
    def make(T, alpha, beta) -> "BoundarySpec":
        alpha = _ro_array(alpha)
        beta = _ro_array(beta)
        if alpha.shape != beta.shape or alpha.ndim != 2 \
                or alpha.shape[0] != alpha.shape[1]:
            raise ValueError("alpha and beta must be square of equal size")
        if not np.all(np.isfinite(alpha)) or not np.all(np.isfinite(beta)):
            raise ValueError("non-finite condition coefficients")
        n = alpha.shape[0]
        stacked = np.hstack([alpha, beta])
        if np.linalg.matrix_rank(stacked, tol=None) < n:
            warnings.warn("boundary conditions are rank deficient",
                          stacklevel=2)
        return BoundarySpec(float(T), alpha, beta)

    @property
    def n(self) -> int:
        return self.alpha.shape[0]


@dataclass(frozen=True, eq=False)
class ExtendedBoundary:
    """The doubled 2n x 2n condition matrices with zero upper-right blocks."""
    T: float
    Gamma: np.ndarray
    Theta: np.ndarray

    @property
    def n(self) -> int:
        return self.Gamma.shape[0] // 2

    def blocks(self):
        n = self.n
        G, H = self.Gamma, self.Theta
        return (G[:n, :n], G[n:, :n], G[n:, n:],
                H[:n, :n], H[n:, :n], H[n:, n:])


@dataclass(frozen=True, eq=False)
class DecomposedConditions:
    """Condition sets for the two factor problems plus the matrices used."""
    V: BoundarySpec
    Vtilde: BoundarySpec
    PhiPsi: tuple
    lemma: str


def extend_conditions(B: BoundarySpec, R, S_order=None,
                      reduce_rows=True) -> ExtendedBoundary:
    """Extended conditions: the original rows plus the companion rows.

    Each new row expresses a condition functional applied after R in
    terms of u^(j)(+-T), j < 2n, using that a reflected derivative at one
    endpoint is a plain derivative at the other.  With ``reduce_rows``
    the new rows are normalized modulo the span of the original ones
    (least squares, exact zeros snapped), which reproduces the textbook
    display form; the row space, and hence the problem, is unchanged.
    """
    n = B.n
    if R.order > n:
        raise ValueError("companion operator order exceeds condition count")
    if S_order is not None and S_order != 2 * n:
        raise ValueError("reduced order must be twice the condition count")
    a = np.zeros(n + 1)
    b = np.zeros(n + 1)
    a[:R.order + 1] = R.a
    b[:R.order + 1] = R.b
    G2 = np.zeros((n, 2 * n))
    T2 = np.zeros((n, 2 * n))
    for k in range(n):
        for j in range(n):
            al, be = B.alpha[k, j], B.beta[k, j]
            if al == 0 and be == 0:
                continue
            sgn = -1.0 if j % 2 else 1.0
            for i in range(n + 1):
                m = i + j
                G2[k, m] += al * b[i] + be * sgn * a[i]
                T2[k, m] += al * sgn * a[i] + be * b[i]
    if reduce_rows:
        orig = np.hstack([B.alpha, B.beta])           # n x 2n
        low = np.hstack([G2[:, :n], T2[:, :n]])       # n x 2n
        C = np.linalg.lstsq(orig.T, low.T, rcond=None)[0].T
        low -= C @ orig
        scale = max(1.0, np.abs(G2).max(), np.abs(T2).max())
        low[np.abs(low) <= 1e-12 * scale] = 0.0
        G2[:, :n], T2[:, :n] = low[:, :n], low[:, n:]
    Gamma = np.zeros((2 * n, 2 * n))
    Theta = np.zeros((2 * n, 2 * n))
    Gamma[:n, :n] = B.alpha
    Theta[:n, :n] = B.beta
    Gamma[n:] = G2
    Theta[n:] = T2
    return ExtendedBoundary(B.T, _ro_array(Gamma), _ro_array(Theta))


def build_xi(L1_coeffs):
    """The banded matrix linking derivatives of L1 u to derivatives of u.

    Row j holds c_0..c_n starting at column j; returns the left and right
    n x n blocks, the right one invertible since c_n != 0.
    """
    c = np.asarray(L1_coeffs)
    n = len(c) - 1
    if n < 1 or c[-1] == 0:
        raise ValueError("factor must have nonzero leading coefficient")
    Xi = np.zeros((n, 2 * n), dtype=c.dtype)
    for j in range(n):
        Xi[j, j:j + n + 1] = c
    return Xi[:, :n].copy(), Xi[:, n:].copy()


def _invertible(M):
    if M.size == 0:
        return False
    try:
        return np.linalg.cond(M) <= KAPPA_MAX
    except np.linalg.LinAlgError:
        return False


def _rank(M):
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > RANK_TOL * sv[0]))


def _c2_matrices(G1, T1, Phi, Psi, Xi1, Xi2):
    n = G1.shape[0]
    Gc = np.zeros((2 * n, 2 * n), dtype=np.result_type(G1, Phi, Xi1))
    Tc = np.zeros_like(Gc)
    Gc[:n, :n] = G1
    Tc[:n, :n] = T1
    Gc[n:, :n] = Phi @ Xi1
    Gc[n:, n:] = Phi @ Xi2
    Tc[n:, :n] = Psi @ Xi1
    Tc[n:, n:] = Psi @ Xi2
    return Gc, Tc


def decompose_conditions(E: ExtendedBoundary, L1_coeffs) \
        -> DecomposedConditions:
    """Split the doubled conditions across the two factor problems.

    Tries the direct lemma (left blocks invertible, compatibility on the
    Theta side) and then its mirror.  Every decomposition is verified
    twice: the explicit change-of-basis matrix must map one condition
    system onto the other, and the two stacked systems must span the
    same row space.

    Raises
    ------
    NotDecomposable
        if both hypotheses fail or a verification check fails.
    """
    G1, G2, G3, T1, T2, T3 = E.blocks()
    n = E.n
    Xi1, Xi2 = build_xi(L1_coeffs)
    Xi2_inv = np.linalg.inv(Xi2)

    choice = None
    if _invertible(G1) and _invertible(G3):
        resid = T2 - (G2 @ np.linalg.inv(G1) @ T1 + T3 @ Xi2_inv @ Xi1
                      - G3 @ Xi2_inv @ Xi1 @ np.linalg.inv(G1) @ T1)
        tol = 1e-8 * (1.0 + np.abs(T2).max(initial=0.0))
        if np.abs(resid).max(initial=0.0) <= tol:
            Phi = np.eye(n, dtype=Xi2.dtype)
            Psi = Xi2 @ np.linalg.inv(G3) @ T3 @ Xi2_inv
            A21 = (Xi1 - Xi2 @ np.linalg.inv(G3) @ G2) @ np.linalg.inv(G1)
            A22 = Xi2 @ np.linalg.inv(G3)
            choice = ("4.1", Phi, Psi, A21, A22)
    if choice is None and _invertible(T1) and _invertible(T3):
        resid = G2 - (T2 @ np.linalg.inv(T1) @ G1 + G3 @ Xi2_inv @ Xi1
                      - T3 @ Xi2_inv @ Xi1 @ np.linalg.inv(T1) @ G1)
        tol = 1e-8 * (1.0 + np.abs(G2).max(initial=0.0))
        if np.abs(resid).max(initial=0.0) <= tol:
            Psi = np.eye(n, dtype=Xi2.dtype)
            Phi = Xi2 @ np.linalg.inv(T3) @ G3 @ Xi2_inv
            A21 = (Xi1 - Xi2 @ np.linalg.inv(T3) @ T2) @ np.linalg.inv(T1)
            A22 = Xi2 @ np.linalg.inv(T3)
            choice = ("4.2", Phi, Psi, A21, A22)
    if choice is None:
        raise NotDecomposable("neither decomposition hypothesis holds")

    lemma, Phi, Psi, A21, A22 = choice
    A = np.zeros((2 * n, 2 * n), dtype=np.result_type(A21, A22))
    A[:n, :n] = np.eye(n)
    A[n:, :n] = A21
    A[n:, n:] = A22
    Gc, Tc = _c2_matrices(G1, T1, Phi, Psi, Xi1, Xi2)
    scale = 1.0 + max(np.abs(E.Gamma).max(), np.abs(E.Theta).max(),
                      np.abs(Gc).max(), np.abs(Tc).max())
    if np.abs(A @ E.Gamma - Gc).max() > 1e-8 * scale \
            or np.abs(A @ E.Theta - Tc).max() > 1e-8 * scale:
        raise NotDecomposable("change-of-basis verification failed")

    c1 = np.hstack([E.Gamma, E.Theta])
    c2 = np.hstack([Gc, Tc])
    if not (_rank(c1) == _rank(c2) == _rank(np.vstack([c1, c2]))):
        raise NotDecomposable("decomposed system spans a different row space")

    return DecomposedConditions(
        V=BoundarySpec(E.T, _ro_array(G1), _ro_array(T1)),
        Vtilde=BoundarySpec(E.T, _ro_array(Phi), _ro_array(Psi)),
        PhiPsi=(Phi, Psi), lemma=lemma)


def conditions_residual(B: BoundarySpec, u: ExpPoly, T=None) -> np.ndarray:
    """Value of every condition functional on u (exact evaluation)."""
    T = B.T if T is None else T
    n = B.n
    ders = []
    du = u
    for _ in range(n):
        ders.append((du.eval(-T), du.eval(T)))
        du = du.diff()
    out = np.zeros(n, dtype=np.complex128)
    for k in range(n):
        out[k] = sum(B.alpha[k, j] * ders[j][0] + B.beta[k, j] * ders[j][1]
                     for j in range(n))
    return out
