"""The noncommutative algebra of reflection differential operators.

Operators have the shape ``sum_k (a_k?* + b_k) D^k`` where ``?*`` is the
pullback of t -> -t and D is differentiation.  Words normalize through
``D^k ?* = (-1)^k ?* D^k`` and ``?* ?* = Id``, which makes composition
closed on this coefficient form.  The companion construction produces, for
every operator L, an R with R L = L R a plain differential polynomial of
doubled order; that reduction is the entry point of the whole solver.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DegenerateReduction
from .exppoly import ExpPoly, PiecewiseKernel

# absolute tolerance for trimming trailing coefficient pairs; the central
# subtlety is order collapse (a_n = +-b_n), which must be detected, not
# hidden by stray rounding noise
TRIM_TOL = 1e-12

# how reduce() settled its double computation: "exact" float equality or
# the documented 1e-12-relative fallback
reduction_stats = {"exact": 0, "tolerance": 0}


def _trimmed(a, b):
    a, b = list(a), list(b)
    n = max(len(a), len(b))
    a += [0.0] * (n - len(a))
    b += [0.0] * (n - len(b))
    while n > 1 and abs(a[-1]) <= TRIM_TOL and abs(b[-1]) <= TRIM_TOL:
        a.pop()
        b.pop()
        n -= 1
    return tuple(float(x) for x in a), tuple(float(x) for x in b)


@dataclass(frozen=True)
class ReflectionOperator:
    """Coefficients a_k of ?*D^k and b_k of D^k, trailing zeros trimmed."""
    a: tuple
    b: tuple

    @staticmethod
    def make(a, b) -> "ReflectionOperator":
        return ReflectionOperator(*_trimmed(a, b))

    @staticmethod
    def identity() -> "ReflectionOperator":
        return ReflectionOperator.make([0.0], [1.0])

    @staticmethod
    def derivative(k: int = 1) -> "ReflectionOperator":
        return ReflectionOperator.make([0.0] * (k + 1),
                                       [0.0] * k + [1.0])

    @staticmethod
    def reflection() -> "ReflectionOperator":
        return ReflectionOperator.make([1.0], [0.0])

    @staticmethod
    def from_diffpoly(c) -> "ReflectionOperator":
        c = tuple(c)
        return ReflectionOperator.make((0.0,) * len(c), c)

    @property
    def order(self) -> int:
        return len(self.a) - 1

    @property
    def is_zero(self) -> bool:
        return self.order == 0 and self.a[0] == 0 and self.b[0] == 0

    @property
    def pure_diff(self) -> bool:
        return all(x == 0 for x in self.a)

    def __str__(self):
        bits = []
        for k in range(self.order, -1, -1):
            if self.a[k]:
                bits.append(f"{self.a[k]:g}*phi*D^{k}" if k
                            else f"{self.a[k]:g}*phi")
            if self.b[k]:
                bits.append(f"{self.b[k]:g}*D^{k}" if k else f"{self.b[k]:g}")
        return " + ".join(bits) if bits else "0"


@dataclass(frozen=True)
class DiffPoly:
    """Real polynomial in D; empty coefficient tuple is the zero operator."""
    c: tuple

    @staticmethod
    def make(c) -> "DiffPoly":
        c = [float(x) for x in c]
        m = max((abs(x) for x in c), default=0.0)
        while c and abs(c[-1]) <= TRIM_TOL * max(m, 1.0):
            c.pop()
        return DiffPoly(tuple(c))

    @property
    def order(self) -> int:
        return len(self.c) - 1 if self.c else -1

    @property
    def is_zero(self) -> bool:
        return not self.c

    def __str__(self):
        if not self.c:
            return "0"
        return " + ".join(f"{v:g}*D^{k}" if k else f"{v:g}"
                          for k, v in enumerate(self.c) if v != 0) or "0"


def compose(P: ReflectionOperator, Q: ReflectionOperator) \
        -> ReflectionOperator:
    """The operator P Q, fully normalized.

    Contributions are accumulated over symmetric index pairs (i, j)/(j, i)
    so that the cancellations forced by the sign rule come out as exact
    zeros in floating point, not rounding residue.
    """
    np_, nq = P.order, Q.order
    a = [0.0] * (np_ + nq + 1)
    b = [0.0] * (np_ + nq + 1)

    def contrib(i, j):
        # (a_i?* + b_i) D^i (alpha_j?* + beta_j) D^j
        sg = -1.0 if i % 2 else 1.0
        db = sg * (P.a[i] * Q.a[j]) + P.b[i] * Q.b[j]
        da = P.a[i] * Q.b[j] + sg * (P.b[i] * Q.a[j])
        return da, db

    for k in range(np_ + nq + 1):
        for i in range(0, k // 2 + 1):
            j = k - i
            ij_ok = i <= np_ and j <= nq
            ji_ok = i != j and j <= np_ and i <= nq
            if i == j:
                if ij_ok:
                    da, db = contrib(i, i)
                    a[k] += da
                    b[k] += db
            elif ij_ok and ji_ok:
                da1, db1 = contrib(i, j)
                da2, db2 = contrib(j, i)
                a[k] += da1 + da2
                b[k] += db1 + db2
            elif ij_ok:
                da, db = contrib(i, j)
                a[k] += da
                b[k] += db
            elif ji_ok:
                da, db = contrib(j, i)
                a[k] += da
                b[k] += db
    return ReflectionOperator.make(a, b)


def companion(L: ReflectionOperator) -> ReflectionOperator:
    """The operator R with R L = L R free of reflection terms."""
    b = tuple(v if l % 2 else -v for l, v in enumerate(L.b))
    return ReflectionOperator.make(L.a, b)


def _reduced_closed_form(L: ReflectionOperator):
    """Even coefficients of R L from the products of L's coefficients.

    Written so each addend mirrors, bit for bit, the symmetric-pair
    accumulation in :func:`compose`.
    """
    n = L.order
    a, b = L.a, L.b
    c = [0.0] * (2 * n + 1)
    for k in range(0, 2 * n + 1, 2):
        acc = 0.0
        for l in range(max(0, k - n), k // 2):
            sg = -1.0 if l % 2 else 1.0
            term = sg * (a[l] * a[k - l]) + (-sg) * (b[l] * b[k - l])
            acc += term + term
        half = k // 2
        if half <= n:
            sg = -1.0 if half % 2 else 1.0
            acc += sg * (a[half] * a[half]) + (-sg) * (b[half] * b[half])
        c[k] = acc
    return c


def reduce_operator(L: ReflectionOperator) -> DiffPoly:
    """The reduced operator S = R L, computed twice and cross-checked.

    One path expands compose(companion(L), L) and extracts the pure-D
    part; the other uses the closed-form products of the coefficients.
    Both are the same finite real sums, so they must agree exactly; a
    1e-12-relative tolerance is kept as a recorded fallback.
    """
    R = companion(L)
    composed = compose(R, L)
    if any(x != 0 for x in composed.a):
        raise AssertionError("reduction left a reflection part behind")
    closed = _reduced_closed_form(L)
    got = list(composed.b) + [0.0] * (len(closed) - len(composed.b))
    for k in range(1, len(closed), 2):
        if k < len(got) and got[k] != 0:
            raise AssertionError("reduction left an odd-order coefficient")
    scale = max(max((abs(x) for x in closed), default=0.0), 1.0)
    if got[:len(closed)] == closed:
        reduction_stats["exact"] += 1
    else:
        for x, y in zip(got, closed):
            if abs(x - y) > 1e-12 * scale:
                raise AssertionError(
                    f"reduction cross-check failed: {got} vs {closed}")
        reduction_stats["tolerance"] += 1
    S = DiffPoly.make(closed)
    if S.is_zero:
        raise DegenerateReduction(
            "R L is the zero operator; the problem has no reduction")
    return S


def apply(P: ReflectionOperator, u: ExpPoly) -> ExpPoly:
    """Apply P to a function: sum a_k u^(k)(-t) + sum b_k u^(k)(t)."""
    out = ExpPoly.zero()
    du = u
    for k in range(P.order + 1):
        if P.b[k]:
            out = out + du.scale(P.b[k])
        if P.a[k]:
            out = out + du.reflect().scale(P.a[k])
        if k < P.order:
            du = du.diff()
    return out


def apply_diffpoly(S: DiffPoly, u: ExpPoly) -> ExpPoly:
    return apply(ReflectionOperator.from_diffpoly(S.c), u)


def apply_kernel(P: ReflectionOperator, K: PiecewiseKernel) \
        -> PiecewiseKernel:
    """Apply P in the first variable of a piecewise kernel.

    Derivatives act piece by piece; the reflection part substitutes
    t -> -t in both expressions and region constraints, after which the
    two piece covers are merged back into one disjoint cover.
    """
    diff_part = None
    refl_part = None
    dK = K
    for k in range(P.order + 1):
        if P.b[k]:
            contrib = dK.scale(P.b[k])
            diff_part = contrib if diff_part is None else _piecewise_sum(
                diff_part, contrib)
        if P.a[k]:
            contrib = dK.scale(P.a[k])
            refl_part = contrib if refl_part is None else _piecewise_sum(
                refl_part, contrib)
        if k < P.order:
            dK = dK.map_pieces(lambda e: e.diff_t())
    if refl_part is not None:
        refl_part = refl_part.reflect_t()
    if diff_part is None and refl_part is None:
        return K.map_pieces(lambda e: e.scale(0.0))
    if refl_part is None:
        return diff_part
    if diff_part is None:
        return refl_part
    return diff_part + refl_part


def _piecewise_sum(K1: PiecewiseKernel, K2: PiecewiseKernel):
    # same region cover by construction: add expressions piecewise
    pieces = tuple((r1, e1 + e2)
                   for (r1, e1), (_, e2) in zip(K1.pieces, K2.pieces))
    return PiecewiseKernel(K1.T, pieces)
