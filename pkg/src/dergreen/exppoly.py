"""Exact arithmetic for exponential polynomials in one and two variables.

Everything the solver manipulates -- right-hand sides, fundamental
solutions, Green's functions -- is a finite sum of (polynomial) * exp(mu*x)
terms with complex mu.  The class is closed under sums, products,
differentiation, reflection t -> -t and definite integration, so the whole
pipeline stays in closed form; floating point enters only through the
coefficients.

Scalars are plain ``complex``; containers reject non-finite components.
Exponents within ``TAU_MERGE`` of each other are merged (and components
within ``TAU_MERGE`` of zero are snapped to zero) so that the kappa -> 0
branch of the integration rules is taken exactly.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _backends
from .errors import OutOfDomain

# Exponents closer than this merge into one term; root finders return
# clustered values for multiple roots and the kappa -> 0 integral is
# singular, so exact-zero detection must happen before integration.
TAU_MERGE = 1e-9


def _check_finite(z):
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite scalar {z!r}")
    return z


def _snap(mu: complex) -> complex:
    re = 0.0 if abs(mu.real) <= TAU_MERGE else mu.real
    im = 0.0 if abs(mu.imag) <= TAU_MERGE else mu.imag
    return complex(re, im)


# ---------------------------------------------------------------------------
# dense polynomial helpers (tuples of complex, ascending degree)

def _poly_trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def _poly_add(p, q):
    n = max(len(p), len(q))
    return tuple((p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0)
                 for i in range(n))


def _poly_scale(p, c):
    return tuple(c * x for x in p)


def _poly_mul(p, q):
    if not p or not q:
        return ()
    out = [0j] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return tuple(out)


def _poly_eval(p, x):
    acc = 0j
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _poly_diff(p):
    return tuple((i + 1) * p[i + 1] for i in range(len(p) - 1))


def _poly_affine(p, scale, offset):
    """Coefficients of p(scale*x + offset)."""
    out = ()
    for c in reversed(p):
        out = _poly_add(_poly_mul(out, (offset, scale)), (c,))
    return out


# ---------------------------------------------------------------------------
# univariate exponential polynomials

def _canon_terms(raw):
    """Snap, sort, merge and trim a raw (mu, poly) iterable."""
    cleaned = []
    for mu, poly in raw:
        mu = _snap(_check_finite(mu))
        poly = _poly_trim(_check_finite(c) for c in poly)
        if poly:
            cleaned.append((mu, poly))
    cleaned.sort(key=lambda t: (t[0].real, t[0].imag))
    merged = []
    for mu, poly in cleaned:
        if merged and abs(mu - merged[-1][0]) <= TAU_MERGE:
            merged[-1][1] = _poly_add(merged[-1][1], poly)
        else:
            merged.append([mu, poly])
    return tuple((mu, p) for mu, poly in merged
                 if (p := _poly_trim(poly)))


@dataclass(frozen=True)
class ExpPoly:
    """Finite sum of poly(x) * exp(mu*x) terms in canonical form.

    ``terms`` is sorted by (Re mu, Im mu); exponents are pairwise distinct
    beyond ``TAU_MERGE``; no stored polynomial is zero or has a zero
    leading coefficient, so structural equality is meaningful.
    """
    terms: tuple

    @staticmethod
    def from_terms(raw) -> "ExpPoly":
        return ExpPoly(_canon_terms(raw))

    @staticmethod
    def zero() -> "ExpPoly":
        return ExpPoly(())

    @staticmethod
    def constant(c) -> "ExpPoly":
        return ExpPoly.from_terms([(0j, (c,))])

    @staticmethod
    def monomial(k: int, coeff=1.0) -> "ExpPoly":
        return ExpPoly.from_terms([(0j, (0,) * k + (coeff,))])

    @staticmethod
    def exponential(mu, poly=(1.0,)) -> "ExpPoly":
        return ExpPoly.from_terms([(mu, tuple(poly))])

    @staticmethod
    def sin(omega=1.0) -> "ExpPoly":
        # sin(w x) = (e^{iwx} - e^{-iwx}) / (2i)
        return ExpPoly.from_terms([(1j * omega, (-0.5j,)),
                                   (-1j * omega, (0.5j,))])

    @staticmethod
    def cos(omega=1.0) -> "ExpPoly":
        return ExpPoly.from_terms([(1j * omega, (0.5,)),
                                   (-1j * omega, (0.5,))])

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        return ExpPoly.from_terms(self.terms + other.terms)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return ExpPoly(tuple((mu, _poly_scale(p, -1)) for mu, p in self.terms))

    def __mul__(self, other):
        if isinstance(other, ExpPoly):
            raw = [(mu1 + mu2, _poly_mul(p1, p2))
                   for mu1, p1 in self.terms for mu2, p2 in other.terms]
            return ExpPoly.from_terms(raw)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c):
        c = _check_finite(c)
        if c == 0:
            return ExpPoly.zero()
        return ExpPoly.from_terms((mu, _poly_scale(p, c))
                                  for mu, p in self.terms)

    def diff(self, k: int = 1) -> "ExpPoly":
        """Exact derivative: (p e^{mu x})' = (p' + mu p) e^{mu x}."""
        out = self
        for _ in range(k):
            out = ExpPoly.from_terms(
                (mu, _poly_add(_poly_diff(p), _poly_scale(p, mu)))
                for mu, p in out.terms)
        return out

    def reflect(self) -> "ExpPoly":
        """Exact substitution x -> -x."""
        return ExpPoly.from_terms(
            (-mu, tuple(c * (-1) ** i for i, c in enumerate(p)))
            for mu, p in self.terms)

    def subst_affine(self, scale, offset) -> "ExpPoly":
        """The function x -> self(scale*x + offset)."""
        return ExpPoly.from_terms(
            (mu * scale, _poly_scale(_poly_affine(p, scale, offset),
                                     cmath.exp(mu * offset)))
            for mu, p in self.terms)

    def conjugate(self) -> "ExpPoly":
        return ExpPoly.from_terms(
            (mu.conjugate(), tuple(c.conjugate() for c in p))
            for mu, p in self.terms)

    def eval(self, x) -> complex:
        acc = 0j
        for mu, p in self.terms:
            acc += _poly_eval(p, x) * cmath.exp(mu * x)
        return acc

    def eval_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        if not self.terms:
            return np.zeros(xs.shape, dtype=np.complex128)
        mu, coeffs, offsets = _flatten_univariate(self.terms)
        return _backends.eval_exppoly(mu, coeffs, offsets, xs.ravel()) \
            .reshape(xs.shape)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for _, p in self.terms for c in p), default=0.0)

    def __str__(self):
        if not self.terms:
            return "0"
        bits = []
        for mu, p in self.terms:
            poly = " + ".join(f"{c:g}*x^{i}" if i else f"{c:g}"
                              for i, c in enumerate(p) if c != 0)
            bits.append(f"({poly})" + (f"*exp({mu:g}*x)" if mu != 0 else ""))
        return " + ".join(bits)


def _flatten_univariate(terms):
    mu = np.array([t[0] for t in terms], dtype=np.complex128)
    coeffs = np.concatenate([np.asarray(t[1], dtype=np.complex128)
                             for t in terms])
    offsets = np.zeros(len(terms) + 1, dtype=np.int64)
    np.cumsum([len(t[1]) for t in terms], out=offsets[1:])
    return mu, coeffs, offsets


# ---------------------------------------------------------------------------
# bivariate exponential polynomials

def _mat_trim(C):
    rows = [_poly_trim(r) for r in C]
    while rows and not rows[-1]:
        rows.pop()
    if not rows:
        return ()
    w = max(len(r) for r in rows)
    return tuple(tuple(r) + (0j,) * (w - len(r)) for r in rows)


def _mat_add(A, B):
    nr = max(len(A), len(B))
    nc = max(len(A[0]) if A else 0, len(B[0]) if B else 0)
    out = [[0j] * nc for _ in range(nr)]
    for M in (A, B):
        for i, row in enumerate(M):
            for j, v in enumerate(row):
                out[i][j] += v
    return out


@dataclass(frozen=True)
class BivariateExpPoly:
    """Sum of (sum_ij C[i][j] t^i s^j) * exp(mu_t t + mu_s s) terms.

    Canonical form mirrors :class:`ExpPoly`: exponent pairs are distinct
    beyond ``TAU_MERGE``, matrices are trimmed and never all-zero.
    """
    terms: tuple  # of (mu_t, mu_s, C)

    @staticmethod
    def from_terms(raw) -> "BivariateExpPoly":
        cleaned = []
        for mut, mus, C in raw:
            mut = _snap(_check_finite(mut))
            mus = _snap(_check_finite(mus))
            C = _mat_trim([[_check_finite(v) for v in row] for row in C])
            if C:
                cleaned.append((mut, mus, C))
        cleaned.sort(key=lambda t: (t[0].real, t[0].imag,
                                    t[1].real, t[1].imag))
        merged = []
        for mut, mus, C in cleaned:
            if merged and abs(mut - merged[-1][0]) <= TAU_MERGE \
                    and abs(mus - merged[-1][1]) <= TAU_MERGE:
                merged[-1][2] = _mat_add(merged[-1][2], C)
            else:
                merged.append([mut, mus, C])
        return BivariateExpPoly(tuple(
            (mut, mus, M) for mut, mus, C in merged if (M := _mat_trim(C))))

    @staticmethod
    def zero() -> "BivariateExpPoly":
        return BivariateExpPoly(())

    @staticmethod
    def constant(c) -> "BivariateExpPoly":
        return BivariateExpPoly.from_terms([(0j, 0j, ((c,),))])

    @staticmethod
    def from_product(tpart: ExpPoly, spart: ExpPoly) -> "BivariateExpPoly":
        """Outer product u(t) * w(s)."""
        raw = []
        for mut, p in tpart.terms:
            for mus, q in spart.terms:
                raw.append((mut, mus, tuple(tuple(a * b for b in q)
                                            for a in p)))
        return BivariateExpPoly.from_terms(raw)

    @staticmethod
    def from_t(u: ExpPoly) -> "BivariateExpPoly":
        return BivariateExpPoly.from_product(u, ExpPoly.constant(1.0))

    @staticmethod
    def from_s(u: ExpPoly) -> "BivariateExpPoly":
        return BivariateExpPoly.from_product(ExpPoly.constant(1.0), u)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        return BivariateExpPoly.from_terms(self.terms + other.terms)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __mul__(self, other):
        raw = []
        for at, as_, A in self.terms:
            for bt, bs, B in other.terms:
                C = [[0j] * (len(A[0]) + len(B[0]) - 1)
                     for _ in range(len(A) + len(B) - 1)]
                for i, ra in enumerate(A):
                    for j, a in enumerate(ra):
                        if a == 0:
                            continue
                        for k, rb in enumerate(B):
                            for m, b in enumerate(rb):
                                C[i + k][j + m] += a * b
                raw.append((at + bt, as_ + bs, C))
        return BivariateExpPoly.from_terms(raw)

    def scale(self, c):
        c = _check_finite(c)
        if c == 0:
            return BivariateExpPoly.zero()
        return BivariateExpPoly.from_terms(
            (mut, mus, tuple(tuple(c * v for v in row) for row in C))
            for mut, mus, C in self.terms)

    def diff_t(self) -> "BivariateExpPoly":
        raw = []
        for mut, mus, C in self.terms:
            nr, nc = len(C), len(C[0])
            D = [[0j] * nc for _ in range(nr)]
            for i in range(nr):
                for j in range(nc):
                    D[i][j] = mut * C[i][j] + \
                        ((i + 1) * C[i + 1][j] if i + 1 < nr else 0)
            raw.append((mut, mus, D))
        return BivariateExpPoly.from_terms(raw)

    def reflect_t(self) -> "BivariateExpPoly":
        return BivariateExpPoly.from_terms(
            (-mut, mus, tuple(_poly_scale(row, (-1) ** i)
                              for i, row in enumerate(C)))
            for mut, mus, C in self.terms)

    def swap_vars(self) -> "BivariateExpPoly":
        return BivariateExpPoly.from_terms(
            (mus, mut, tuple(zip(*C))) for mut, mus, C in self.terms)

    def mul_t(self, u: ExpPoly) -> "BivariateExpPoly":
        return self * BivariateExpPoly.from_t(u)

    def mul_s(self, u: ExpPoly) -> "BivariateExpPoly":
        return self * BivariateExpPoly.from_s(u)

    def eval(self, t, s) -> complex:
        acc = 0j
        for mut, mus, C in self.terms:
            v = 0j
            for row in reversed(C):
                v = v * t + _poly_eval(row, s)
            acc += v * cmath.exp(mut * t + mus * s)
        return acc

    def eval_many(self, ts, ss) -> np.ndarray:
        ts = np.asarray(ts, dtype=np.float64)
        ss = np.asarray(ss, dtype=np.float64)
        if not self.terms:
            return np.zeros(ts.shape, dtype=np.complex128)
        mut, mus, mats, offsets, nrows, ncols = _flatten_bivariate(self.terms)
        return _backends.eval_bivariate(mut, mus, mats, offsets, nrows,
                                        ncols, ts.ravel(), ss.ravel()) \
            .reshape(ts.shape)

    def max_abs_coeff(self) -> float:
        return max((abs(v) for _, _, C in self.terms
                    for row in C for v in row), default=0.0)


def _flatten_bivariate(terms):
    mut = np.array([t[0] for t in terms], dtype=np.complex128)
    mus = np.array([t[1] for t in terms], dtype=np.complex128)
    mats = np.concatenate([np.asarray(t[2], dtype=np.complex128).ravel()
                           for t in terms])
    nrows = np.array([len(t[2]) for t in terms], dtype=np.int64)
    ncols = np.array([len(t[2][0]) for t in terms], dtype=np.int64)
    offsets = np.zeros(len(terms) + 1, dtype=np.int64)
    np.cumsum(nrows * ncols, out=offsets[1:])
    return mut, mus, mats, offsets[:-1], nrows, ncols


# ---------------------------------------------------------------------------
# definite integration

@dataclass(frozen=True)
class Endpoint:
    """Integration endpoint ``scale * var + offset``; ``var`` is ``'t'``,
    ``'s'`` or ``None`` for a concrete real."""
    var: object
    scale: float = 1.0
    offset: float = 0.0

    @staticmethod
    def make(spec) -> "Endpoint":
        if isinstance(spec, Endpoint):
            return spec
        if spec in ("t", "s"):
            return Endpoint(spec)
        return Endpoint(None, 0.0, float(spec))

    def value_at(self, t, s) -> float:
        base = {"t": t, "s": s, None: 0.0}[self.var]
        return self.scale * base + self.offset


def _antiderivative(poly, kappa):
    """B with (B e^{kappa x})' = poly e^{kappa x} (kappa != 0), else int."""
    if kappa == 0:
        return (0j,) + tuple(c / (i + 1) for i, c in enumerate(poly))
    out = [0j] * len(poly)
    out[-1] = poly[-1] / kappa
    for j in range(len(poly) - 2, -1, -1):
        out[j] = (poly[j] - (j + 1) * out[j + 1]) / kappa
    return tuple(out)


def integrate_poly_exp(poly, kappa, lo: Endpoint, hi: Endpoint):
    """Exact ``int poly(x) e^{kappa x} dx`` over [lo, hi].

    Returns contributions as (var, mu, coeffs) triples: a polynomial in
    ``var`` times exp(mu*var), with var None meaning a plain constant.
    ``kappa`` is snapped through ``TAU_MERGE`` first: it is typically a
    sum of stored exponents, and the antiderivative is singular at zero.
    """
    poly = _poly_trim(poly)
    if not poly:
        return []
    kappa = _snap(complex(kappa))
    B = _antiderivative(poly, kappa)
    out = []
    for ep, sgn in ((hi, 1.0), (lo, -1.0)):
        if ep.var is None:
            x = ep.offset
            val = sgn * _poly_eval(B, x) * cmath.exp(kappa * x)
            out.append((None, 0j, (val,)))
        else:
            coeffs = _poly_scale(_poly_affine(B, ep.scale, ep.offset),
                                 sgn * cmath.exp(kappa * ep.offset))
            out.append((ep.var, kappa * complex(ep.scale), coeffs))
    return out


def ep_antideriv_definite(a: ExpPoly, lower, upper) -> BivariateExpPoly:
    """Exact definite integral of ``a`` between two endpoints.

    Endpoints may be concrete reals or the symbols ``'t'``/``'s'``;
    symbolic endpoints make the result a genuine bivariate function.
    """
    lo, hi = Endpoint.make(lower), Endpoint.make(upper)
    raw = []
    for mu, poly in a.terms:
        for var, m, coeffs in integrate_poly_exp(poly, mu, lo, hi):
            if var is None:
                raw.append((0j, 0j, ((coeffs[0],),)))
            elif var == "t":
                raw.append((m, 0j, tuple((c,) for c in coeffs)))
            else:
                raw.append((0j, m, (tuple(coeffs),)))
    return BivariateExpPoly.from_terms(raw)


# ---------------------------------------------------------------------------
# planar regions and piecewise kernels

@dataclass(frozen=True)
class HalfPlane:
    """Constraint a*t + b*s + c >= 0 (or > 0 when strict)."""
    a: float
    b: float
    c: float
    strict: bool = False

    def value(self, t, s) -> float:
        return self.a * t + self.b * s + self.c

    def normalized(self) -> "HalfPlane":
        m = max(abs(self.a), abs(self.b), abs(self.c))
        if m == 0:
            return self
        return HalfPlane(self.a / m, self.b / m, self.c / m, self.strict)

    def reflect_t(self) -> "HalfPlane":
        return HalfPlane(-self.a, self.b, self.c, self.strict)

    def swap_vars(self) -> "HalfPlane":
        return HalfPlane(self.b, self.a, self.c, self.strict)

    def negated(self) -> "HalfPlane":
        return HalfPlane(-self.a, -self.b, -self.c, not self.strict)


@dataclass(frozen=True)
class Region:
    """Finite intersection of half-planes; membership is pointwise."""
    constraints: tuple

    @staticmethod
    def whole_plane() -> "Region":
        return Region(())

    @staticmethod
    def of(*specs) -> "Region":
        return Region(tuple(HalfPlane(*s) if not isinstance(s, HalfPlane)
                            else s for s in specs))

    def closure_contains(self, t, s, tol=0.0) -> bool:
        return all(h.value(t, s) >= -tol for h in self.constraints)

    def interior_contains(self, t, s, tol=0.0) -> bool:
        return all(h.value(t, s) > tol for h in self.constraints)

    def closure_mask(self, ts, ss, tol=0.0) -> np.ndarray:
        mask = np.ones(np.shape(ts), dtype=bool)
        for h in self.constraints:
            mask &= (h.a * ts + h.b * ss + h.c) >= -tol
        return mask

    def reflect_t(self) -> "Region":
        return Region(tuple(h.reflect_t() for h in self.constraints))

    def swap_vars(self) -> "Region":
        return Region(tuple(h.swap_vars() for h in self.constraints))

    def intersect(self, other: "Region") -> "Region":
        return Region(self.constraints + other.constraints)

    def canonical_key(self):
        return tuple(sorted((h.a, h.b, h.c, h.strict) for h in
                            (c.normalized() for c in self.constraints)))


def _region_vertices(region: Region, T: float):
    tol = 1e-9 * max(T, 1.0)
    square = [HalfPlane(1, 0, T), HalfPlane(-1, 0, T),
              HalfPlane(0, 1, T), HalfPlane(0, -1, T)]
    lines = [(h.a, h.b, h.c) for h in list(region.constraints) + square]
    pts = []
    for i in range(len(lines)):
        a1, b1, c1 = lines[i]
        for j in range(i + 1, len(lines)):
            a2, b2, c2 = lines[j]
            det = a1 * b2 - a2 * b1
            scale = max(abs(a1), abs(b1), 1.0) * max(abs(a2), abs(b2), 1.0)
            if abs(det) <= 1e-12 * scale:
                continue
            t = (-c1 * b2 + c2 * b1) / det
            s = (-a1 * c2 + a2 * c1) / det
            if abs(t) <= T + tol and abs(s) <= T + tol \
                    and region.closure_contains(t, s, tol):
                pts.append((t, s))
    # dedupe on a tolerance grid
    uniq = {}
    for t, s in pts:
        uniq[(round(t / tol / 8), round(s / tol / 8))] = (t, s)
    return list(uniq.values())


def region_area_in_square(region: Region, T: float) -> float:
    """Area of the (convex) region clipped to the working square."""
    pts = _region_vertices(region, T)
    if len(pts) < 3:
        return 0.0
    cx = sum(p[0] for p in pts) / len(pts)
    cy = sum(p[1] for p in pts) / len(pts)
    pts.sort(key=lambda p: math.atan2(p[1] - cy, p[0] - cx))
    area = 0.0
    for k in range(len(pts)):
        x1, y1 = pts[k]
        x2, y2 = pts[(k + 1) % len(pts)]
        area += x1 * y2 - x2 * y1
    return abs(area) / 2.0


def region_has_interior(region: Region, T: float) -> bool:
    return region_area_in_square(region, T) > 1e-12 * T * T


def prune_region(region: Region, T: float) -> Region:
    """Drop duplicate and non-binding constraints (corner feasibility)."""
    kept = []
    seen = set()
    for h in region.constraints:
        n = h.normalized()
        key = (round(n.a, 12), round(n.b, 12), round(n.c, 12))
        if key in seen:
            continue
        seen.add(key)
        kept.append(h)
    out = []
    for i, h in enumerate(kept):
        others = out + kept[i + 1:]
        if region_has_interior(Region(tuple(others) + (h.negated(),)), T):
            out.append(h)
    return Region(tuple(sorted(
        out, key=lambda h: (h.a, h.b, h.c, h.strict))))


@dataclass(frozen=True)
class PiecewiseKernel:
    """Bivariate function on [-T, T]^2 given piecewise on planar regions.

    Regions have pairwise disjoint interiors and their closures cover the
    square; boundary evaluation resolves to the first piece in canonical
    order whose closure contains the point.
    """
    T: float
    pieces: tuple  # of (Region, BivariateExpPoly)

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("T must be positive")

    @staticmethod
    def from_pieces(T, pieces) -> "PiecewiseKernel":
        ordered = sorted(
            pieces, key=lambda p: (sum(h.strict for h in p[0].constraints),
                                   p[0].canonical_key()))
        return PiecewiseKernel(float(T), tuple(ordered))

    @staticmethod
    def single(T, expr: BivariateExpPoly) -> "PiecewiseKernel":
        return PiecewiseKernel(float(T), ((Region.whole_plane(), expr),))

    def _domain_tol(self):
        return 1e-9 * max(self.T, 1.0)

    def piece_at(self, t, s):
        tol = self._domain_tol()
        if abs(t) > self.T + tol or abs(s) > self.T + tol:
            raise OutOfDomain(f"({t}, {s}) outside [-{self.T}, {self.T}]^2")
        for region, expr in self.pieces:
            if region.closure_contains(t, s, tol):
                return region, expr
        raise OutOfDomain(f"no piece covers ({t}, {s})")

    def eval(self, t, s) -> complex:
        return self.piece_at(t, s)[1].eval(t, s)

    def eval_many(self, ts, ss) -> np.ndarray:
        ts = np.asarray(ts, dtype=np.float64)
        ss = np.asarray(ss, dtype=np.float64)
        tol = self._domain_tol()
        if np.any(np.abs(ts) > self.T + tol) or \
                np.any(np.abs(ss) > self.T + tol):
            raise OutOfDomain("grid extends outside the square")
        out = np.zeros(ts.shape, dtype=np.complex128)
        unassigned = np.ones(ts.shape, dtype=bool)
        for region, expr in self.pieces:
            mask = unassigned & region.closure_mask(ts, ss, tol)
            if mask.any():
                out[mask] = expr.eval_many(ts[mask], ss[mask])
                unassigned &= ~mask
        if unassigned.any():
            raise OutOfDomain("grid point not covered by any piece")
        return out

    def map_pieces(self, f) -> "PiecewiseKernel":
        return PiecewiseKernel(self.T, tuple((r, f(e))
                                             for r, e in self.pieces))

    def transpose(self) -> "PiecewiseKernel":
        return PiecewiseKernel.from_pieces(
            self.T, [(r.swap_vars(), e.swap_vars())
                     for r, e in self.pieces])

    def reflect_t(self) -> "PiecewiseKernel":
        return PiecewiseKernel.from_pieces(
            self.T, [(r.reflect_t(), e.reflect_t())
                     for r, e in self.pieces])

    def scale(self, c) -> "PiecewiseKernel":
        return self.map_pieces(lambda e: e.scale(c))

    def __add__(self, other: "PiecewiseKernel") -> "PiecewiseKernel":
        """Pointwise sum on the common refinement of the two covers."""
        if abs(self.T - other.T) > 1e-12 * max(self.T, 1.0):
            raise ValueError("kernels live on different squares")
        pieces = []
        for r1, e1 in self.pieces:
            for r2, e2 in other.pieces:
                inter = r1.intersect(r2)
                if region_has_interior(inter, self.T):
                    pieces.append((prune_region(inter, self.T), e1 + e2))
        return PiecewiseKernel.from_pieces(self.T, pieces)

    def max_abs_on_grid(self, n=21) -> float:
        xs = np.linspace(-self.T, self.T, n)
        tt, ss = np.meshgrid(xs, xs)
        return float(np.abs(self.eval_many(tt, ss)).max())


# spec-facing functional aliases ------------------------------------------

def ep_add(a: ExpPoly, b: ExpPoly) -> ExpPoly:
    return a + b


def ep_mul(a: ExpPoly, b: ExpPoly) -> ExpPoly:
    return a * b


def ep_diff(a: ExpPoly) -> ExpPoly:
    return a.diff()


def ep_reflect(a: ExpPoly) -> ExpPoly:
    return a.reflect()


def kernel_eval(K: PiecewiseKernel, t, s) -> complex:
    return K.eval(t, s)
