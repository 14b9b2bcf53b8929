"""Pure-Python (numpy) evaluation backend.

Same contract as the compiled core in ``_evalcore.pyx``; vectorizes over
evaluation points, looping only over terms.
"""
import numpy as np


def eval_exppoly(mu, coeffs, offsets, xs):
    """Evaluate ``sum_k p_k(x) exp(mu_k x)`` at the points ``xs``.

    Parameters
    ----------
    mu : complex128[nterms]
    coeffs : complex128[total]
        Polynomial coefficients of every term, ascending degree, concatenated.
    offsets : int64[nterms + 1]
        ``coeffs[offsets[k]:offsets[k+1]]`` is the polynomial of term ``k``.
    xs : float64[npts]
    """
    xs = np.asarray(xs, dtype=np.float64)
    out = np.zeros(xs.shape, dtype=np.complex128)
    for k in range(len(mu)):
        p = coeffs[offsets[k]:offsets[k + 1]]
        acc = np.full(xs.shape, p[-1], dtype=np.complex128)
        for c in p[-2::-1]:
            acc = acc * xs + c
        out += acc * np.exp(mu[k] * xs)
    return out


def eval_bivariate(mut, mus, mats, offsets, nrows, ncols, ts, ss):
    """Evaluate ``sum_k (sum_ij C_k[i,j] t^i s^j) exp(mut_k t + mus_k s)``.

    ``mats`` concatenates the row-major coefficient matrices; term ``k``
    has shape ``(nrows[k], ncols[k])`` starting at ``offsets[k]``.
    """
    ts = np.asarray(ts, dtype=np.float64)
    ss = np.asarray(ss, dtype=np.float64)
    out = np.zeros(ts.shape, dtype=np.complex128)
    for k in range(len(mut)):
        nr, nc = int(nrows[k]), int(ncols[k])
        C = mats[offsets[k]:offsets[k] + nr * nc].reshape(nr, nc)
        # Horner in s per row, then Horner in t over the row values.
        rows = np.full(ts.shape + (nr,), 0.0, dtype=np.complex128)
        for i in range(nr):
            acc = np.full(ts.shape, C[i, nc - 1], dtype=np.complex128)
            for j in range(nc - 2, -1, -1):
                acc = acc * ss + C[i, j]
            rows[..., i] = acc
        val = rows[..., nr - 1]
        for i in range(nr - 2, -1, -1):
            val = val * ts + rows[..., i]
        out += val * np.exp(mut[k] * ts + mus[k] * ss)
    return out
