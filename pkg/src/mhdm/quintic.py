"""Real roots of real polynomials of degree at most five.

Roots come from the eigenvalues of the companion matrix, followed by a few
Newton steps on the original coefficients. An eigenvalue is treated as real
when ``|Im| <= imag_tol * (1 + |Re|)``.

Coefficients are ordered from low to high degree: ``c[0] + c[1] x + ... + c[5] x^5``.
"""

import numpy as np

from .errors import ZeroPolynomial

__all__ = [
    "MAX_DEGREE",
    "IMAG_TOL",
    "polyval",
    "companion",
    "real_roots",
    "real_roots_batch",
    "cauchy_bound",
]

MAX_DEGREE = 5
IMAG_TOL = 1e-8
TRIM_RTOL = 1e-14
MERGE_RTOL = 1e-8
NEWTON_STEPS = 3


def polyval(coeffs, x):
    """Horner evaluation along the last axis of ``coeffs``; broadcasts over ``x``."""
    coeffs = np.asarray(coeffs)
    out = np.zeros(np.broadcast(coeffs[..., 0], x).shape, dtype=np.result_type(coeffs, x))
    for k in range(coeffs.shape[-1] - 1, -1, -1):
        out = out * x + coeffs[..., k]
    return out


def _polyder_val(coeffs, x):
    coeffs = np.asarray(coeffs)
    deg = coeffs.shape[-1] - 1
    d = coeffs[..., 1:] * np.arange(1, deg + 1)
    return polyval(d, x)


def companion(coeffs):
    """Companion matrices for (stacked) polynomials with nonzero leading term.

    ``coeffs`` has shape ``(..., d + 1)``; the result has shape ``(..., d, d)``.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    deg = coeffs.shape[-1] - 1
    mat = np.zeros(coeffs.shape[:-1] + (deg, deg))
    if deg > 1:
        idx = np.arange(deg - 1)
        mat[..., idx + 1, idx] = 1.0
    mat[..., :, -1] = -coeffs[..., :-1] / coeffs[..., -1:]
    return mat


def cauchy_bound(coeffs):
    """Radius containing every root: ``1 + max |c_k / c_d|``."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=np.float64), "b")
    if c.size <= 1:
        return 1.0
    return 1.0 + float(np.max(np.abs(c[:-1] / c[-1])))


def _polish(coeffs, roots):
    """Newton refinement that only accepts steps reducing ``|p|``."""
    best = roots.copy()
    best_val = np.abs(polyval(coeffs, best))
    x = roots.copy()
    # wild steps may overflow; they are discarded by the finiteness check
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(NEWTON_STEPS):
            d = _polyder_val(coeffs, x)
            safe = d != 0
            step = np.where(safe, polyval(coeffs, x) / np.where(safe, d, 1.0), 0.0)
            x = x - step
            val = np.abs(polyval(coeffs, x))
            better = np.isfinite(x) & (val < best_val)
            best = np.where(better, x, best)
            best_val = np.where(better, val, best_val)
            x = np.where(np.isfinite(x), x, best)
    return best


def _merge_sorted(roots):
    out = []
    for r in np.sort(roots):
        if out and abs(r - out[-1]) <= MERGE_RTOL * (1.0 + abs(r)):
            continue
        out.append(float(r))
    return out


def real_roots(coeffs, imag_tol=IMAG_TOL):
    """All distinct real roots, sorted ascending.

    Parameters
    ----------
    coeffs : array_like, length <= 6
        Coefficients from the constant term upwards.

    Raises
    ------
    ZeroPolynomial
        If every coefficient is zero.
    """
    c = np.asarray(coeffs, dtype=np.float64).ravel()
    if c.size > MAX_DEGREE + 1:
        raise ValueError(f"degree above {MAX_DEGREE} is not supported")
    if not np.all(np.isfinite(c)):
        raise ValueError("coefficients must be finite")
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        raise ZeroPolynomial("all coefficients are zero")
    c = np.where(np.abs(c) <= TRIM_RTOL * scale, 0.0, c / scale)
    c = np.trim_zeros(c, "b")
    # factor out roots at zero so the companion matrix stays well conditioned
    zeros = 0
    while c.size > 1 and c[0] == 0.0:
        c = c[1:]
        zeros += 1
    roots = [0.0] if zeros else []
    if c.size > 1:
        eig = np.linalg.eigvals(companion(c))
        cand = eig.real[np.abs(eig.imag) <= imag_tol * (1.0 + np.abs(eig.real))]
        if cand.size:
            roots.extend(_polish(c, cand).tolist())
    return _merge_sorted(roots)


def real_roots_batch(coeffs, imag_tol=IMAG_TOL):
    """Vectorized real-root extraction for a stack of polynomials.

    Parameters
    ----------
    coeffs : ndarray, shape (N, d + 1)
        One polynomial per row, constant term first.

    Returns
    -------
    ndarray, shape (N, d)
        Real roots padded with NaN. Rows are not sorted or de-duplicated; rows
        whose leading coefficient is negligible are handled by
        :func:`real_roots` one by one.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.ndim != 2:
        raise ValueError("coeffs must be two-dimensional")
    N, d1 = coeffs.shape
    deg = d1 - 1
    out = np.full((N, deg), np.nan)
    if N == 0:
        return out
    scale = np.max(np.abs(coeffs), axis=1)
    if np.any(scale == 0.0):
        raise ZeroPolynomial(f"row {int(np.argmin(scale))} has all coefficients zero")
    c = coeffs / scale[:, None]
    full = np.abs(c[:, -1]) > TRIM_RTOL
    if np.any(full):
        cf = c[full]
        eig = np.linalg.eigvals(companion(cf))
        is_real = np.abs(eig.imag) <= imag_tol * (1.0 + np.abs(eig.real))
        re = eig.real
        polished = _polish(cf[:, None, :], re)
        out[full] = np.where(is_real, polished, np.nan)
    for row in np.flatnonzero(~full):
        r = real_roots(coeffs[row], imag_tol=imag_tol)
        out[row, : len(r)] = r
    return out
