"""Exact per-frequency minimizers of the blind MHDM subproblems.

At a single frequency the step ``n -> n + 1`` minimizes over ``p, q`` in C::

    f_n(p, q) = |(p + p_n)(q + q_n) - z|^2 + a |p|^2 + b |q|^2

with ``a = lambda_{n+1} Delta^r``, ``b = mu_{n+1} Delta^s``, ``p_n = U_n^``,
``q_n = K_n^`` and ``z = f^``. Given the kernel value the optimal image value
is explicit,

    p + p_n = (a p_n + z (conj(q) + q_n)) / (|q + q_n|^2 + a),

and when ``q_n >= 0`` and ``conj(z) p_n >= 0`` a minimizer exists with
``q >= 0`` real. Substituting the image update into the stationarity
condition in ``q`` gives a real quintic in ``y = q + q_n``; the solver
evaluates ``f_n`` at all of its admissible real roots and keeps the best.

All functions broadcast over numpy arrays so that a whole frequency plane is
solved in one call.
"""

from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NoRealRoot, NonHermitianSpectrum
from .quintic import real_roots_batch
from .spectral import canonical_mask, hermitian_defect, mirror

__all__ = [
    "FrequencySolution",
    "objective",
    "quintic_coefficients",
    "solve_initial",
    "solve_step",
    "solve_plane",
]

# eigenvalues this close to the real axis are still tried as candidates; a
# spurious candidate only costs an objective evaluation
CANDIDATE_IMAG_TOL = 1e-6
NEG_CLAMP = 1e-9
TIE_RTOL = 1e-12


class FrequencySolution(NamedTuple):
    p_star: np.ndarray
    q_star: np.ndarray
    objective: np.ndarray


def objective(a, b, p_n, q_n, z, p, q):
    """Value of ``f_n(p, q)``."""
    r = (p + p_n) * (q + q_n) - z
    return np.abs(r) ** 2 + a * np.abs(p) ** 2 + b * np.abs(q) ** 2


def solve_initial(a, b, z):
    """Closed-form minimizer of ``|p q - z|^2 + a |p|^2 + b |q|^2``.

    The kernel value is chosen real and non-negative and the image value
    inherits the phase of ``z``::

        q = sqrt([sqrt(a / b) |z| - a]_+),   p = sgn(z) sqrt([sqrt(b / a) |z| - b]_+)
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    z = np.asarray(z, dtype=np.complex128)
    absz = np.abs(z)
    q = np.sqrt(np.maximum(np.sqrt(a / b) * absz - a, 0.0))
    mag = np.sqrt(np.maximum(np.sqrt(b / a) * absz - b, 0.0))
    # exp(i arg z) rather than z / |z|, which overflows for subnormal z
    phase = np.where(absz > 0, np.exp(1j * np.angle(z)), 0.0)
    p = phase * mag
    return FrequencySolution(p, q, objective(a, b, 0.0, 0.0, z, p, q))


def quintic_coefficients(a, b, p_n, q_n, z):
    """Coefficients (constant term first) of the stationarity quintic in ``y = q + q_n``.

    Uses ``w = Re(conj(z) p_n)``, which is the full product whenever the
    phase constraint on ``p_n`` holds.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    p_n = np.asarray(p_n, dtype=np.complex128)
    q_n = np.asarray(q_n, dtype=np.float64)
    z = np.asarray(z, dtype=np.complex128)
    w = (np.conj(z) * p_n).real
    abs_p2 = np.abs(p_n) ** 2
    abs_z2 = np.abs(z) ** 2
    c5 = b
    c4 = -b * q_n
    c3 = 2.0 * a * b
    c2 = a * w - 2.0 * a * b * q_n
    c1 = a * a * abs_p2 - a * abs_z2 + a * a * b
    c0 = -a * a * (w + b * q_n)
    return np.stack(np.broadcast_arrays(c0, c1, c2, c3, c4, c5), axis=-1)


def solve_step(a, b, p_n, q_n, z):
    """Minimizer of ``f_n`` for one or many frequencies.

    Candidates are the real roots ``y >= 0`` of the stationarity quintic plus
    the zero kernel increment ``y = q_n``; each is paired with its optimal
    image value and the candidate with the lowest ``f_n`` wins. Ties within
    ``1e-12`` (relative) go to the smallest ``|q|``.

    Raises
    ------
    NoRealRoot
        If the quintic of some frequency has no real root at all. Its
        ``bin_index`` is the flat index within the broadcast input.
    """
    a, b, p_n, q_n, z = np.broadcast_arrays(
        np.asarray(a, dtype=np.float64),
        np.asarray(b, dtype=np.float64),
        np.asarray(p_n, dtype=np.complex128),
        np.asarray(q_n, dtype=np.float64),
        np.asarray(z, dtype=np.complex128),
    )
    shape = a.shape
    a, b, p_n, q_n, z = (x.ravel() for x in (a, b, p_n, q_n, z))
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("penalty weights must be strictly positive")

    p_star = np.zeros(a.shape, dtype=np.complex128)
    q_star = np.zeros(a.shape)
    trivial = (z == 0) & (p_n == 0) & (q_n == 0)
    work = np.flatnonzero(~trivial)

    if work.size:
        aw, bw, pw, qw, zw = a[work], b[work], p_n[work], q_n[work], z[work]
        roots = real_roots_batch(
            quintic_coefficients(aw, bw, pw, qw, zw), imag_tol=CANDIDATE_IMAG_TOL
        )
        missing = np.all(np.isnan(roots), axis=1)
        if np.any(missing):
            bad = int(work[np.argmax(missing)])
            raise NoRealRoot("stationarity quintic has no real root", bin_index=(bad,))
        # y slightly below zero from round-off is clamped, larger negatives dropped
        tol = NEG_CLAMP * (1.0 + qw[:, None])
        roots = np.where((roots < 0) & (roots >= -tol), 0.0, roots)
        roots = np.where(roots < 0, np.nan, roots)
        y = np.concatenate([roots, qw[:, None]], axis=1)

        ac = aw[:, None]
        with np.errstate(invalid="ignore"):
            p_tot = (ac * pw[:, None] + zw[:, None] * y) / (y * y + ac)
            p_inc = p_tot - pw[:, None]
            q_inc = y - qw[:, None]
            obj = objective(ac, bw[:, None], pw[:, None], qw[:, None], zw[:, None], p_inc, q_inc)
        obj = np.where(np.isnan(y), np.inf, obj)

        best = np.min(obj, axis=1, keepdims=True)
        near = obj <= best + TIE_RTOL * (1.0 + np.abs(best))
        choice = np.argmin(np.where(near, np.abs(q_inc), np.inf), axis=1)
        rows = np.arange(work.size)
        p_star[work] = p_inc[rows, choice]
        q_star[work] = q_inc[rows, choice]

    obj = objective(a, b, p_n, q_n, z, p_star, q_star)
    return FrequencySolution(p_star.reshape(shape), q_star.reshape(shape), obj.reshape(shape))


def solve_plane(f_hat, U_hat, K_hat, wr, ws, lam, mu, pin_means=True):
    """Increment spectra ``(u^, k^)`` for one MHDM step over the whole grid.

    Pass ``U_hat = K_hat = None`` for the initial step, which uses the closed
    form of :func:`solve_initial`. Only one bin of each conjugate pair is
    solved; the partner is filled by conjugation, so both increments describe
    real images. Self-conjugate bins are forced real.

    With ``pin_means`` the DC bin is overridden: ``(f^[0, 0], 1)`` at the
    initial step and ``(0, 0)`` afterwards, which keeps ``sum U_n = sum f`` and
    ``sum K_n = 1``.

    Raises
    ------
    NoRealRoot
        With ``bin_index`` set to the 2-D index of the failing bin.
    """
    f_hat = np.asarray(f_hat, dtype=np.complex128)
    wr = np.asarray(wr, dtype=np.float64)
    ws = np.asarray(ws, dtype=np.float64)
    shape = f_hat.shape
    if wr.shape != shape or ws.shape != shape:
        raise DimensionMismatch(f"weights {wr.shape}/{ws.shape} vs data {shape}")
    initial = U_hat is None
    if initial != (K_hat is None):
        raise ValueError("U_hat and K_hat must both be given or both be None")

    mask = canonical_mask(shape)
    i = np.arange(shape[0])[:, None]
    j = np.arange(shape[1])[None, :]
    self_conj = ((-i) % shape[0] == i) & ((-j) % shape[1] == j)

    a = lam * wr[mask]
    b = mu * ws[mask]
    z = f_hat[mask]
    if initial:
        sol = solve_initial(a, b, z)
    else:
        U_hat = np.asarray(U_hat, dtype=np.complex128)
        K_hat = np.asarray(K_hat)
        if U_hat.shape != shape or K_hat.shape != shape:
            raise DimensionMismatch("iterate spectra do not match the data")
        for name, spec in (("U_hat", U_hat), ("K_hat", K_hat)):
            if hermitian_defect(spec) > 1e-10:
                raise NonHermitianSpectrum(f"{name} is not conjugate symmetric")
        K_real = np.real(K_hat).astype(np.float64)
        kscale = max(1.0, float(np.max(np.abs(K_real))))
        if np.min(K_real) < -NEG_CLAMP * kscale:
            raise ValueError("kernel spectrum has negative entries")
        K_real = np.maximum(K_real, 0.0)
        try:
            sol = solve_step(a, b, U_hat[mask], K_real[mask], z)
        except NoRealRoot as exc:
            flat = np.flatnonzero(mask)[exc.bin_index[0]]
            raise NoRealRoot(
                "stationarity quintic has no real root",
                bin_index=np.unravel_index(flat, shape),
            ) from exc

    u_hat = np.zeros(shape, dtype=np.complex128)
    k_hat = np.zeros(shape, dtype=np.float64)
    u_hat[mask] = sol.p_star
    k_hat[mask] = sol.q_star
    u_hat[self_conj] = u_hat[self_conj].real
    u_hat = np.where(mask, u_hat, np.conj(mirror(u_hat)))
    k_hat = np.where(mask, k_hat, mirror(k_hat))

    if pin_means:
        if initial:
            u_hat[0, 0] = f_hat[0, 0].real
            k_hat[0, 0] = 1.0
        else:
            u_hat[0, 0] = 0.0
            k_hat[0, 0] = 0.0
    return u_hat, k_hat
