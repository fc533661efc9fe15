"""Discrete Fourier machinery shared by all solvers.

Conventions
-----------
* The forward transform is the unnormalized sum
  ``X[i, j] = sum_{a, b} x[a, b] exp(-2 pi i (i a / m + j b / n))``;
  the inverse carries the ``1 / (m n)`` factor (``numpy.fft`` defaults).
* Convolution is circular. A kernel is stored with its center at index
  ``(0, 0)``.
* Because of the unnormalized forward transform, spatial squared norms equal
  ``sum |X|^2 / (m n)`` (Parseval). Residuals are always reported in spatial
  units.
"""

import numpy as np

from .errors import DimensionMismatch, NonHermitianSpectrum

__all__ = [
    "HERMITIAN_RTOL",
    "forward_dft",
    "inverse_dft",
    "mirror",
    "hermitian_defect",
    "is_hermitian",
    "canonical_mask",
    "sobolev_weights",
    "sobolev_norm_sq",
    "residual_l2_sq",
    "circular_convolve",
    "hermitian_part",
]

HERMITIAN_RTOL = 1e-10


def _as_image(img):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise DimensionMismatch(f"expected a non-empty 2-D image, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    return img


def mirror(x):
    """Return ``x[(-i) mod m, (-j) mod n]`` for every index ``(i, j)``."""
    x = np.asarray(x)
    return np.roll(np.flip(x, axis=(0, 1)), shift=(1, 1), axis=(0, 1))


def hermitian_defect(spec):
    """Largest violation of ``X[i,j] = conj(X[-i,-j])``, relative to ``max |X|``."""
    spec = np.asarray(spec)
    scale = np.max(np.abs(spec)) if spec.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(spec - np.conj(mirror(spec)))) / scale)


def is_hermitian(spec, rtol=HERMITIAN_RTOL):
    return hermitian_defect(spec) <= rtol


def forward_dft(img):
    """Unnormalized 2-D DFT of a real image.

    FFT round-off is projected away so the result is exactly conjugate
    symmetric. Elementwise arithmetic on such spectra keeps the symmetry
    exact, which matters where bins are divided by tiny kernel values.
    """
    return hermitian_part(np.fft.fft2(_as_image(img)))


def hermitian_part(spec):
    """``(X + conj(X[-i, -j])) / 2``, the nearest conjugate-symmetric spectrum."""
    spec = np.asarray(spec, dtype=np.complex128)
    return 0.5 * (spec + np.conj(mirror(spec)))


def inverse_dft(spec, rtol=HERMITIAN_RTOL):
    """Inverse of :func:`forward_dft` returning a real image.

    Raises
    ------
    NonHermitianSpectrum
        If ``spec`` is not conjugate symmetric within ``rtol`` (relative to its
        largest modulus). The tiny imaginary residue left by round-off is
        dropped only after this check passes.
    """
    spec = np.asarray(spec, dtype=np.complex128)
    if spec.ndim != 2 or spec.size == 0:
        raise DimensionMismatch(f"expected a non-empty 2-D spectrum, got shape {spec.shape}")
    defect = hermitian_defect(spec)
    if defect > rtol:
        raise NonHermitianSpectrum(
            f"spectrum violates conjugate symmetry by {defect:.3e} (tolerance {rtol:.1e})"
        )
    img = np.fft.ifft2(spec)
    scale = np.max(np.abs(spec))
    if scale > 0 and np.max(np.abs(img.imag)) > rtol * scale:
        raise NonHermitianSpectrum("inverse transform has a non-negligible imaginary part")
    return np.ascontiguousarray(img.real)


def canonical_mask(shape):
    """Boolean mask selecting one representative of every conjugate pair.

    A bin is canonical when its flat index is not larger than the flat index of
    its mirror ``(-i, -j)``. Self-conjugate bins (DC and Nyquist rows/columns
    crossings) are canonical and are their own mirror.
    """
    m, n = shape
    i = np.arange(m)[:, None]
    j = np.arange(n)[None, :]
    flat = i * n + j
    flat_mirror = ((-i) % m) * n + ((-j) % n)
    return flat <= flat_mirror


def sobolev_weights(m, n, exponent):
    """Discrete Bessel-potential weights ``Delta[i, j] ** exponent``.

    ``Delta[i, j] = 1 + 2 m^2 (1 - cos(2 pi i / m)) + 2 n^2 (1 - cos(2 pi j / n))``,
    with ``(0, 0)`` the DC bin.
    """
    if m < 1 or n < 1:
        raise ValueError("grid dimensions must be positive")
    if exponent < 0:
        raise ValueError("Sobolev exponent must be non-negative")
    ci = 2.0 * m * m * (1.0 - np.cos(2.0 * np.pi * np.arange(m) / m))
    cj = 2.0 * n * n * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / n))
    # cos(2 pi (m - i) / m) and cos(2 pi i / m) may round differently
    ci = 0.5 * (ci + ci[(-np.arange(m)) % m])
    cj = 0.5 * (cj + cj[(-np.arange(n)) % n])
    delta = 1.0 + ci[:, None] + cj[None, :]
    if exponent == 0:
        return np.ones((m, n))
    return delta**exponent


def sobolev_norm_sq(spec, weights):
    """``sum weights * |spec|^2`` (no Parseval factor)."""
    spec = np.asarray(spec)
    weights = np.asarray(weights)
    if spec.shape != weights.shape:
        raise DimensionMismatch(f"spectrum {spec.shape} vs weights {weights.shape}")
    return float(np.sum(weights * (spec.real**2 + spec.imag**2)))


def residual_l2_sq(f_hat, U_hat, K_hat):
    """Spatial squared residual ``||K * U - f||^2`` computed from spectra."""
    f_hat = np.asarray(f_hat)
    U_hat = np.asarray(U_hat)
    K_hat = np.asarray(K_hat)
    if not (f_hat.shape == U_hat.shape == K_hat.shape):
        raise DimensionMismatch(
            f"spectra shapes differ: {f_hat.shape}, {U_hat.shape}, {K_hat.shape}"
        )
    r = K_hat * U_hat - f_hat
    return float(np.sum(r.real**2 + r.imag**2) / f_hat.size)


def circular_convolve(u, k):
    """Circular convolution of two equally sized real images."""
    u = _as_image(u)
    k = _as_image(k)
    if u.shape != k.shape:
        raise DimensionMismatch(f"image {u.shape} vs kernel {k.shape}")
    return np.fft.ifft2(np.fft.fft2(u) * np.fft.fft2(k)).real
