"""Synthetic forward model: periodic Gaussian kernels, circular blur, noise.

Kernel "sigma" values are variances in pixel^2 throughout. Kernels live on the
periodic image grid with their center at index ``(0, 0)``.
"""

import numpy as np

from .errors import DimensionMismatch, InvalidSigma, InvalidWeights
from .spectral import circular_convolve

__all__ = ["RNG_ALGORITHM", "MIXTURE4", "make_rng", "gaussian_kernel", "gaussian_mixture_kernel", "degrade"]

RNG_ALGORITHM = "numpy.random.Philox"

# four equally weighted Gaussians with variances 1..5 and small offsets
MIXTURE4 = (
    (0.25, 1.0, (0.0, 0.0)),
    (0.25, 7.0 / 3.0, (1.5, -1.0)),
    (0.25, 11.0 / 3.0, (-1.0, 2.0)),
    (0.25, 5.0, (-0.5, -1.5)),
)


def make_rng(seed):
    """Counter-based generator so that runs replay across machines."""
    return np.random.Generator(np.random.Philox(int(seed)))


def _wrapped_profile(size, center, variance):
    # signed offsets in (-size/2, size/2] from the center, plus one alias each side
    idx = np.arange(size, dtype=np.float64)
    d = (idx - center + size / 2.0) % size - size / 2.0
    shifts = np.array([-size, 0.0, size])[:, None]
    return np.exp(-((d[None, :] + shifts) ** 2) / (2.0 * variance)).sum(axis=0)


def _gaussian(m, n, variance, center=(0.0, 0.0)):
    if not np.isfinite(variance) or variance <= 0:
        raise InvalidSigma(f"kernel variance must be positive, got {variance!r}")
    k = np.outer(_wrapped_profile(m, center[0], variance), _wrapped_profile(n, center[1], variance))
    return k / k.sum()


def gaussian_kernel(m, n, sigma):
    """Unit-sum periodic Gaussian of variance ``sigma`` centered at ``(0, 0)``.

    Each entry sums the density over the nearest alias in every direction,
    which is accurate for ``sigma <= (min(m, n) / 6) ** 2``.
    """
    return _gaussian(m, n, sigma)


def gaussian_mixture_kernel(m, n, components):
    """Convex combination of periodic Gaussians.

    ``components`` is a sequence of ``(weight, sigma, (ci, cj))``. Every
    component is normalized before mixing so the result has unit sum.
    """
    components = list(components)
    if not components:
        raise InvalidWeights("at least one component is required")
    weights = np.array([c[0] for c in components], dtype=np.float64)
    if np.any(weights < 0) or not np.isclose(weights.sum(), 1.0, rtol=0, atol=1e-12):
        raise InvalidWeights(f"weights must be non-negative and sum to 1, got {weights}")
    k = np.zeros((m, n))
    for w, sigma, center in components:
        k += w * _gaussian(m, n, sigma, center)
    return k / k.sum()


def degrade(u, k, noise_var, seed):
    """Blur ``u`` circularly with ``k`` and add i.i.d. Gaussian noise.

    Returns
    -------
    f : ndarray
        The observation ``k * u + noise``.
    delta : float
        The realized noise norm ``||noise||_2``.
    """
    u = np.asarray(u, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    if u.shape != k.shape:
        raise DimensionMismatch(f"image {u.shape} vs kernel {k.shape}")
    if noise_var < 0:
        raise ValueError("noise variance must be non-negative")
    blurred = circular_convolve(u, k)
    if noise_var == 0:
        return blurred, 0.0
    noise = make_rng(seed).normal(0.0, np.sqrt(noise_var), size=u.shape)
    return blurred + noise, float(np.sqrt(np.sum(noise**2)))
