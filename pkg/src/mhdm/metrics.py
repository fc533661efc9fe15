"""Image quality measures: PSNR, SSIM and relative L2 error."""

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DimensionMismatch, TooSmall, ZeroReference

__all__ = ["psnr", "ssim", "rel_l2_error", "SSIM_WINDOW", "SSIM_SIGMA"]

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(x, ref):
    x = np.asarray(x, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if x.shape != ref.shape:
        raise DimensionMismatch(f"{x.shape} vs {ref.shape}")
    return x, ref


def psnr(x, ref, peak=1.0):
    """Peak signal-to-noise ratio in dB; ``inf`` for identical inputs."""
    x, ref = _pair(x, ref)
    if peak <= 0:
        raise ValueError("peak must be positive")
    mse = np.mean((x - ref) ** 2)
    if mse == 0:
        return float("inf")
    return float(10.0 * np.log10(peak**2 / mse))


def _gauss_taps():
    r = (SSIM_WINDOW - 1) // 2
    t = np.exp(-0.5 * (np.arange(-r, r + 1) / SSIM_SIGMA) ** 2)
    return t / t.sum()


def _filter_valid(img, taps):
    r = (len(taps) - 1) // 2
    out = correlate1d(img, taps, axis=0, mode="constant")
    out = correlate1d(out, taps, axis=1, mode="constant")
    return out[r:-r, r:-r]


def ssim(x, ref, data_range=1.0):
    """Mean structural similarity with an 11x11 Gaussian window (sigma 1.5).

    Local statistics use population (biased) moments and only windows that
    fit entirely inside the image are averaged.
    """
    x, ref = _pair(x, ref)
    if min(x.shape) < SSIM_WINDOW:
        raise TooSmall(f"SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {x.shape}")
    taps = _gauss_taps()
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mx = _filter_valid(x, taps)
    my = _filter_valid(ref, taps)
    sxx = _filter_valid(x * x, taps) - mx * mx
    syy = _filter_valid(ref * ref, taps) - my * my
    sxy = _filter_valid(x * ref, taps) - mx * my
    num = (2 * mx * my + c1) * (2 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


def rel_l2_error(x, ref):
    """``||x - ref|| / ||ref||``. Not symmetric in its arguments."""
    x, ref = _pair(x, ref)
    norm = np.linalg.norm(ref)
    if norm == 0:
        raise ZeroReference("reference has zero norm")
    return float(np.linalg.norm(x - ref) / norm)
