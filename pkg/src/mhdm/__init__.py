"""Blind deconvolution by multiscale hierarchical decomposition.

Image and kernel are recovered jointly from ``f = k * u + noise`` (circular
convolution) by a sequence of Fourier-domain variational steps with
geometrically shrinking penalty weights. Each step is solved exactly per
frequency, so a whole run costs a handful of FFTs and small root finds.
"""

__version__ = "0.1.0"

from .blind import MhdmState, RunConfig, StopReason, reconstruct, residual_bound, run_blind, stopping_index
from .degrade import degrade, gaussian_kernel, gaussian_mixture_kernel
from .errors import (
    ConfigError,
    DimensionMismatch,
    IndexOutOfRange,
    InvalidSigma,
    InvalidWeights,
    MhdmError,
    NoRealRoot,
    NonHermitianSpectrum,
    TooSmall,
    ZeroPolynomial,
    ZeroReference,
)
from .metrics import psnr, rel_l2_error, ssim
from .nonblind import NonBlindConfig, run_nonblind, sweep_guessed_kernels
from .variational import optimize_ratio, run_grid_search

__all__ = [
    "__version__",
    "RunConfig",
    "MhdmState",
    "StopReason",
    "run_blind",
    "reconstruct",
    "residual_bound",
    "stopping_index",
    "NonBlindConfig",
    "run_nonblind",
    "sweep_guessed_kernels",
    "run_grid_search",
    "optimize_ratio",
    "degrade",
    "gaussian_kernel",
    "gaussian_mixture_kernel",
    "psnr",
    "ssim",
    "rel_l2_error",
    "MhdmError",
    "ConfigError",
    "DimensionMismatch",
    "IndexOutOfRange",
    "InvalidSigma",
    "InvalidWeights",
    "NoRealRoot",
    "NonHermitianSpectrum",
    "TooSmall",
    "ZeroPolynomial",
    "ZeroReference",
]
