"""Non-blind MHDM with a fixed, guessed kernel.

Each step is a Tikhonov problem in the image increment alone,

    min_u ||f - k * (u + U_n)||^2 + lambda_n ||u||_{H^r}^2,

solved per frequency by ``u^ = conj(k^) (f^ - k^ U_n^) / (|k^|^2 + lambda_n Delta^r)``.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .blind import MhdmState, StopReason
from .degrade import gaussian_kernel
from .errors import ConfigError, DimensionMismatch
from .spectral import forward_dft, residual_l2_sq, sobolev_weights

__all__ = ["NonBlindConfig", "nonblind_increment", "run_nonblind", "sweep_guessed_kernels"]


@dataclass
class NonBlindConfig:
    r: float = 1.0
    lambda0: float = 1.4e-4
    decay: float = 4.0
    tau: float = math.sqrt(1.001)
    delta: float = 0.0
    max_iter: int = 30
    min_iter: int = 0
    pin_means: bool = True
    kernel: np.ndarray = field(default=None, repr=False)

    def validate(self):
        if self.r < 0:
            raise ConfigError("Sobolev exponent must be non-negative")
        if not self.lambda0 > 0:
            raise ConfigError("lambda0 must be positive")
        if not self.decay > 1:
            raise ConfigError("decay must exceed 1")
        if not self.tau > 1:
            raise ConfigError("tau must exceed 1")
        if self.delta < 0:
            raise ConfigError("delta must be non-negative")
        if self.max_iter < 1 or self.min_iter < 0:
            raise ConfigError("invalid iteration limits")


def nonblind_increment(f_hat, U_hat, k_hat, weight):
    """Pointwise minimizer of ``|k^ (u + U^) - f^|^2 + weight |u|^2``."""
    return np.conj(k_hat) * (f_hat - k_hat * U_hat) / (np.abs(k_hat) ** 2 + weight)


def run_nonblind(f, cfg):
    """Run the non-blind MHDM with ``cfg.kernel`` as the (fixed) blur.

    The returned state stores the kernel spectrum as its first kernel scale
    and zeros afterwards, so ``K_hat`` is the guessed kernel throughout.
    """
    cfg.validate()
    if cfg.kernel is None:
        raise ConfigError("a kernel guess is required")
    f_hat = forward_dft(f)
    k = np.asarray(cfg.kernel, dtype=np.float64)
    if k.shape != f_hat.shape:
        raise DimensionMismatch(f"kernel {k.shape} vs image {f_hat.shape}")
    shape = f_hat.shape
    k_hat = forward_dft(k)
    wr = sobolev_weights(*shape, cfg.r)
    threshold = cfg.tau * cfg.delta**2

    state = MhdmState(
        shape=shape,
        f_hat=f_hat,
        U_hat=np.zeros(shape, dtype=np.complex128),
        K_hat=k_hat.copy(),
        threshold=threshold,
    )
    U_hat = np.zeros(shape, dtype=np.complex128)
    for n in range(cfg.max_iter):
        lam = cfg.lambda0 * cfg.decay ** (-n)
        du = nonblind_increment(f_hat, U_hat, k_hat, lam * wr)
        if cfg.pin_means:
            du[0, 0] = f_hat[0, 0].real if n == 0 else 0.0
        U_hat = U_hat + du
        state.scales_u.append(du)
        state.scales_k.append(k_hat.copy() if n == 0 else np.zeros(shape, dtype=np.complex128))
        phi = residual_l2_sq(f_hat, U_hat, k_hat)
        state.residuals.append(phi)
        state.lambdas.append(lam)
        state.mus.append(0.0)
        if n >= cfg.min_iter and phi <= threshold:
            state.stopped = True
            state.stop_reason = StopReason.DISCREPANCY
            break
    state.U_hat = U_hat
    return state


def sweep_guessed_kernels(f, sigmas, cfg):
    """One non-blind run per guessed Gaussian variance, in input order.

    Returns a list of ``(sigma, MhdmState)``.
    """
    sigmas = list(sigmas)
    if not sigmas:
        raise ValueError("at least one kernel variance is required")
    m, n = np.shape(f)
    out = []
    for sigma in sigmas:
        run_cfg = replace(cfg, kernel=gaussian_kernel(m, n, sigma))
        out.append((sigma, run_nonblind(f, run_cfg)))
    return out
