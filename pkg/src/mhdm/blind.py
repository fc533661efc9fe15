"""Blind multiscale hierarchical decomposition driver.

Starting from the single-step solution at ``(lambda0, mu0)``, every further
step solves for increments ``(u_n, k_n)`` of image and kernel at parameters
``(lambda0, mu0) / decay**n`` and adds them to the running sums ``U_n``,
``K_n``. Iteration stops at the first ``n`` whose residual
``||K_n * U_n - f||^2`` drops to ``tau * delta**2`` or below.
"""

import logging
import math
from dataclasses import dataclass, field, fields
from enum import Enum

import numpy as np

from .errors import ConfigError, IndexOutOfRange, NoRealRoot
from .pointwise import solve_plane
from .spectral import forward_dft, inverse_dft, residual_l2_sq, sobolev_weights

__all__ = [
    "StopReason",
    "RunConfig",
    "MhdmState",
    "stopping_index",
    "residual_bound",
    "run_blind",
    "reconstruct",
]

log = logging.getLogger(__name__)

# parameters this far down the geometric schedule are numerically exhausted
SCHEDULE_FLOOR = 1e-18


class StopReason(str, Enum):
    DISCREPANCY = "Discrepancy"
    MAX_ITER = "MaxIter"


@dataclass
class RunConfig:
    """Parameters of a blind MHDM run.

    ``delta`` is the bound on the L2 norm of the noise image, ``decay`` the
    per-step divisor of both penalty weights. ``min_iter`` makes the
    discrepancy check ignore steps below that index. ``seed`` is only used by
    the synthetic-data helpers but is recorded with every run.

    ``mu0`` is quoted for a ``reference_size`` x ``reference_size`` grid.
    Under the unnormalized DFT the data spectrum grows with the pixel count
    while the kernel spectrum does not, so keeping the image/kernel balance
    requires ``mu ~ (m n)^2``; :meth:`effective_mu0` applies that rescaling.
    ``reference_size = 0`` uses ``mu0`` verbatim.
    """

    r: float = 1.0
    s: float = 0.1
    lambda0: float = 1.4e-4
    mu0: float = 6.3e5
    decay: float = 4.0
    tau: float = math.sqrt(1.001)
    delta: float = 0.0
    max_iter: int = 30
    min_iter: int = 0
    pin_means: bool = True
    reference_size: int = 512
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.r < 0 or self.s < 0:
            raise ConfigError("Sobolev exponents must be non-negative")
        if not (self.lambda0 > 0 and self.mu0 > 0):
            raise ConfigError("lambda0 and mu0 must be positive")
        if not self.decay > 1:
            raise ConfigError("decay must exceed 1")
        if not self.tau > 1:
            raise ConfigError("tau must exceed 1")
        if self.delta < 0:
            raise ConfigError("delta must be non-negative")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigError("max_iter must be a positive integer")
        if self.min_iter < 0:
            raise ConfigError("min_iter must be non-negative")
        if self.reference_size < 0:
            raise ConfigError("reference_size must be non-negative")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    @property
    def ratio(self):
        return self.mu0 / self.lambda0

    def effective_mu0(self, shape):
        if not self.reference_size:
            return self.mu0
        m, n = shape
        return self.mu0 * (m * n / float(self.reference_size) ** 2) ** 2

    def schedule(self, n, shape=None):
        """``(lambda_n, mu_n)``; ``mu`` is grid-rescaled when ``shape`` is given."""
        scale = self.decay ** (-n)
        mu0 = self.mu0 if shape is None else self.effective_mu0(shape)
        return self.lambda0 * scale, mu0 * scale

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class MhdmState:
    """Everything a run produced.

    ``scales_u[i]``/``scales_k[i]`` are the increment spectra of step ``i`` and
    ``residuals[i]`` the spatial squared residual of ``(U_i, K_i)``. ``n`` is
    the number of computed steps, so the final iterate is ``U_{n-1}``.
    """

    shape: tuple
    f_hat: np.ndarray
    U_hat: np.ndarray
    K_hat: np.ndarray
    scales_u: list = field(default_factory=list)
    scales_k: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    lambdas: list = field(default_factory=list)
    mus: list = field(default_factory=list)
    threshold: float = 0.0
    stopped: bool = False
    stop_reason: StopReason = StopReason.MAX_ITER

    @property
    def n(self):
        return len(self.scales_u)

    @property
    def stop_index(self):
        """Index of the returned iterate."""
        return self.n - 1

    def image(self):
        return inverse_dft(self.U_hat)

    def kernel(self):
        return inverse_dft(self.K_hat)


def stopping_index(residuals, threshold, min_iter=0):
    """First index ``n >= min_iter`` with ``residuals[n] <= threshold``, else None.

    For a non-increasing sequence this is ``max{n : Phi_n > threshold} + 1``.
    """
    for n, phi in enumerate(residuals):
        if n >= min_iter and phi <= threshold:
            return n
    return None


def residual_bound(cfg, u_true, k_true, n, constant=2.0, spatial_units=True):
    """Residual decay bound ``2C (lambda0 J1(U) + mu0 J2(K)) / (n + 1)``.

    ``J1``, ``J2`` are the discrete squared Sobolev norms of the true image and
    kernel. The solver minimizes the Fourier-domain misfit, which is
    ``m n`` times the spatial one, so with ``spatial_units`` the bound is
    divided by ``m n`` to compare against spatial residuals. Without it the
    raw expression is returned, which is looser by that factor.
    """
    m, nn = np.shape(u_true)
    j1 = _sobolev(u_true, cfg.r)
    j2 = _sobolev(k_true, cfg.s)
    lam0, mu0 = cfg.schedule(0, (m, nn))
    bound = 2.0 * constant * (lam0 * j1 + mu0 * j2) / (n + 1)
    return bound / (m * nn) if spatial_units else bound


def _sobolev(img, exponent):
    spec = forward_dft(img)
    w = sobolev_weights(*spec.shape, exponent)
    return float(np.sum(w * np.abs(spec) ** 2))


def run_blind(f, cfg=None):
    """Run the blind MHDM on the observation ``f``.

    Raises
    ------
    NoRealRoot
        Annotated with the iteration at which a per-frequency solve failed.
    """
    cfg = cfg or RunConfig()
    cfg.validate()
    f_hat = forward_dft(f)
    shape = f_hat.shape
    wr = sobolev_weights(*shape, cfg.r)
    ws = sobolev_weights(*shape, cfg.s)
    threshold = cfg.tau * cfg.delta**2

    state = MhdmState(
        shape=shape,
        f_hat=f_hat,
        U_hat=np.zeros(shape, dtype=np.complex128),
        K_hat=np.zeros(shape, dtype=np.complex128),
        threshold=threshold,
    )
    U_hat = K_hat = None
    for n in range(cfg.max_iter):
        lam, mu = cfg.schedule(n, shape)
        if cfg.decay ** (-n) < SCHEDULE_FLOOR:
            log.warning("parameter schedule exhausted at n=%d", n)
            break
        try:
            du, dk = solve_plane(f_hat, U_hat, K_hat, wr, ws, lam, mu, pin_means=cfg.pin_means)
        except NoRealRoot as exc:
            exc.iteration = n
            raise
        U_hat = du if U_hat is None else U_hat + du
        K_hat = dk if K_hat is None else K_hat + dk
        phi = residual_l2_sq(f_hat, U_hat, K_hat)
        state.scales_u.append(du)
        state.scales_k.append(dk.astype(np.complex128))
        state.residuals.append(phi)
        state.lambdas.append(lam)
        state.mus.append(mu)
        log.debug("n=%d lambda=%.3e mu=%.3e residual=%.6e", n, lam, mu, phi)
        if n >= cfg.min_iter and phi <= threshold:
            state.stopped = True
            state.stop_reason = StopReason.DISCREPANCY
            break

    state.U_hat = U_hat.astype(np.complex128)
    state.K_hat = K_hat.astype(np.complex128)
    return state


def reconstruct(state, upto):
    """Spatial partial sums ``(sum_{i<=upto} u_i, sum_{i<=upto} k_i)``."""
    if not 0 <= upto < state.n:
        raise IndexOutOfRange(f"upto={upto} outside [0, {state.n})")
    U = np.sum(state.scales_u[: upto + 1], axis=0)
    K = np.sum(state.scales_k[: upto + 1], axis=0)
    return inverse_dft(U), inverse_dft(K)
