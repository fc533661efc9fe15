"""Single-step variational blind deconvolution with a parameter grid search.

Each grid point solves the one-shot problem

    min_{u, k} ||k * u - f||^2 + lambda ||u||_{H^r}^2 + mu ||k||_{H^s}^2

in closed form (same per-frequency formula as the first MHDM step, same mean
pinning), at ``(lambda_n, mu_n) = lambda_init * growth**n * (1, ratio)``.

With ``growth < 1`` (the default, ``1 / cfg.decay``) the grid walks through
the same parameters as the MHDM schedule and the first point whose residual
is at most ``tau delta^2`` is accepted. With ``growth > 1`` the residual grows
along the grid and the last point still below the threshold is accepted.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .blind import run_blind
from .metrics import psnr
from .pointwise import solve_plane
from .spectral import forward_dft, inverse_dft, residual_l2_sq, sobolev_weights

__all__ = ["GridPoint", "GridSearch", "solve_single_step", "run_grid_search", "optimize_ratio"]

log = logging.getLogger(__name__)


class GridPoint(NamedTuple):
    lam: float
    mu: float
    image: np.ndarray
    kernel: np.ndarray
    residual: float


@dataclass
class GridSearch:
    """Result of :func:`run_grid_search`.

    ``terminated`` is False when ``max_iter`` points were evaluated without
    meeting the acceptance rule; ``accepted_index`` then points at the last
    point so a reconstruction is still available.
    """

    points: list = field(default_factory=list)
    accepted_index: int = -1
    threshold: float = 0.0
    terminated: bool = False

    @property
    def accepted(self):
        return self.points[self.accepted_index]

    @property
    def residuals(self):
        return [p.residual for p in self.points]


def solve_single_step(f_hat, wr, ws, lam, mu, pin_means=True):
    """Spectra ``(U^, K^)`` of the single-step minimizer at ``(lam, mu)``."""
    return solve_plane(f_hat, None, None, wr, ws, lam, mu, pin_means=pin_means)


def run_grid_search(f, ratio, lambda_init, cfg, growth=None):
    """Grid search over ``(lambda, ratio * lambda)`` stopped by the discrepancy rule.

    ``ratio`` is ``mu / lambda`` before the grid-size rescaling of ``mu``
    described on :class:`~mhdm.blind.RunConfig`. ``cfg.min_iter`` is honoured:
    no point below that index is accepted.
    """
    if not ratio > 0 or not lambda_init > 0:
        raise ValueError("ratio and lambda_init must be positive")
    growth = 1.0 / cfg.decay if growth is None else float(growth)
    if growth <= 0 or growth == 1:
        raise ValueError("growth must be positive and different from 1")
    f_hat = forward_dft(f)
    shape = f_hat.shape
    wr = sobolev_weights(*shape, cfg.r)
    ws = sobolev_weights(*shape, cfg.s)
    grid_cfg = replace(cfg, lambda0=lambda_init, mu0=ratio * lambda_init)
    threshold = cfg.tau * cfg.delta**2
    out = GridSearch(threshold=threshold)

    for n in range(cfg.max_iter):
        lam0, mu0 = grid_cfg.schedule(0, shape)
        lam, mu = lam0 * growth**n, mu0 * growth**n
        U_hat, K_hat = solve_single_step(f_hat, wr, ws, lam, mu, cfg.pin_means)
        phi = residual_l2_sq(f_hat, U_hat, K_hat)
        out.points.append(GridPoint(lam, mu, inverse_dft(U_hat), inverse_dft(K_hat), phi))
        ok = phi <= threshold
        if growth < 1:
            if ok and n >= cfg.min_iter:
                out.accepted_index, out.terminated = n, True
                break
        else:
            if not ok:
                if n - 1 >= cfg.min_iter:
                    out.accepted_index, out.terminated = n - 1, True
                break
            if n >= cfg.min_iter:
                out.accepted_index = n

    if not out.terminated:
        log.warning("grid search did not meet the discrepancy rule in %d points", len(out.points))
        if out.accepted_index < 0:
            out.accepted_index = len(out.points) - 1
    return out


def optimize_ratio(f, truth, ratios, cfg, method="variational"):
    """Pick the parameter ratio whose accepted reconstruction has the best PSNR.

    ``method`` is ``"variational"`` (grid search from ``cfg.lambda0``) or
    ``"mhdm"`` (blind MHDM). Ties go to the smaller ratio.

    Returns
    -------
    (ratio, image, kernel)
    """
    ratios = [float(r) for r in ratios]
    if not ratios:
        raise ValueError("at least one ratio is required")
    best = None
    for ratio in sorted(set(ratios)):
        if method == "variational":
            point = run_grid_search(f, ratio, cfg.lambda0, cfg).accepted
            image, kernel = point.image, point.kernel
        elif method == "mhdm":
            state = run_blind(f, replace(cfg, mu0=ratio * cfg.lambda0))
            image, kernel = state.image(), state.kernel()
        else:
            raise ValueError(f"unknown method {method!r}")
        score = psnr(image, truth)
        if best is None or score > best[0]:
            best = (score, ratio, image, kernel)
    return best[1], best[2], best[3]
