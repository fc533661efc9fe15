import math

import numpy as np
import pytest

from mhdm.blind import (
    MhdmState,
    RunConfig,
    StopReason,
    reconstruct,
    residual_bound,
    run_blind,
    stopping_index,
)
from mhdm.degrade import degrade, gaussian_kernel
from mhdm.errors import ConfigError, IndexOutOfRange
from mhdm.metrics import psnr
from mhdm.spectral import forward_dft, residual_l2_sq

from conftest import blocks_image


@pytest.fixture(scope="module")
def clean_run():
    u = blocks_image(32)
    k = gaussian_kernel(32, 32, 2.0)
    f, _ = degrade(u, k, 0.0, 0)
    cfg = RunConfig(delta=0.0, max_iter=20)
    return u, k, f, cfg, run_blind(f, cfg)


@pytest.fixture(scope="module")
def noisy_run():
    u = blocks_image(32)
    k = gaussian_kernel(32, 32, 2.0)
    f, delta = degrade(u, k, 4e-4, 1)
    cfg = RunConfig(delta=delta)
    return u, k, f, cfg, run_blind(f, cfg)


def test_defaults():
    cfg = RunConfig()
    assert (cfg.r, cfg.s, cfg.lambda0, cfg.mu0, cfg.decay) == (1.0, 0.1, 1.4e-4, 6.3e5, 4.0)
    assert cfg.tau == math.sqrt(1.001)


@pytest.mark.parametrize(
    "kwargs",
    [dict(decay=1.0), dict(tau=1.0), dict(lambda0=0.0), dict(mu0=-1.0), dict(delta=-1.0),
     dict(max_iter=0), dict(r=-0.5), dict(min_iter=-1)],
)
def test_invalid_config(kwargs):
    with pytest.raises(ConfigError):
        RunConfig(**kwargs)


def test_schedule_and_grid_rescaling():
    cfg = RunConfig()
    assert cfg.schedule(2) == pytest.approx((1.4e-4 / 16, 6.3e5 / 16))
    assert cfg.effective_mu0((512, 512)) == 6.3e5
    assert cfg.effective_mu0((256, 256)) == pytest.approx(6.3e5 / 16)
    assert RunConfig(reference_size=0).effective_mu0((32, 32)) == 6.3e5


def test_stopping_index_example():
    assert stopping_index([10.0, 5.0, 0.5], 1.0) == 2
    assert stopping_index([10.0, 5.0], 1.0) is None
    assert stopping_index([0.5, 0.4, 0.3], 1.0, min_iter=2) == 2


def test_clean_run_residuals_decay_under_bound(clean_run):
    u, k, f, cfg, state = clean_run
    r = np.array(state.residuals)
    assert state.n == 20 and state.stop_reason == StopReason.MAX_ITER
    assert np.all(np.diff(r) <= 1e-12)
    for n, phi in enumerate(r):
        assert phi <= residual_bound(cfg, u, k, n)
        assert phi <= residual_bound(cfg, u, k, n, spatial_units=False)


def test_state_sums_match_scales(clean_run):
    *_, state = clean_run
    assert np.allclose(np.sum(state.scales_u, axis=0), state.U_hat, atol=1e-10)
    assert np.allclose(np.sum(state.scales_k, axis=0), state.K_hat, atol=1e-10)


def test_iterates_keep_constraints(clean_run):
    u, k, f, cfg, state = clean_run
    for n in range(state.n):
        U, K = reconstruct(state, n)
        assert K.sum() == pytest.approx(1.0, abs=1e-12)
        assert U.sum() == pytest.approx(f.sum(), rel=1e-12)
        assert forward_dft(K).real.min() >= -1e-9
        assert np.allclose(K, np.roll(np.flip(K, (0, 1)), (1, 1), (0, 1)), atol=1e-12)
        assert np.abs(K).max() <= K[0, 0] + 1e-9


def test_reconstruct_partial_sums(clean_run):
    u, k, f, cfg, state = clean_run
    U0, K0 = reconstruct(state, 0)
    assert np.allclose(U0, np.fft.ifft2(state.scales_u[0]).real, atol=1e-12)
    Un, Kn = reconstruct(state, state.n - 1)
    assert np.allclose(Un, state.image(), atol=1e-10)
    assert np.allclose(Kn, state.kernel(), atol=1e-10)
    f_hat = forward_dft(f)
    for n in range(state.n):
        U, K = reconstruct(state, n)
        phi = residual_l2_sq(f_hat, forward_dft(U), forward_dft(K))
        assert phi == pytest.approx(state.residuals[n], abs=1e-9)
    with pytest.raises(IndexOutOfRange):
        reconstruct(state, state.n)


def test_noisy_run_stops_by_discrepancy_and_improves(noisy_run):
    u, k, f, cfg, state = noisy_run
    assert state.stopped and state.stop_reason == StopReason.DISCREPANCY
    assert state.residuals[-1] <= cfg.tau * cfg.delta**2
    assert all(phi > cfg.tau * cfg.delta**2 for phi in state.residuals[:-1])
    assert psnr(state.image(), u) > psnr(f, u)
    for n, phi in enumerate(state.residuals):
        assert phi <= residual_bound(cfg, u, k, n) + cfg.delta**2


def test_min_iter_delays_stop(noisy_run):
    u, k, f, cfg, state = noisy_run
    later = run_blind(f, RunConfig(delta=cfg.delta, min_iter=state.n + 2))
    assert later.stop_index == state.n + 2


def test_zero_observation_stays_zero():
    state = run_blind(np.zeros((8, 8)), RunConfig(max_iter=3))
    assert np.abs(state.image()).max() == 0
    assert state.kernel().sum() == pytest.approx(1.0)


def test_huge_delta_stops_immediately():
    f = blocks_image(16)
    state = run_blind(f, RunConfig(delta=1e3))
    assert state.stop_index == 0


def test_without_pinning_runs(noisy_run):
    u, k, f, cfg, _ = noisy_run
    state = run_blind(f, RunConfig(delta=cfg.delta, pin_means=False))
    assert np.all(np.diff(state.residuals) <= 1e-12)


def test_state_is_dataclass():
    assert "residuals" in MhdmState.__dataclass_fields__


def test_stopped_residual_vanishes_as_noise_shrinks():
    u = blocks_image(32)
    k = gaussian_kernel(32, 32, 2.0)
    finals = []
    for var in (1e-3, 1e-4, 1e-5, 1e-6, 1e-7):
        f, delta = degrade(u, k, var, 0)
        state = run_blind(f, RunConfig(delta=delta))
        assert state.stop_reason == StopReason.DISCREPANCY
        finals.append(state.residuals[-1])
    assert all(b < a for a, b in zip(finals, finals[1:]))
    assert finals[-1] < 1e-3 * finals[0]
