import numpy as np
import pytest

from mhdm.degrade import degrade, gaussian_kernel
from mhdm.errors import ConfigError
from mhdm.metrics import psnr
from mhdm.nonblind import NonBlindConfig, nonblind_increment, run_nonblind, sweep_guessed_kernels
from mhdm.spectral import forward_dft, sobolev_weights

from conftest import blocks_image


def test_identity_blur_recovers_observation(rng):
    f = rng.random((16, 16))
    impulse = np.zeros((16, 16))
    impulse[0, 0] = 1
    state = run_nonblind(f, NonBlindConfig(lambda0=10.0, kernel=impulse, max_iter=30))
    assert np.allclose(state.image(), f, atol=1e-8)
    assert state.residuals[-1] < 1e-16
    assert np.all(np.diff(state.residuals) <= 1e-12)


def test_zero_kernel_bin_gets_zero_increment(rng):
    f_hat = forward_dft(rng.random((4, 4)))
    k_hat = np.ones((4, 4), dtype=complex)
    k_hat[1, 2] = k_hat[3, 2] = 0
    du = nonblind_increment(f_hat, np.zeros_like(f_hat), k_hat, np.ones((4, 4)))
    assert du[1, 2] == 0 and du[3, 2] == 0


def test_single_step_matches_completed_square(rng):
    # minimize |k (u + U) - f|^2 + w |u|^2 per bin: expand in u and complete the square
    f_hat = forward_dft(rng.random((8, 8)))
    U_hat = forward_dft(rng.random((8, 8)))
    k_hat = forward_dft(gaussian_kernel(8, 8, 1.5))
    w = 0.3 * sobolev_weights(8, 8, 1.0)
    du = nonblind_increment(f_hat, U_hat, k_hat, w)
    for i in range(8):
        for j in range(8):
            k, r, wt = k_hat[i, j], f_hat[i, j] - k_hat[i, j] * U_hat[i, j], w[i, j]
            # (|k|^2 + w)|u|^2 - 2 Re(u conj(k) conj(r)) + |r|^2, minimized at conj(k) r / (|k|^2 + w)
            A = abs(k) ** 2 + wt
            u_star = np.conj(k) * r / A
            assert du[i, j] == pytest.approx(u_star, abs=1e-10)
            # perturbing in any direction does not lower the objective
            obj = lambda u: abs(k * u - r) ** 2 + wt * abs(u) ** 2
            for eps in (1e-4, 1e-4j, -1e-4, -1e-4j):
                assert obj(u_star + eps) >= obj(u_star) - 1e-12


def test_pinned_mean_and_fixed_kernel():
    u = blocks_image(32)
    k = gaussian_kernel(32, 32, 2.0)
    f, delta = degrade(u, k, 4e-4, 0)
    state = run_nonblind(f, NonBlindConfig(delta=delta, kernel=k))
    assert state.image().sum() == pytest.approx(f.sum(), rel=1e-12)
    assert np.allclose(state.kernel(), k, atol=1e-14)
    assert state.residuals[-1] <= state.threshold


def test_sweep_prefers_true_variance():
    u = blocks_image(32)
    sigma = 2.0
    k = gaussian_kernel(32, 32, sigma)
    f, delta = degrade(u, k, 4e-4, 0)
    out = sweep_guessed_kernels(f, [sigma / 4, sigma, 4 * sigma], NonBlindConfig(delta=delta))
    scores = [psnr(state.image(), u) for _, state in out]
    assert [s for s, _ in out] == [sigma / 4, sigma, 4 * sigma]
    assert scores[1] == max(scores)


def test_sweep_repeats_are_identical():
    f = blocks_image(16)
    out = sweep_guessed_kernels(f, [2.0, 2.0], NonBlindConfig(delta=0.01))
    assert np.array_equal(out[0][1].image(), out[1][1].image())


def test_sweep_needs_sigmas():
    with pytest.raises(ValueError):
        sweep_guessed_kernels(np.zeros((4, 4)), [], NonBlindConfig())


def test_missing_kernel_raises():
    with pytest.raises(ConfigError):
        run_nonblind(np.zeros((4, 4)), NonBlindConfig())
