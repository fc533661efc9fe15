import time

import numpy as np
import pytest

from mhdm.errors import ZeroPolynomial
from mhdm.quintic import cauchy_bound, polyval, real_roots, real_roots_batch


def bisection_roots(coeffs, samples=200_001):
    """Sign-change sweep over [-R, R] followed by bisection to 1e-12.

    Samples are spaced evenly in asinh(x) so the resolution scales with
    ``1 + |x|`` across the whole Cauchy interval.
    """
    c = np.asarray(coeffs, dtype=float)
    R = cauchy_bound(c)
    t = np.linspace(-np.arcsinh(R), np.arcsinh(R), samples)
    x = np.sinh(t)
    v = np.polynomial.polynomial.polyval(x, c)
    roots = list(x[v == 0])
    idx = np.flatnonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)
    lo, hi = x[idx], x[idx + 1]
    vlo = v[idx]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        vm = np.polynomial.polynomial.polyval(mid, c)
        left = np.sign(vm) == np.sign(vlo)
        lo = np.where(left, mid, lo)
        vlo = np.where(left, vm, vlo)
        hi = np.where(left, hi, mid)
        if np.all(hi - lo <= 1e-12 * (1 + np.abs(lo))):
            break
    roots.extend(0.5 * (lo + hi))
    return np.sort(roots)


def residual_ok(coeffs, root):
    c = np.asarray(coeffs, dtype=float)
    bound = 1e-8 * (1 + np.abs(c).max()) * (1 + abs(root)) ** 5
    return abs(polyval(c, root)) <= bound


def test_pure_power_has_single_zero_root():
    assert real_roots([0, 0, 0, 0, 0, 1]) == [0.0]


def test_complex_factors_are_excluded():
    # (x - 1)(x^2 + 1)(x^2 + 4)
    roots = real_roots([-4, 4, -5, 5, -1, 1])
    assert roots == pytest.approx([1.0], abs=1e-12)


def test_zero_polynomial_raises():
    with pytest.raises(ZeroPolynomial):
        real_roots([0, 0, 0, 0, 0, 0])


def test_leading_zeros_reduce_degree():
    # 2x - 4 padded to six coefficients
    assert real_roots([-4, 2, 0, 0, 0, 0]) == pytest.approx([2.0])
    # x^2 - 1 with a negligible quintic term
    assert real_roots([-1, 0, 1, 0, 0, 1e-20]) == pytest.approx([-1.0, 1.0])


def test_constant_polynomial_has_no_roots():
    assert real_roots([3.0]) == []


def test_random_quintics_match_bisection_sweep():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    found = []
    for _ in range(100):
        c = rng.uniform(-10, 10, 6)
        found.append((c, real_roots(c)))
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    for c, roots in found:
        oracle = bisection_roots(c)
        assert len(roots) == len(oracle), (c, roots, oracle)
        assert np.allclose(roots, oracle, rtol=0, atol=1e-8 * (1 + np.abs(oracle).max()))
        assert all(residual_ok(c, r) for r in roots)
        assert roots == sorted(roots)
        assert len(roots) >= 1  # odd degree


@pytest.mark.parametrize("seed", range(5))
def test_known_real_roots_are_recovered(seed):
    rng = np.random.default_rng(seed)
    while True:
        r = np.sort(rng.uniform(-3, 3, 5))
        if np.min(np.diff(r)) >= 1e-3:
            break
    c = np.polynomial.polynomial.polyfromroots(r)
    assert real_roots(c) == pytest.approx(list(r), abs=1e-8)


def test_scaling_coefficients_leaves_roots_unchanged():
    rng = np.random.default_rng(7)
    for _ in range(20):
        c = rng.uniform(-10, 10, 6)
        base = real_roots(c)
        for s in (1e-6, 3.0, 1e8):
            assert real_roots(s * c) == pytest.approx(base, abs=1e-8)


def test_batch_agrees_with_scalar_path():
    rng = np.random.default_rng(11)
    c = rng.uniform(-10, 10, (50, 6))
    c[3, -1] = 0.0  # exercises the reduced-degree fallback
    batch = real_roots_batch(c)
    for row, coeffs in zip(batch, c):
        got = np.unique(np.round(np.sort(row[~np.isnan(row)]), 9))
        want = np.unique(np.round(real_roots(coeffs), 9))
        assert np.allclose(got, want, atol=1e-8)
