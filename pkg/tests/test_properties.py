import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mhdm.metrics import psnr, ssim
from mhdm.pointwise import objective, solve_initial, solve_step
from mhdm.quintic import polyval, real_roots
from mhdm.spectral import circular_convolve, forward_dft, inverse_dft, mirror, sobolev_weights

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
positive = st.floats(1e-3, 1e3, allow_nan=False)
shapes = st.tuples(st.integers(1, 9), st.integers(1, 9))


@settings(max_examples=60, deadline=None)
@given(shapes.flatmap(lambda s: st.tuples(arrays(float, s, elements=finite), arrays(float, s, elements=finite))))
def test_convolution_theorem_holds(pair):
    u, k = pair
    lhs = forward_dft(circular_convolve(u, k))
    rhs = forward_dft(u) * forward_dft(k)
    assert np.abs(lhs - rhs).max() <= 1e-9 * (1 + np.abs(rhs).max())


@settings(max_examples=60, deadline=None)
@given(shapes.flatmap(lambda s: arrays(float, s, elements=finite)))
def test_round_trip(img):
    assert np.allclose(inverse_dft(forward_dft(img)), img, atol=1e-10 * (1 + np.abs(img).max()))


@given(st.integers(1, 12), st.integers(1, 12), st.floats(0, 3))
def test_weights_symmetric(m, n, e):
    w = sobolev_weights(m, n, e)
    assert np.array_equal(w, mirror(w)) and w[0, 0] == 1 and w.min() >= 1


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=6, max_size=6).filter(lambda c: any(abs(x) > 1e-3 for x in c)))
def test_returned_roots_satisfy_residual_bound(c):
    c = np.array(c)
    roots = real_roots(c)
    for r in roots:
        assert abs(polyval(c, r)) <= 1e-8 * (1 + np.abs(c).max()) * (1 + abs(r)) ** 5
    assert roots == sorted(roots)
    if abs(c[5]) > 1e-3 * np.abs(c).max():
        assert roots  # odd degree


@settings(max_examples=200, deadline=None)
@given(positive, positive, st.floats(0, 5), st.floats(0, 5), st.floats(0, 10), st.floats(-np.pi, np.pi))
def test_step_never_worse_than_standing_still(a, b, pmag, q_n, zmag, phase):
    z = zmag * np.exp(1j * phase)
    p_n = pmag * np.exp(1j * phase)
    sol = solve_step(a, b, p_n, q_n, z)
    assert q_n + float(sol.q_star) >= 0
    assert float(sol.objective) <= float(objective(a, b, p_n, q_n, z, 0, 0)) + 1e-12


@given(positive, positive, st.floats(0, 10), st.floats(-np.pi, np.pi))
def test_initial_solution_is_stationary_or_zero(a, b, zmag, phase):
    z = zmag * np.exp(1j * phase)
    sol = solve_initial(a, b, z)
    p, q = complex(sol.p_star), float(sol.q_star)
    if q > 0:
        # derivative in q and in conj(p) vanish
        gq = 2 * ((p * q - z) * np.conj(p)).real + 2 * b * q
        gp = (p * q - z) * q + a * p
        scale = 1 + abs(z) ** 2 + a + b
        assert abs(gq) <= 1e-8 * scale and abs(gp) <= 1e-8 * scale


@settings(max_examples=30, deadline=None)
@given(arrays(float, (12, 12), elements=st.floats(0, 1)), arrays(float, (12, 12), elements=st.floats(0, 1)))
def test_metric_symmetry(x, y):
    assert psnr(x, y) == psnr(y, x)
    assert abs(ssim(x, y) - ssim(y, x)) <= 1e-12
    assert -1 - 1e-12 <= ssim(x, y) <= 1 + 1e-12
