import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spglab.smoothing import (
    both_axes_smooth,
    moving_average_kernel,
    spatial_smooth,
    temporal_smooth,
)


def brute_force_rows(x, k):
    """Direct O(N k) replicate-padded moving average of each row."""
    J, N = x.shape
    half = k // 2
    out = np.empty_like(x)
    for j in range(J):
        for i in range(N):
            total = 0.0
            for m in range(i - half, i + half + 1):
                total += x[j, min(max(m, 0), N - 1)]
            out[j, i] = total / k
    return out


def test_kernel_weights():
    for k in (1, 3, 5, 11):
        w = moving_average_kernel(k)
        assert len(w) == k
        assert abs(w.sum() - 1.0) <= 1e-15
        assert np.all(w == w[0])


@pytest.mark.parametrize("k", [0, 2, 4, -3, 2.5])
def test_bad_window_rejected(k):
    with pytest.raises(ValueError):
        temporal_smooth(np.zeros((2, 8)), k)


def test_window_longer_than_axis_rejected():
    with pytest.raises(ValueError):
        temporal_smooth(np.zeros((2, 4)), 5)
    with pytest.raises(ValueError):
        spatial_smooth(np.zeros((2, 8)), 3)


def test_brute_force_3x16(rng):
    x = rng.normal(size=(3, 16))
    assert np.max(np.abs(temporal_smooth(x, 5) - brute_force_rows(x, 5))) <= 1e-12


def test_brute_force_1000_trajectories(rng):
    worst = 0.0
    for _ in range(1000):
        J, N = rng.integers(1, 5), rng.integers(11, 40)
        k = int(rng.choice([1, 3, 5, 7, 9, 11]))
        x = rng.normal(size=(J, N)) * rng.uniform(0.1, 10)
        worst = max(worst, np.max(np.abs(temporal_smooth(x, k) - brute_force_rows(x, k))))
    assert worst <= 1e-12


def test_spatial_brute_force(rng):
    x = rng.normal(size=(7, 9))
    assert np.max(np.abs(spatial_smooth(x, 3) - brute_force_rows(x.T, 3).T)) <= 1e-12


def test_batched_matches_loop(rng):
    x = rng.normal(size=(4, 3, 20))
    np.testing.assert_array_equal(temporal_smooth(x, 7), np.stack([temporal_smooth(xi, 7) for xi in x]))


def test_constant_unchanged(rng):
    x = np.full((3, 12), 2.5)
    for k in (1, 3, 5, 11):
        np.testing.assert_allclose(temporal_smooth(x, k), x, rtol=0, atol=1e-15)
    cols = np.tile(rng.normal(size=12), (5, 1))
    np.testing.assert_allclose(spatial_smooth(cols, 3), cols, atol=1e-15)


def test_k1_identity(rng):
    x = rng.normal(size=(1, 9))
    np.testing.assert_array_equal(temporal_smooth(x, 1), x)
    np.testing.assert_array_equal(spatial_smooth(x, 1), x)


@pytest.mark.parametrize("k", [3, 5, 9])
def test_ramp_interior_unchanged(k):
    n = np.arange(24, dtype=float)
    x = np.stack([0.5 * n - 1, -2.0 * n + 3])
    h = k // 2
    np.testing.assert_allclose(temporal_smooth(x, k)[:, h:-h], x[:, h:-h], atol=1e-12)


def test_mean_preserved_when_flat_near_boundaries(rng):
    x = np.zeros((2, 30))
    x[:, 8:22] = rng.normal(size=(2, 14))
    np.testing.assert_allclose(temporal_smooth(x, 5).mean(-1), x.mean(-1), atol=1e-14)


def test_global_mean_change_bounded_by_boundary_deviation(rng):
    for _ in range(200):
        x = rng.normal(size=(3, 25))
        k = 7
        dev = max(np.abs(x[:, :k] - x[:, :1]).max(), np.abs(x[:, -k:] - x[:, -1:]).max())
        assert np.all(np.abs(temporal_smooth(x, k).mean(-1) - x.mean(-1)) <= dev + 1e-12)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-5, 5), b=st.floats(-5, 5), k=st.sampled_from([1, 3, 5, 7]), seed=st.integers(0, 2**32 - 1))
def test_linearity(a, b, k, seed):
    r = np.random.default_rng(seed)
    x, y = r.normal(size=(2, 7, 15))
    for f in (temporal_smooth, spatial_smooth):
        np.testing.assert_allclose(f(a * x + b * y, k), a * f(x, k) + b * f(y, k), atol=1e-12)


def test_contraction_1000_trials(rng):
    for _ in range(1000):
        x = rng.normal(size=(rng.integers(1, 4), rng.integers(12, 40)))
        k = int(rng.choice([3, 5, 7, 9, 11]))
        once = temporal_smooth(x, k)
        twice = temporal_smooth(once, k)
        assert np.linalg.norm(twice - once) <= np.linalg.norm(once - x) + 1e-12


@pytest.mark.parametrize("k,f", [(3, 0.4), (5, 0.375), (7, 0.3), (9, 0.45), (11, 0.35)])
def test_dirichlet_attenuation(k, f):
    N = 240
    n = np.arange(N)
    low = np.cos(2 * np.pi * 2 / N * n)
    high = 0.5 * np.cos(2 * np.pi * f * n + 0.3)
    y = temporal_smooth((low + high)[None], k)[0] - temporal_smooth(low[None], k)[0]
    h = k // 2
    inner = slice(h, N - h)
    # least-squares amplitude of the smoothed high component on interior frames
    basis = np.stack([np.cos(2 * np.pi * f * n + 0.3), np.sin(2 * np.pi * f * n + 0.3)], 1)[inner]
    coef, *_ = np.linalg.lstsq(basis, y[inner], rcond=None)
    gain = coef[0] / 0.5
    expected = np.sin(np.pi * f * k) / (k * np.sin(np.pi * f))
    assert gain == pytest.approx(expected, rel=0.1, abs=1e-9)
    assert abs(coef[1]) < 1e-9


def test_both_axes_caps_channel_window(rng):
    x = rng.normal(size=(4, 20))
    np.testing.assert_allclose(both_axes_smooth(x, 7), spatial_smooth(temporal_smooth(x, 7), 3), atol=0)
    x = rng.normal(size=(9, 20))
    np.testing.assert_allclose(both_axes_smooth(x, 5), spatial_smooth(temporal_smooth(x, 5), 5), atol=0)


def test_shape_preserved(rng):
    x = rng.normal(size=(2, 3, 13))
    for f in (temporal_smooth, spatial_smooth, both_axes_smooth):
        assert f(x, 3).shape == x.shape
