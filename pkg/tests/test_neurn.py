import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neurnkit.neurn import NeurnConfig, patch_stats, transform, transform_batch
from oracles import window_stats_naive


@st.composite
def images(draw, max_side=16):
    h = draw(st.integers(3, max_side))
    w = draw(st.integers(3, max_side))
    c = draw(st.integers(1, 3))
    seed = draw(st.integers(0, 2**32 - 1))
    return np.random.default_rng(seed).random((h, w, c))


def test_constant_image():
    img = np.full((6, 5), 0.5)
    for k in (3, 5, 7):
        st_ = patch_stats(img, NeurnConfig(k=k))
        assert np.all(st_.mean == 0.5)
        assert np.all(st_.std == 0.0)
        assert np.all(transform(img, NeurnConfig(k=k)) == 0.0)


def test_center_spike():
    img = np.zeros((3, 3))
    img[1, 1] = 1.0
    s = patch_stats(img).std[..., 0]
    np.testing.assert_allclose(s, 2 * math.sqrt(2) / 9, rtol=0, atol=1e-15)
    np.testing.assert_allclose(transform(img), np.ones((3, 3)), rtol=0, atol=1e-12)


@pytest.mark.parametrize("padding", ["replicate", "reflect"])
@pytest.mark.parametrize("k", [3, 5])
def test_matches_naive(padding, k):
    rng = np.random.default_rng(k)
    img = rng.random((9, 11))
    cfg = NeurnConfig(k=k, padding=padding)
    got = patch_stats(img, cfg)
    mean, std = window_stats_naive(img.tolist(), k, padding)
    assert np.max(np.abs(got.mean[..., 0] - np.array(mean))) <= 1e-10
    assert np.max(np.abs(got.std[..., 0] - np.array(std))) <= 1e-10


def test_reflect_differs_from_replicate():
    img = np.arange(25, dtype=float).reshape(5, 5) ** 2
    a = patch_stats(img, NeurnConfig(padding="replicate")).std
    b = patch_stats(img, NeurnConfig(padding="reflect")).std
    assert not np.allclose(a[0], b[0])
    np.testing.assert_allclose(a[1:-1, 1:-1], b[1:-1, 1:-1], rtol=0, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(images(), st.floats(0.1, 10, exclude_min=True), st.floats(-5, 5))
def test_affine_invariance(img, a, b):
    assert np.max(np.abs(transform(a * img + b) - transform(img))) < 1e-9


@settings(max_examples=100, deadline=None)
@given(images())
def test_range_and_exact_one(img):
    out = transform(img)
    assert out.shape == img.shape
    assert out.min() >= 0.0 and out.max() <= 1.0
    for ch in range(img.shape[2]):
        assert out[..., ch].max() == 1.0


def test_constant_channel_is_zero_per_channel():
    img = np.random.default_rng(0).random((5, 5, 2))
    img[..., 1] = 0.3
    out = transform(img)
    assert out[..., 0].max() == 1.0
    assert np.all(out[..., 1] == 0.0)


def test_global_scope():
    img = np.random.default_rng(1).random((6, 6, 2))
    img[..., 1] *= 0.1
    out = transform(img, NeurnConfig(scope="global"))
    assert out.max() == 1.0
    assert out[..., 1].max() < 0.5


def test_shape_preserved_2d():
    assert transform(np.random.default_rng(2).random((4, 7))).shape == (4, 7)


def test_interior_translation_equivariance():
    rng = np.random.default_rng(5)
    big = rng.random((12, 13))
    a, b = big[:, :-1], big[:, 1:]
    sa = patch_stats(a).std[..., 0]
    sb = patch_stats(b).std[..., 0]
    # a[:, j+1] == b[:, j]; compare away from the padded border
    np.testing.assert_allclose(sa[1:-1, 2:-1], sb[1:-1, 1:-2], rtol=0, atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 4, 0, -3, 3.0, True])
def test_invalid_k(k):
    with pytest.raises(ValueError):
        NeurnConfig(k=k)


def test_k_too_large_for_image():
    with pytest.raises(ValueError, match="too large"):
        transform(np.zeros((2, 8)), NeurnConfig(k=5))
    transform(np.zeros((3, 8)), NeurnConfig(k=5))


def test_non_finite_rejected():
    img = np.zeros((4, 4))
    img[1, 2] = np.nan
    with pytest.raises(ValueError):
        transform(img)


def test_batch_equivalence():
    rng = np.random.default_rng(7)
    batch = rng.random((5, 8, 8, 2))
    out = transform_batch(batch)
    for i in range(5):
        np.testing.assert_array_equal(out[i], transform(batch[i]))
    np.testing.assert_array_equal(transform_batch(batch[:1])[0], transform(batch[0]))
    chunks = np.concatenate([transform_batch(batch[i:i + 1]) for i in range(5)])
    np.testing.assert_array_equal(chunks, out)
    np.testing.assert_array_equal(transform_batch(batch, chunk=2), out)


def test_batch_of_mixed_sizes_and_errors():
    rng = np.random.default_rng(8)
    imgs = [rng.random((5, 5)), rng.random((7, 4, 3))]
    out = transform_batch(imgs)
    assert [o.shape for o in out] == [(5, 5), (7, 4, 3)]
    with pytest.raises(ValueError, match="image 1"):
        transform_batch([rng.random((5, 5)), np.zeros((1, 1))])


def test_batch_3d_array_is_single_channel():
    batch = np.random.default_rng(9).random((3, 6, 6))
    out = transform_batch(batch)
    assert out.shape == (3, 6, 6)
    np.testing.assert_array_equal(out[2], transform(batch[2]))
