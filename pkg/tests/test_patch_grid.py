import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hadain.errors import ConfigError, ShapeError
from hadain.patch_grid import depatchify, make_grid, patch_size, patchify

from conftest import rand_image

GAMMAS = (0.0, 0.3, 0.5, 0.7, 0.9)


def test_level_one_is_whole_image():
    g = make_grid(512, 512, 1, 0.7)
    assert (g.patch_h, g.patch_w, g.n_patches, g.anchors) == (512, 512, 1, [(0, 0)])


def test_level_two_size():
    # 512 / 1.3 = 393.85
    assert make_grid(512, 512, 2, 0.7).patch_h == 394


def test_level_thirty_geometry():
    g = make_grid(512, 512, 30, 0.7)
    assert g.patch_h == 53  # ceil(512 / 9.7)
    assert g.stride_h == 15  # floor(53 * 0.3)
    assert list(g.rows) == list(range(0, 451, 15)) + [459]
    assert len(g.rows) == 32 and g.n_patches == 1024


def test_exact_rational_sizes():
    # 1 + 2 * (1 - 0.3) = 2.4 exactly; 24 / 2.4 = 10 must not round up to 11
    assert patch_size(24, 3, 0.3) == 10
    assert patch_size(17, 2, 0.3) == 10  # 17 / 1.7 = 10


def test_stride_floor_of_one():
    g = make_grid(10, 10, 3, 0.99)
    assert g.stride_h == 1
    assert list(g.rows) == list(range(0, 10 - g.patch_h + 1))


@pytest.mark.parametrize("kw", [dict(gamma=1.0), dict(gamma=-0.1), dict(level=0), dict(level=1.5)])
def test_bad_config(kw):
    args = dict(height=8, width=8, level=2, gamma=0.5)
    args.update(kw)
    with pytest.raises(ConfigError):
        make_grid(**args)


def test_patchify_four_tiles():
    img = np.arange(48, dtype=float).reshape(3, 4, 4)
    g = make_grid(4, 4, 2, 0.0)
    assert (g.patch_h, g.n_patches) == (2, 4)
    p = patchify(img, g)
    assert p.shape == (4, 3, 2, 2)
    np.testing.assert_array_equal(p[0], img[:, :2, :2])
    np.testing.assert_array_equal(p[1], img[:, :2, 2:])
    np.testing.assert_array_equal(p[3], img[:, 2:, 2:])
    assert np.array_equal(depatchify(p, g, 4, 4), img)


def test_patchify_level_one_copy(rng):
    img = rand_image(rng, 5, 6)
    p = patchify(img, make_grid(5, 6, 1, 0.5))
    assert p.shape == (1, 3, 5, 6) and np.array_equal(p[0], img)
    p[0, 0, 0, 0] = 9.0
    assert img[0, 0, 0] != 9.0


def test_uniform_average_of_overlap():
    # two patches over the same single pixel, values 0.2 and 0.4
    g = replace(make_grid(1, 1, 5, 0.9), rows=(0, 0))
    patches = np.array([[[[0.2]]] * 3, [[[0.4]]] * 3])
    out = depatchify(patches, g, 1, 1)
    assert out[0, 0, 0] == pytest.approx(0.3, abs=1e-16)


def test_overlap_average_matches_sum_over_count(rng):
    g = make_grid(11, 9, 3, 0.7)
    patches = rng.random((g.n_patches, 3, g.patch_h, g.patch_w))
    total = np.zeros((3, 11, 9))
    for p, (r, c) in zip(patches, g.anchors):
        total[:, r:r + g.patch_h, c:c + g.patch_w] += p
    expected = total / g.coverage()
    np.testing.assert_allclose(depatchify(patches, g), expected, rtol=0, atol=1e-15)


def test_gamma_zero_no_averaging(rng):
    g = make_grid(12, 12, 4, 0.0)
    assert g.coverage().max() == 1
    patches = rng.random((g.n_patches, 3, g.patch_h, g.patch_w))
    out = depatchify(patches, g)
    for p, (r, c) in zip(patches, g.anchors):
        assert np.array_equal(out[:, r:r + g.patch_h, c:c + g.patch_w], p)


def test_shape_errors(rng):
    g = make_grid(6, 6, 2, 0.5)
    with pytest.raises(ShapeError):
        patchify(rand_image(rng, 6, 7), g)
    with pytest.raises(ShapeError):
        depatchify(np.zeros((g.n_patches + 1, 3, g.patch_h, g.patch_w)), g)
    with pytest.raises(ShapeError):
        depatchify(np.zeros((g.n_patches, 3, g.patch_h, g.patch_w)), g, 7, 6)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 200), st.integers(1, 200), st.integers(1, 40), st.sampled_from(GAMMAS + (0.99,)))
def test_grid_invariants(h, w, level, gamma):
    g = make_grid(h, w, level, gamma)
    assert g.patch_h == math.ceil(h / (1 + (level - 1) * (1 - gamma)) - 1e-9)
    assert all(r + g.patch_h <= h for r in g.rows) and all(c + g.patch_w <= w for c in g.cols)
    assert list(g.rows) == sorted(set(g.rows)) and list(g.cols) == sorted(set(g.cols))
    assert g.coverage().min() >= 1
    assert g.anchors == sorted(g.anchors)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 300), st.integers(1, 60), st.sampled_from(GAMMAS))
def test_patch_size_monotone_in_level(h, level, gamma):
    assert make_grid(h, h, level + 1, gamma).patch_h <= make_grid(h, h, level, gamma).patch_h


def test_deterministic_blend(rng):
    g = make_grid(33, 40, 6, 0.7)
    patches = rng.random((g.n_patches, 3, g.patch_h, g.patch_w))
    assert depatchify(patches, g).tobytes() == depatchify(patches.copy(), g).tobytes()


@pytest.mark.parametrize("args", [(11, 9, 3, 0.7), (64, 37, 8, 0.9), (5, 64, 2, 0.0), (1, 1, 4, 0.5)])
def test_coverage_matches_patch_loop(args):
    g = make_grid(*args)
    cnt = np.zeros((g.height, g.width), dtype=np.int64)
    for r, c in g.anchors:
        cnt[r:r + g.patch_h, c:c + g.patch_w] += 1
    assert np.array_equal(g.coverage(), cnt)
