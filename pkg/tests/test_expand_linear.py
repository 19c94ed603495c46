import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from densehints.core import HintMap, LinearParams
from densehints.expand_linear import densify_patch, expand_linear, expand_linear_multi
from oracles import dense_patch, listing_linear_multi, patch_iter


def sparse_map(rng, h, w, n):
    vals = np.zeros((h, w))
    n = min(n, h * w)
    vals.flat[rng.choice(h * w, size=n, replace=False)] = rng.uniform(0.5, 50.0, size=n)
    return vals


def test_patch_with_two_hints_unchanged():
    p = np.zeros((8, 8))
    p[0, 0], p[0, 7] = 2.0, 9.0
    assert np.array_equal(densify_patch(p), p)


def test_patch_example():
    p = np.zeros((8, 8))
    p[0, 0], p[0, 7], p[4, 0] = 2.0, 9.0, 6.0
    out = densify_patch(p)
    assert out[0].tolist() == [2, 3, 4, 5, 6, 7, 8, 9]
    assert out[:, 0].tolist() == [2, 3, 4, 5, 6, 6, 6, 6]
    assert np.all(out[1:, 1:] == 0)
    assert np.array_equal(out, dense_patch(p))


def test_patch_single_row():
    p = np.zeros((8, 8))
    p[3, 1], p[3, 4], p[3, 6] = 5.0, 8.0, 4.0
    out = densify_patch(p)
    assert np.count_nonzero(out[3]) == 8
    others = np.delete(out, 3, axis=0)
    assert np.all(others == 0)
    assert np.array_equal(out, dense_patch(p))


def test_between_mode_leaves_outside_empty():
    p = np.zeros((8, 8))
    p[0, 2], p[0, 5], p[6, 2] = 2.0, 5.0, 8.0
    out = densify_patch(p, "between")
    assert out[0].tolist() == [0, 0, 2, 3, 4, 5, 0, 0]
    assert out[:, 2].tolist() == [2, 3, 4, 5, 6, 7, 8, 0]


def test_patch_must_be_square():
    with pytest.raises(ValueError):
        densify_patch(np.zeros((4, 5)))


def test_all_zero_map():
    h = HintMap.zeros(40, 40)
    assert expand_linear(h, 8) == h
    assert expand_linear_multi(h, LinearParams((8, 16))) == h


def test_ragged_remainder_untouched():
    vals = np.zeros((20, 21))
    vals[17, 18], vals[19, 20], vals[16, 19] = 3.0, 4.0, 5.0
    assert np.array_equal(expand_linear(vals, 8).values, vals)


def test_bad_window():
    with pytest.raises(ValueError):
        expand_linear(np.zeros((4, 4)), 1)
    with pytest.raises(ValueError):
        expand_linear(np.zeros((4, 4)), 2, "cubic")


def test_single_window_composition():
    rng = np.random.default_rng(3)
    vals = sparse_map(rng, 48, 48, 60)
    assert expand_linear_multi(vals, LinearParams((8,))) == expand_linear(vals, 8)


def test_multi_is_composition():
    rng = np.random.default_rng(7)
    vals = sparse_map(rng, 64, 64, 20)
    want = patch_iter(patch_iter(vals, 8), 16)
    assert np.array_equal(expand_linear_multi(vals, LinearParams((8, 16))).values, want)


@pytest.mark.parametrize("seed", range(30))
def test_matches_listing(seed):
    rng = np.random.default_rng(500 + seed)
    h, w = rng.integers(1, 129, size=2)
    vals = sparse_map(rng, h, w, int(rng.integers(0, h * w // 8 + 3)))
    windows = tuple(int(x) for x in rng.choice([2, 3, 4, 8, 16, 32], size=rng.integers(1, 3)))
    got = expand_linear_multi(vals, LinearParams(windows)).values
    assert np.array_equal(got, listing_linear_multi(vals, windows))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([4, 8, 16]))
def test_preserves_hints_and_grows(seed, window):
    rng = np.random.default_rng(seed)
    vals = sparse_map(rng, 32, 40, int(rng.integers(0, 120)))
    out = expand_linear(vals, window).values
    hinted = vals > 0
    assert np.count_nonzero(out) >= np.count_nonzero(vals)
    assert np.array_equal(out[hinted], vals[hinted])
    assert np.array_equal(out, patch_iter(vals, window))
