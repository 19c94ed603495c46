import math

import numpy as np
import pytest

from densehints.core import DisparityMap, RgbImage
from densehints.rng import MASK, STREAM_MULT, SplitMix64, mix64
from densehints.synth import (
    SceneSpec,
    gen_planar_scene,
    gradient_magnitude,
    hint_count,
    left_occlusion,
    make_scene,
    random_planes,
    sample_hints,
    warp_right,
)
from oracles import splitmix_next


def test_splitmix_published_vector():
    # seed 0: the first output of the reference SplitMix64
    assert int(SplitMix64(0).next_u64(1)[0]) == 0xE220A8397B1DCDAF


@pytest.mark.parametrize("seed,stream", [(0, 0), (42, 3), (2**63 + 5, 4), (123456789, 1)])
def test_splitmix_against_integer_oracle(seed, stream):
    state = mix64((seed + stream * STREAM_MULT) & MASK)
    want = []
    for _ in range(50):
        state, out = splitmix_next(state)
        want.append(out)
    rng = SplitMix64(seed, stream)
    got = [int(v) for v in rng.next_u64(20)] + [int(v) for v in rng.next_u64(30)]
    assert got == want


def test_splitmix_frozen_values():
    assert [hex(int(v)) for v in SplitMix64(42, 3).next_u64(3)] == [
        "0xc3330b4106aa3280",
        "0x2311ae36fe80a65b",
        "0xc9c7a2b246938f65",
    ]
    assert SplitMix64(7, 1).uniform(2).tolist() == [0.5391231475795676, 0.3956961063033595]
    assert SplitMix64(7, 1).normal(2).tolist() == pytest.approx(
        [-0.03198144739925052, -0.9055631407394132], abs=1e-15
    )


def test_splitmix_distributions():
    rng = SplitMix64(1, 2)
    u = rng.uniform(100000)
    assert 0 <= u.min() and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.005
    z = SplitMix64(1, 3).normal(100000)
    assert abs(z.mean()) < 0.01 and abs(z.std() - 1) < 0.01
    k = SplitMix64(1, 4).integers(1000, 3, 9)
    assert k.min() == 3 and k.max() == 8


def test_single_flat_plane_is_constant():
    spec = SceneSpec(seed=5, n_planes=1, max_slope=0.0, height=30, width=40)
    _, gt = gen_planar_scene(spec)
    assert np.all(gt.values == gt.values[0, 0])


def test_scene_is_deterministic():
    spec = SceneSpec(seed=9, height=60, width=80, density=0.01, noise_sigma=0.5)
    a, b = make_scene(spec), make_scene(spec)
    assert np.array_equal(a.left.values, b.left.values)
    assert np.array_equal(a.right.values, b.right.values)
    assert np.array_equal(a.gt.values, b.gt.values)
    assert a.hints == b.hints
    assert not np.array_equal(a.gt.values, make_scene(spec.replace(seed=10)).gt.values)


@pytest.mark.parametrize("texture", ["noise", "gradient", "checker", "random"])
def test_disparities_within_bounds(texture):
    spec = SceneSpec(seed=2, height=50, width=70, texture=texture, max_slope=0.5)
    img, gt = gen_planar_scene(spec)
    assert gt.values.min() >= spec.d_min and gt.values.max() <= spec.d_max
    assert 0 <= img.values.min() and img.values.max() <= 1
    # float32-representable so PFM storage is lossless
    assert np.array_equal(gt.values.astype(np.float32).astype(np.float64), gt.values)


def test_planes_sorted_far_to_near():
    planes = random_planes(SceneSpec(seed=4, n_planes=6))
    cs = [p.c for p in planes[1:]]
    assert cs == sorted(cs)
    assert len(planes[0].polygon) == 0


def test_warp_zero_disparity_is_identity():
    rng = np.random.default_rng(0)
    left = RgbImage(rng.uniform(size=(10, 12, 3)))
    right, valid = warp_right(left, DisparityMap(np.zeros((10, 12))))
    assert np.array_equal(right.values, left.values) and valid.all()


def test_warp_constant_shift():
    rng = np.random.default_rng(1)
    left = RgbImage(rng.uniform(size=(8, 20, 3)))
    right, valid = warp_right(left, DisparityMap(np.full((8, 20), 3.0)))
    assert np.allclose(right.values[:, :17], left.values[:, 3:])
    assert valid[:, :17].all() and not valid[:, 17:].any()


def test_left_occlusion_simple_step():
    d = np.full((1, 12), 2.0)
    d[0, 6:] = 5.0  # nearer surface from column 6 covers right columns 1..6
    occ = left_occlusion(d)
    # left columns 3,4,5 land on 1,2,3, behind the nearer surface
    assert occ[0].tolist() == [False] * 3 + [True] * 3 + [False] * 6


def test_hint_count_examples():
    assert hint_count(SceneSpec(height=480, width=640, density=0.001)) == 307
    assert hint_count(SceneSpec(height=544, width=960, density=0.0005)) == 261


def test_noiseless_hints_equal_gt():
    spec = SceneSpec(seed=3, height=60, width=80, density=0.01)
    scene = make_scene(spec)
    m = scene.hints.mask
    assert m.sum() == 48
    assert np.array_equal(scene.hints.values[m], scene.gt.values[m])


def test_hints_prefer_gradients():
    spec = SceneSpec(seed=1, height=120, width=160, density=0.01, texture="checker")
    scene = make_scene(spec)
    g = gradient_magnitude(scene.left)
    assert g[scene.hints.mask].mean() > 2 * g.mean()


def test_half_normal_hint_error():
    sigma = 1.5
    spec = SceneSpec(seed=8, height=200, width=250, density=0.04, noise_sigma=sigma)
    scene = make_scene(spec)
    m = scene.hints.mask
    assert m.sum() >= 1000
    err = np.abs(scene.hints.values[m] - scene.gt.values[m]).mean()
    assert err == pytest.approx(sigma * math.sqrt(2 / math.pi), rel=0.10)
    assert scene.hints.values[m].min() >= 1e-3


def test_spec_validation():
    with pytest.raises(ValueError):
        SceneSpec(density=0.2)
    with pytest.raises(ValueError):
        SceneSpec(texture="marble")
    with pytest.raises(ValueError):
        SceneSpec(d_min=5, d_max=5)
    with pytest.raises(ValueError):
        sample_hints(np.full((2, 2), 3.0), np.zeros((2, 2, 3)), SceneSpec(height=100, width=100, density=0.05))
