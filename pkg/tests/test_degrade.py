import numpy as np
import pytest

from hsstv.cube import CubeDims, HsCube, constant_cube
from hsstv.degrade import (add_gaussian, add_line_noise, add_mixed_noise, add_salt_pepper,
                           make_sampling_mask, observe_cs, sample_count, synthetic_cube)
from hsstv.problems import NOISE_LEVELS, MixedNoiseParams
from hsstv.prox import BoxSpec

BIG = CubeDims(64, 64, 8)


@pytest.fixture(scope="module")
def half():
    return constant_cube(BIG, 0.5)


def test_gaussian(half):
    assert add_gaussian(half, 0.0, 1) is half
    out = add_gaussian(half, 0.1, 42)
    assert abs(np.std(out.data - half.data) - 0.1) <= 0.005
    assert out == add_gaussian(half, 0.1, 42)
    assert out != add_gaussian(half, 0.1, 43)
    # not clipped
    assert out.data.max() > 0.75 and out.data.min() < 0.25
    with pytest.raises(ValueError):
        add_gaussian(half, -0.1, 1)


def test_salt_pepper(half):
    same, hit = add_salt_pepper(half, 0.0, 3)
    assert same is half and not hit.any()
    out, hit = add_salt_pepper(half, 0.04, 3)
    assert abs(hit.mean() - 0.04) <= 0.01
    assert set(np.unique(out.data[hit])) <= {0.0, 1.0}
    assert np.array_equal(out.data[~hit], half.data[~hit])
    out2, _ = add_salt_pepper(half, 0.04, 3, BoxSpec(-1.0, 2.0))
    assert set(np.unique(out2.data[hit])) <= {-1.0, 2.0}
    with pytest.raises(ValueError):
        add_salt_pepper(half, 1.0, 3)


def test_line_noise(half):
    same, hit = add_line_noise(half, 0.0, 0.0, 9)
    assert same is half and not hit.any()
    out, hit = add_line_noise(half, 0.04, 0.04, 9)
    expected = 0.04 + 0.04 - 0.04 * 0.04
    assert abs(hit.mean() - expected) <= 0.02
    assert np.all(out.data[hit] == 0) and np.all(out.data[~hit] == 0.5)
    h3 = hit.reshape(BIG.shape, order="F")
    # each hit voxel sits on a fully hit column or row of its band
    full_cols = h3.all(axis=0)
    full_rows = h3.all(axis=1)
    covered = full_cols[None, :, :] | full_rows[:, None, :]
    assert np.array_equal(covered, h3)


def test_mixed_noise_order_and_determinism():
    u = synthetic_cube(CubeDims(16, 16, 4))
    p = NOISE_LEVELS["ii"]
    v, hit = add_mixed_noise(u, p, 7)
    v2, hit2 = add_mixed_noise(u, p, 7)
    assert v == v2 and np.array_equal(hit, hit2)
    assert v.data.tobytes() == v2.data.tobytes()
    g = add_gaussian(u, p.sigma, 7)
    # untouched voxels carry exactly the Gaussian sample; hit voxels are sparse values
    assert np.array_equal(v.data[~hit], g.data[~hit])
    assert set(np.unique(v.data[hit])) <= {0.0, 1.0}
    clean, none = add_mixed_noise(u, MixedNoiseParams(), 7)
    assert clean.data.tobytes() == u.data.tobytes() and not none.any()


def test_sampling_mask():
    dims = CubeDims(32, 32, 8)
    assert sample_count(8192, 0.4) == 3277
    mask = make_sampling_mask(dims, 0.4, 5)
    assert mask.m == 3277 and np.all(np.diff(mask.indices) > 0)
    assert mask == make_sampling_mask(dims, 0.4, 5)
    assert mask != make_sampling_mask(dims, 0.4, 6)
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            make_sampling_mask(dims, bad, 5)


def test_observe_cs():
    dims = CubeDims(8, 8, 4)
    u = synthetic_cube(dims)
    mask = make_sampling_mask(dims, 0.5, 2)
    assert np.array_equal(observe_cs(u, mask, 0.0, 2), u.data[mask.indices])
    a, b = observe_cs(u, mask, 0.1, 2), observe_cs(u, mask, 0.1, 2)
    assert a.tobytes() == b.tobytes()


def test_synthetic_cube_range():
    u = synthetic_cube(CubeDims(32, 32, 8))
    assert u.data.min() >= 0.05 and u.data.max() <= 0.95
    assert isinstance(u, HsCube) and len(np.unique(u.data)) > 100
