import itertools
import math

import numpy as np
import pytest

from oracles import loop_ssim

from hsstv.cube import CubeDims, HsCube, ShapeError, constant_cube
from hsstv.metrics import (SsimConfig, bandwise_metrics, metrics_report, psnr, spatial_response,
                           spectral_response, ssim, ssim_map)


def test_psnr_spot_values():
    dims = CubeDims(2, 2, 1)
    ref = constant_cube(dims, 0.5)
    u = HsCube(dims, [0.5 + 0.2, 0.5, 0.5, 0.5])  # squared error 0.04
    assert psnr(u, ref) == pytest.approx(20.0, abs=1e-12)
    assert psnr(ref, ref) == math.inf
    for shape in ((3, 3, 1), (8, 5, 4)):
        d = CubeDims(*shape)
        assert psnr(constant_cube(d, 0.6), constant_cube(d, 0.5)) == pytest.approx(20.0, abs=1e-9)
    with pytest.raises(ShapeError):
        psnr(ref, constant_cube(CubeDims(4, 1, 1), 0.5))


def test_psnr_decreases_with_error(rng):
    ref = HsCube(CubeDims(4, 4, 2), rng.uniform(0, 1, 32))
    direction = rng.standard_normal(32)
    vals = [psnr(HsCube(ref.dims, ref.data + t * direction), ref) for t in (0.01, 0.1, 0.5, 1.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_ssim_identity_and_symmetry(rng):
    u = HsCube.from_array(rng.uniform(0, 1, (10, 9, 2)))
    v = HsCube.from_array(rng.uniform(0, 1, (10, 9, 2)))
    assert ssim(u, u) == 1.0
    assert ssim(u, v) == pytest.approx(ssim(v, u), abs=1e-15)
    assert -1 < ssim(u, v) <= 1


def test_ssim_matches_loop(rng):
    x = rng.uniform(0, 1, (8, 8, 1))
    y = np.clip(x + 0.1 * rng.standard_normal(x.shape), 0, 1)
    assert ssim(HsCube.from_array(x), HsCube.from_array(y)) == pytest.approx(loop_ssim(x, y),
                                                                            rel=1e-10)
    x = rng.uniform(0, 1, (11, 9, 2))
    y = rng.uniform(0, 1, (11, 9, 2))
    assert ssim(HsCube.from_array(x), HsCube.from_array(y)) == pytest.approx(loop_ssim(x, y),
                                                                            rel=1e-10)


def test_ssim_ordering(rng):
    base = np.zeros((16, 16, 1))
    base[:, 8:] = 0.8
    base += np.linspace(0, 0.1, 16)[:, None, None]
    ref = HsCube.from_array(base)
    mild = HsCube.from_array(base + 0.01 * rng.standard_normal(base.shape))
    noise = HsCube.from_array(rng.uniform(0, 1, base.shape))
    assert ssim(mild, ref) > ssim(noise, ref)


def test_ssim_config():
    with pytest.raises(ValueError):
        SsimConfig(window=1)
    with pytest.raises(ValueError):
        SsimConfig(c1=0)
    with pytest.raises(ShapeError):
        ssim_map(np.zeros((4, 4)), np.zeros((4, 4)))
    m = ssim_map(np.ones((10, 10)), np.ones((10, 10)), SsimConfig(window=4, stride=3))
    assert m.shape == (3, 3)


def test_bandwise(rng):
    a = HsCube.from_array(rng.uniform(0, 1, (9, 9, 3)))
    bp, bs = bandwise_metrics(a, a)
    assert bp == [math.inf] * 3 and bs == [1.0] * 3
    arr = a.array.copy()
    arr[:, :, 1] += 0.1
    b = HsCube.from_array(arr)
    bp, bs = bandwise_metrics(b, a)
    assert bp[0] == bp[2] == math.inf and bp[1] == pytest.approx(20.0)
    c = HsCube.from_array(rng.uniform(0, 1, (9, 9, 3)))
    _, bs = bandwise_metrics(c, a)
    assert np.mean(bs) == pytest.approx(ssim(c, a), rel=1e-12)
    rep = metrics_report(c, a)
    assert rep.psnr == psnr(c, a) and len(rep.band_psnr) == 3


def test_responses_match_indexing(rng):
    dims = CubeDims(5, 4, 3)
    u = HsCube(dims, rng.standard_normal(dims.nb))
    # direct lookup through the 1-based linear index
    for row, band in itertools.product(range(1, 6), range(1, 4)):
        prof = spatial_response(u, row, band)
        ref = [u.data[row + (c - 1) * 5 + (band - 1) * 20 - 1] for c in range(1, 5)]
        assert prof.tolist() == ref
    for row, col in itertools.product(range(1, 6), range(1, 5)):
        prof = spectral_response(u, row, col)
        ref = [u.data[row + (col - 1) * 5 + (b - 1) * 20 - 1] for b in range(1, 4)]
        assert prof.tolist() == ref
    const = constant_cube(dims, 0.3)
    assert spatial_response(const, 2, 2).tolist() == [0.3] * 4
    assert spectral_response(const, 2, 2).tolist() == [0.3] * 3
    with pytest.raises(IndexError):
        spatial_response(u, 6, 1)
    with pytest.raises(IndexError):
        spectral_response(u, 1, 5)
