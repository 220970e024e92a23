"""Seeded synthesis of the degradations: Gaussian, salt-and-pepper and line
noise, and random-sampling observations.

Every draw comes from a Philox (counter-based) generator keyed by the user
seed and a per-operation tag, so each operation is a pure function of
``(input, params, seed)``.
"""

from __future__ import annotations

import numpy as np

from .cube import CubeDims, HsCube
from .linops import SamplingMask
from .problems import MixedNoiseParams
from .prox import BoxSpec

_TAG_GAUSS, _TAG_SALT, _TAG_LINES, _TAG_MASK = 1, 2, 3, 4


def rng_for(seed: int, tag: int) -> np.random.Generator:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, tag])))


def _check_rate(name, r, allow_zero=True):
    lo_ok = r >= 0 if allow_zero else r > 0
    if not (lo_ok and r < 1):
        raise ValueError(f"{name} must lie in {'[0' if allow_zero else '(0'}, 1), got {r}")


def add_gaussian(u: HsCube, sigma: float, seed: int) -> HsCube:
    """``u + n`` with ``n ~ N(0, sigma^2)`` i.i.d.; not clipped."""
    if not sigma >= 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    if sigma == 0:
        return u
    noise = rng_for(seed, _TAG_GAUSS).standard_normal(u.dims.nb)
    return HsCube(u.dims, u.data + sigma * noise)


def add_salt_pepper(u: HsCube, s_p: float, seed: int, box: BoxSpec = BoxSpec()):
    """Replace each voxel with probability ``s_p`` by ``box.lo`` or ``box.hi``.

    Returns the corrupted cube and a boolean mask (flat, column-stacked) of
    replaced voxels.
    """
    _check_rate("s_p", s_p)
    if s_p == 0:
        return u, np.zeros(u.dims.nb, dtype=bool)
    rng = rng_for(seed, _TAG_SALT)
    hit = rng.random(u.dims.nb) < s_p
    salt = rng.random(u.dims.nb) < 0.5
    out = u.data.copy()
    out[hit] = np.where(salt[hit], box.hi, box.lo)
    return HsCube(u.dims, out), hit


def add_line_noise(u: HsCube, l_v: float, l_h: float, seed: int):
    """Zero out whole lines of a band.

    Each (column, band) pair is a dead vertical line with probability
    ``l_v``; each (row, band) pair is a dead horizontal line with probability
    ``l_h``. Returns the cube and the boolean mask of affected voxels.
    """
    _check_rate("l_v", l_v)
    _check_rate("l_h", l_h)
    dims = u.dims
    if l_v == 0 and l_h == 0:
        return u, np.zeros(dims.nb, dtype=bool)
    rng = rng_for(seed, _TAG_LINES)
    cols = rng.random((dims.n_h, dims.bands)) < l_v
    rows = rng.random((dims.n_v, dims.bands)) < l_h
    hit3 = cols[None, :, :] | rows[:, None, :]
    hit = hit3.ravel(order="F")
    out = u.data.copy()
    out[hit] = 0.0
    return HsCube(dims, out), hit


def add_mixed_noise(u: HsCube, params: MixedNoiseParams, seed: int, box: BoxSpec = BoxSpec()):
    """Gaussian noise first, then salt-and-pepper, then dead lines.

    Sparse corruptions overwrite whatever is underneath. Returns the
    degraded cube and the union mask of sparse-corrupted voxels.
    """
    v = add_gaussian(u, params.sigma, seed)
    v, sp = add_salt_pepper(v, params.s_p, seed, box)
    v, lines = add_line_noise(v, params.l_v, params.l_h, seed)
    return v, sp | lines


def sample_count(nb: int, m: float) -> int:
    """``round(m * NB)`` with halves rounded up."""
    return int(np.floor(m * nb + 0.5))


def make_sampling_mask(dims: CubeDims, m: float, seed: int) -> SamplingMask:
    """Uniformly drawn mask keeping ``round(m * NB)`` distinct voxels."""
    _check_rate("m", m, allow_zero=False)
    k = max(1, sample_count(dims.nb, m))
    idx = rng_for(seed, _TAG_MASK).choice(dims.nb, size=k, replace=False)
    return SamplingMask(dims, np.sort(idx))


def observe_cs(u: HsCube, mask: SamplingMask, sigma: float, seed: int) -> np.ndarray:
    """Noisy samples ``Phi u + n``."""
    if not sigma >= 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    v = mask.apply(u)
    if sigma == 0:
        return v.copy()
    return v + sigma * rng_for(seed, _TAG_GAUSS).standard_normal(mask.m)


def synthetic_cube(dims: CubeDims) -> HsCube:
    """Piecewise-smooth test cube: per-band affine ramps over shared step edges.

    Values stay inside ``[0.05, 0.95]``.
    """
    r = np.arange(dims.n_v)[:, None, None] / max(dims.n_v - 1, 1)
    c = np.arange(dims.n_h)[None, :, None] / max(dims.n_h - 1, 1)
    b = np.arange(dims.bands)[None, None, :] / max(dims.bands - 1, 1)
    regions = 0.25 * (c >= 0.5) + 0.15 * (r >= 1 / 3) - 0.1 * ((r >= 0.7) & (c < 0.3))
    ramp = (0.15 + 0.1 * b) * r + (0.1 - 0.05 * b) * c
    spectrum = 0.3 + 0.2 * b
    cube = np.clip(spectrum + regions * (0.8 + 0.4 * b) + ramp, 0.05, 0.95)
    return HsCube.from_array(np.broadcast_to(cube, dims.shape))
