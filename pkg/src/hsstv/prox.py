"""Closed-form proximity operators and metric projections."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cube import ShapeError
from .linops import SamplingMask


@dataclass(frozen=True, eq=False)
class Ball2Spec:
    """``{x : ||x - center|| <= radius}``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(c)):
            raise ValueError("ball center must be finite")
        if not self.radius > 0:
            raise ValueError(f"l2-ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", c)


@dataclass(frozen=True)
class Ball1Spec:
    """Zero-centered l1 ball ``{x : ||x||_1 <= radius}``."""

    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"l1-ball radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class BoxSpec:
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"box requires lo < hi, got [{self.lo}, {self.hi}]")


def _check_gamma(gamma):
    if not gamma > 0:
        raise ValueError(f"threshold must be positive, got {gamma}")


def soft_threshold(x, gamma: float) -> np.ndarray:
    """Prox of ``gamma * ||.||_1``."""
    _check_gamma(gamma)
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - gamma, 0.0)


def group_shrink(x, gamma: float, nb: int) -> np.ndarray:
    """Prox of ``gamma * sum_i ||(x_i, x_{i+NB}, x_{i+2NB}, ...)||_2``.

    ``x`` is a concatenation of equally sized blocks of length ``nb``; entry
    ``i`` of every block forms one group.
    """
    _check_gamma(gamma)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if nb < 1 or x.size % nb:
        raise ShapeError(f"length {x.size} is not a multiple of {nb}")
    g = x.reshape(-1, nb)
    norms = np.sqrt(np.sum(g * g, axis=0))
    # zero-norm groups map to zero
    scale = np.maximum(1.0 - gamma / np.where(norms > 0, norms, np.inf), 0.0)
    return (g * scale).reshape(-1)


def group_shrink_l12(x, gamma: float, nb: int) -> np.ndarray:
    """Group shrinkage over four blocks, the prox of the mixed l1,2 norm."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size != 4 * nb:
        raise ShapeError(f"expected {4 * nb} values, got {x.size}")
    return group_shrink(x, gamma, nb)


def group_shrink_l2_pairs(x, gamma: float, nb: int) -> np.ndarray:
    """Group shrinkage of (vertical, horizontal) difference pairs."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size != 2 * nb:
        raise ShapeError(f"expected {2 * nb} values, got {x.size}")
    return group_shrink(x, gamma, nb)


def project_l2_ball(x, spec: Ball2Spec) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size != spec.center.size:
        raise ShapeError(f"expected {spec.center.size} values, got {x.size}")
    r = x - spec.center
    dist = np.linalg.norm(r)
    if dist <= spec.radius:
        return x.copy()
    return spec.center + (spec.radius / dist) * r


def l1_threshold(a: np.ndarray, radius: float) -> float:
    """Threshold ``theta`` with ``sum(max(a - theta, 0)) == radius`` for ``a >= 0``.

    Assumes ``sum(a) > radius``.
    """
    srt = np.sort(a)[::-1]
    css = np.cumsum(srt)
    j = np.arange(1, srt.size + 1)
    rho = np.nonzero(srt * j > css - radius)[0][-1]
    return (css[rho] - radius) / (rho + 1.0)


def project_l1_ball(x, spec: Ball1Spec) -> np.ndarray:
    """Euclidean projection onto the l1 ball, by sorting and scanning."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    a = np.abs(x)
    if a.sum() <= spec.radius:
        return x.copy()
    theta = l1_threshold(a, spec.radius)
    return np.sign(x) * np.maximum(a - theta, 0.0)


def project_box(x, spec: BoxSpec) -> np.ndarray:
    return np.clip(np.asarray(x, dtype=np.float64), spec.lo, spec.hi)


def prox_l2ball_after_sampling(x, mask: SamplingMask, spec: Ball2Spec) -> np.ndarray:
    """Prox of ``iota_B o Phi`` for a row-selection ``Phi`` (``Phi Phi^T = I``).

    Only the sampled entries move; they are replaced by the projection of
    ``Phi x`` onto the ball.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size != mask.dims.nb:
        raise ShapeError(f"expected {mask.dims.nb} values, got {x.size}")
    if spec.center.size != mask.m:
        raise ShapeError(f"ball center has {spec.center.size} entries, mask keeps {mask.m}")
    out = x.copy()
    out[mask.indices] = project_l2_ball(x[mask.indices], spec)
    return out
