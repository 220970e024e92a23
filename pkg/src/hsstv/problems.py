"""Mixed-noise denoising and compressed-sensing problem instances.

Both problems minimize a TV-type regularizer subject to hard constraints:

* denoising: ``Phi u + s`` inside the l2 ball of radius ``epsilon`` around
  the observation, ``s`` inside the l1 ball of radius ``eta`` and ``u`` in
  the dynamic-range box;
* CS: ``Phi u`` inside the l2 ball and ``u`` in the box (no sparse term).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cube import CubeDims, HsCube, ShapeError
from .linops import FftSymbol, SamplingMask
from .prox import Ball1Spec, Ball2Spec, BoxSpec
from .regularizers import RegKind, RegularizerSpec, SplitRecipe, make_split_recipe

DENOISE_OMEGA = 0.04
CS_OMEGA = 0.05
DENOISE_ASSTV_TAU = {"i": (1.0, 1.0, 3.0), "ii": (1.0, 1.0, 2.0)}
CS_ASSTV_TAU = (1.0, 1.0, 0.5)


@dataclass(frozen=True)
class MixedNoiseParams:
    sigma: float = 0.0
    s_p: float = 0.0
    l_v: float = 0.0
    l_h: float = 0.0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        for name in ("s_p", "l_v", "l_h"):
            r = getattr(self, name)
            if not 0 <= r < 1:
                raise ValueError(f"{name} must lie in [0, 1), got {r}")

    @property
    def sparse_fraction(self) -> float:
        """Expected fraction of voxels hit by salt-and-pepper or line noise."""
        lines = self.l_v + self.l_h - self.l_v * self.l_h
        return self.s_p * (1 - self.l_v - self.l_h) + lines


NOISE_LEVELS = {
    "i": MixedNoiseParams(0.05, 0.04, 0.04, 0.04),
    "ii": MixedNoiseParams(0.1, 0.05, 0.05, 0.05),
}


def epsilon_mixed(params: MixedNoiseParams, dims: CubeDims) -> float:
    """l2-ball radius heuristic for Gaussian plus sparse noise."""
    clean = 1.0 - params.sparse_fraction
    return 0.83 * math.sqrt(dims.nb * clean * params.sigma**2)


def eta_mixed(params: MixedNoiseParams, v_ave: float, dims: CubeDims) -> float:
    """l1-ball radius heuristic; ``v_ave`` is the mean of the observation."""
    p = params
    return dims.nb * (0.45 * p.s_p + (p.l_v + p.l_h) * v_ave - p.l_v * p.l_h * v_ave)


def epsilon_cs(m: float, dims: CubeDims, sigma: float) -> float:
    if not 0 < m <= 1:
        raise ValueError(f"sampling rate must lie in (0, 1], got {m}")
    return math.sqrt(m * dims.nb * sigma**2)


@dataclass(frozen=True, eq=False)
class RestorationProblem:
    """A fully specified constrained restoration problem.

    ``mask`` is ``None`` for the identity observation. ``ball1`` is present
    exactly for denoising problems. ``path`` selects the u-step solver,
    ``"fft"`` (direct, needs a BCCB system) or ``"cg"``.
    """

    kind: str
    dims: CubeDims
    observation: np.ndarray
    reg: RegularizerSpec
    ball2: Ball2Spec
    box: BoxSpec
    ball1: Optional[Ball1Spec] = None
    mask: Optional[SamplingMask] = None
    path: str = "fft"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in ("denoise", "cs"):
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.path not in ("fft", "cg"):
            raise ValueError(f"unknown solver path {self.path!r}")
        if self.kind == "denoise" and self.ball1 is None:
            raise ValueError("denoising problems need an l1-ball")
        if self.kind == "cs":
            if self.ball1 is not None:
                raise ValueError("CS problems carry no l1-ball")
            if self.mask is None:
                raise ValueError("CS problems need a sampling mask")
        if self.mask is not None and self.mask.dims != self.dims:
            raise ShapeError("mask dims differ from problem dims")
        if (self.kind == "denoise" and self.mask is not None and not self.mask.is_full
                and self.path == "fft"):
            raise ValueError("denoising with a partial mask needs the cg path")
        if self.observation.size != self.m:
            raise ShapeError(f"observation has {self.observation.size} entries, expected {self.m}")

    @property
    def m(self) -> int:
        return self.dims.nb if self.mask is None else self.mask.m

    @property
    def epsilon(self) -> float:
        return self.ball2.radius

    @property
    def eta(self) -> Optional[float]:
        return None if self.ball1 is None else self.ball1.radius

    @functools.cached_property
    def recipe(self) -> SplitRecipe:
        return make_split_recipe(self.reg, self.dims)

    @functools.cached_property
    def symbol(self) -> FftSymbol:
        return self.recipe.operator.symbol()

    def phi(self, u) -> np.ndarray:
        u = np.asarray(u).reshape(-1)
        return u if self.mask is None else self.mask.apply(u)

    def phi_t(self, v) -> np.ndarray:
        v = np.asarray(v).reshape(-1)
        return v if self.mask is None else self.mask.adjoint(v)


def _ball2(center, radius) -> Ball2Spec:
    if not radius > 0:
        raise ValueError(
            f"l2-ball radius is {radius}; equality-constrained problems are not supported")
    return Ball2Spec(center, radius)


def build_denoise(
    v: HsCube,
    reg: Optional[RegularizerSpec] = None,
    params: MixedNoiseParams = NOISE_LEVELS["i"],
    box: BoxSpec = BoxSpec(0.0, 1.0),
    epsilon: Optional[float] = None,
    eta: Optional[float] = None,
    path: str = "fft",
) -> RestorationProblem:
    """Mixed-noise denoising problem with radii from the noise heuristics.

    ``epsilon`` and ``eta`` override the heuristics when given.
    """
    reg = reg if reg is not None else RegularizerSpec(RegKind.HSSTV, DENOISE_OMEGA, 1)
    dims = v.dims
    eps = epsilon_mixed(params, dims) if epsilon is None else float(epsilon)
    v_ave = float(np.mean(v.data))
    et = eta_mixed(params, v_ave, dims) if eta is None else float(eta)
    if not et > 0:
        raise ValueError(f"l1-ball radius is {et}; equality-constrained problems are not supported")
    return RestorationProblem(
        kind="denoise",
        dims=dims,
        observation=v.data.copy(),
        reg=reg,
        ball2=_ball2(v.data, eps),
        ball1=Ball1Spec(et),
        box=box,
        path=path,
        meta={"params": params, "v_ave": v_ave},
    )


def build_cs(
    v,
    mask: SamplingMask,
    reg: Optional[RegularizerSpec] = None,
    sigma: float = 0.1,
    box: BoxSpec = BoxSpec(0.0, 1.0),
    epsilon: Optional[float] = None,
    path: str = "fft",
) -> RestorationProblem:
    """CS reconstruction from the ``M`` samples ``v`` kept by ``mask``."""
    reg = reg if reg is not None else RegularizerSpec(RegKind.HSSTV, CS_OMEGA, 1)
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.size != mask.m:
        raise ShapeError(f"observation has {v.size} entries, mask keeps {mask.m}")
    eps = epsilon_cs(mask.rate, mask.dims, sigma) if epsilon is None else float(epsilon)
    return RestorationProblem(
        kind="cs",
        dims=mask.dims,
        observation=v.copy(),
        reg=reg,
        ball2=_ball2(v, eps),
        box=box,
        mask=mask,
        path=path,
        meta={"sigma": sigma},
    )


def constraint_slacks(problem: RestorationProblem, u, s=None) -> dict:
    """Relative constraint violations ``max(0, violation) / scale`` at ``(u, s)``."""
    u = np.asarray(u).reshape(-1)
    fit = problem.phi(u)
    if s is not None:
        fit = fit + s
    out = {"l2_ball": max(0.0, float(np.linalg.norm(fit - problem.ball2.center)) - problem.epsilon)
           / problem.epsilon}
    if problem.ball1 is not None:
        l1 = float(np.sum(np.abs(s))) if s is not None else 0.0
        out["l1_ball"] = max(0.0, l1 - problem.eta) / problem.eta
    lo, hi = problem.box.lo, problem.box.hi
    worst = max(0.0, float(np.max(lo - u)), float(np.max(u - hi)))
    out["box"] = worst / (hi - lo)
    return out
