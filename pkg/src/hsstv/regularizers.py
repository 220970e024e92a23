"""TV-type regularizers and their ADMM splitting recipes.

Every regularizer here has the form ``R(u) = N(L u)`` with ``L`` a
:class:`~hsstv.linops.StackedDiffOperator` and ``N`` either the l1 norm or a
mixed l1,2 norm grouping entry ``i`` of every block. A
:class:`SplitRecipe` bundles ``L`` with the prox of ``N`` so one ADMM engine
handles all of them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .cube import CubeDims, HsCube
from .linops import DiffAxis, StackedDiffOperator
from .prox import group_shrink, soft_threshold

V, H, S = DiffAxis.VERTICAL, DiffAxis.HORIZONTAL, DiffAxis.SPECTRAL


class RegKind(str, enum.Enum):
    HSSTV = "hsstv"
    HTV = "htv"
    SSTV = "sstv"
    ASSTV = "asstv"


@dataclass(frozen=True)
class RegularizerSpec:
    kind: RegKind = RegKind.HSSTV
    omega: float = 0.04
    p: int = 1
    tau: tuple[float, float, float] = (1.0, 1.0, 3.0)

    def __post_init__(self):
        object.__setattr__(self, "kind", RegKind(self.kind))
        object.__setattr__(self, "tau", tuple(float(t) for t in self.tau))
        if self.omega < 0:
            raise ValueError(f"omega must be nonnegative, got {self.omega}")
        if self.p not in (1, 2):
            raise ValueError(f"p must be 1 or 2, got {self.p}")
        if self.kind is RegKind.ASSTV and (len(self.tau) != 3 or min(self.tau) <= 0):
            raise ValueError(f"ASSTV needs three positive weights, got {self.tau}")


def _l1(x: np.ndarray, nb: int) -> float:
    return float(np.sum(np.abs(x)))


def _l12(x: np.ndarray, nb: int) -> float:
    g = x.reshape(-1, nb)
    return float(np.sum(np.sqrt(np.sum(g * g, axis=0))))


@dataclass(frozen=True)
class SplitRecipe:
    """Analysis operator plus the norm applied to its output and that norm's prox."""

    operator: StackedDiffOperator
    grouped: bool

    @property
    def size(self) -> int:
        return self.operator.out_size

    def analysis(self, u) -> np.ndarray:
        return self.operator.apply(u)

    def norm(self, y) -> float:
        nb = self.operator.dims.nb
        return (_l12 if self.grouped else _l1)(np.asarray(y).reshape(-1), nb)

    def prox(self, y, gamma: float) -> np.ndarray:
        nb = self.operator.dims.nb
        return group_shrink(y, gamma, nb) if self.grouped else soft_threshold(y, gamma)

    def value(self, u) -> float:
        return self.norm(self.analysis(u))


def make_split_recipe(spec: RegularizerSpec, dims: CubeDims) -> SplitRecipe:
    if spec.kind is RegKind.HSSTV:
        return SplitRecipe(StackedDiffOperator(dims, spec.omega), grouped=spec.p == 2)
    if spec.kind is RegKind.HTV:
        return SplitRecipe(StackedDiffOperator.from_blocks(dims, [(1.0, (V,)), (1.0, (H,))]), True)
    if spec.kind is RegKind.SSTV:
        blocks = [(1.0, (V, S)), (1.0, (H, S))]
        return SplitRecipe(StackedDiffOperator.from_blocks(dims, blocks), False)
    tv, th, tb = spec.tau
    blocks = [(tv, (V,)), (th, (H,)), (tb, (S,))]
    return SplitRecipe(StackedDiffOperator.from_blocks(dims, blocks), False)


def _vec(u) -> tuple[np.ndarray, CubeDims]:
    if not isinstance(u, HsCube):
        u = HsCube.from_array(u)
    return u.data, u.dims


def eval_hsstv(u, omega: float, p: int = 1) -> float:
    if p not in (1, 2):
        raise ValueError(f"p must be 1 or 2, got {p}")
    x, dims = _vec(u)
    return make_split_recipe(RegularizerSpec(RegKind.HSSTV, omega, p), dims).value(x)


def eval_htv(u) -> float:
    x, dims = _vec(u)
    return make_split_recipe(RegularizerSpec(RegKind.HTV), dims).value(x)


def eval_sstv(u) -> float:
    x, dims = _vec(u)
    return make_split_recipe(RegularizerSpec(RegKind.SSTV), dims).value(x)


def eval_asstv(u, tau_v: float, tau_h: float, tau_b: float) -> float:
    x, dims = _vec(u)
    spec = RegularizerSpec(RegKind.ASSTV, tau=(tau_v, tau_h, tau_b))
    return make_split_recipe(spec, dims).value(x)


def evaluate(spec: RegularizerSpec, u) -> float:
    x, dims = _vec(u)
    return make_split_recipe(spec, dims).value(x)
