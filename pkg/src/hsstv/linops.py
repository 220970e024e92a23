"""Periodic difference operators, sampling masks and the FFT / CG solvers.

All operators act on flat column-stacked vectors (see :mod:`hsstv.cube`).
Boundaries are periodic on all three axes, so every stacked difference
operator ``L`` has a Gram matrix ``L^T L`` that the 3-D DFT diagonalizes.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.fft

from .cube import CubeDims, HsCube, ShapeError


class DiffAxis(enum.IntEnum):
    VERTICAL = 0
    HORIZONTAL = 1
    SPECTRAL = 2


class ConvergenceWarning(RuntimeWarning):
    pass


def _fwd(x3: np.ndarray, axis: int) -> np.ndarray:
    return np.roll(x3, -1, axis=axis) - x3


def _adj(y3: np.ndarray, axis: int) -> np.ndarray:
    return np.roll(y3, 1, axis=axis) - y3


def diff_forward(u: HsCube, axis: DiffAxis) -> HsCube:
    """Forward difference ``x[next] - x[this]`` with periodic wrap."""
    return HsCube.from_array(_fwd(u.array, DiffAxis(axis)))


def diff_adjoint(y: HsCube, axis: DiffAxis) -> HsCube:
    """Exact adjoint of :func:`diff_forward` (a backward difference, negated)."""
    return HsCube.from_array(_adj(y.array, DiffAxis(axis)))


def _as_flat(u, nb: int) -> np.ndarray:
    vec = u.data if isinstance(u, HsCube) else np.asarray(u, dtype=np.float64).reshape(-1)
    if vec.size != nb:
        raise ShapeError(f"expected {nb} values, got {vec.size}")
    return vec


def diff_response(n: int) -> np.ndarray:
    """``|delta(k)|^2`` for the periodic forward difference of length ``n``."""
    return 2.0 - 2.0 * np.cos(2.0 * np.pi * np.arange(n) / n)


@dataclass(frozen=True)
class FftSymbol:
    """Eigenvalues of ``L^T L`` laid out as a full ``fftn`` grid."""

    dims: CubeDims
    values: np.ndarray


class StackedDiffOperator:
    """Vertical stack of weighted compositions of periodic differences.

    Each block is the matrix product ``weight * D_{a1} D_{a2} ...`` for a
    tuple of axes, so the last axis is differenced first. The
    output of :meth:`apply` concatenates the column-stacked blocks in order,
    so block ``j`` occupies entries ``j*NB .. (j+1)*NB - 1``.

    The default construction is the hybrid spatio-spectral operator
    ``[D_v D_b; D_h D_b; omega D_v; omega D_h]``.

    Parameters
    ----------
    dims : CubeDims
        Cube dimensions.
    omega : float
        Weight of the direct spatial difference blocks. Ignored when
        ``blocks`` is given.
    blocks : sequence of (float, tuple of DiffAxis), optional
        Explicit block list.
    """

    def __init__(self, dims: CubeDims, omega: float = 0.0, blocks=None):
        if blocks is None:
            if omega < 0:
                raise ValueError("omega must be nonnegative")
            V, H, S = DiffAxis.VERTICAL, DiffAxis.HORIZONTAL, DiffAxis.SPECTRAL
            blocks = [(1.0, (V, S)), (1.0, (H, S)), (omega, (V,)), (omega, (H,))]
        self.dims = dims
        self.omega = float(omega)
        self.blocks = tuple((float(w), tuple(DiffAxis(a) for a in axes)) for w, axes in blocks)

    @classmethod
    def from_blocks(cls, dims: CubeDims, blocks) -> "StackedDiffOperator":
        return cls(dims, blocks=blocks)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def out_size(self) -> int:
        return self.n_blocks * self.dims.nb

    def apply(self, u) -> np.ndarray:
        x3 = _as_flat(u, self.dims.nb).reshape(self.dims.shape, order="F")
        out = np.empty((self.n_blocks, self.dims.nb))
        for j, (w, axes) in enumerate(self.blocks):
            y = x3
            for a in reversed(axes):
                y = _fwd(y, a)
            out[j] = w * y.ravel(order="F")
        return out.reshape(-1)

    def adjoint(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if y.size != self.out_size:
            raise ShapeError(f"expected {self.out_size} values, got {y.size}")
        shape = self.dims.shape
        acc = np.zeros(shape)
        for j, (w, axes) in enumerate(self.blocks):
            if w == 0.0:
                continue
            blk = y[j * self.dims.nb:(j + 1) * self.dims.nb].reshape(shape, order="F")
            for a in axes:
                blk = _adj(blk, a)
            acc += w * blk
        return acc.ravel(order="F")

    def gram(self, u) -> np.ndarray:
        return self.adjoint(self.apply(u))

    def symbol(self) -> FftSymbol:
        resp = [diff_response(n) for n in self.dims.shape]
        grids = np.meshgrid(*resp, indexing="ij")
        lam = np.zeros(self.dims.shape)
        for w, axes in self.blocks:
            term = np.ones(self.dims.shape)
            for a in axes:
                term = term * grids[a]
            lam += w * w * term
        return FftSymbol(self.dims, lam)


def apply_A(u, op: StackedDiffOperator) -> np.ndarray:
    return op.apply(u)


def apply_A_adjoint(y, op: StackedDiffOperator) -> HsCube:
    return HsCube(op.dims, op.adjoint(y))


def build_fft_symbol(op: StackedDiffOperator) -> FftSymbol:
    return op.symbol()


def solve_regularized_normal(b, symbol: FftSymbol, c: float) -> np.ndarray:
    """Solve ``(L^T L + c I) x = b`` by division in the 3-D frequency domain.

    ``b`` is a flat column-stacked vector (or cube); the result is flat.
    """
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    dims = symbol.dims
    b3 = _as_flat(b, dims.nb).reshape(dims.shape, order="F")
    half = symbol.values[:, :, : dims.bands // 2 + 1]
    x3 = scipy.fft.irfftn(scipy.fft.rfftn(b3) / (half + c), s=dims.shape)
    return x3.ravel(order="F")


class SamplingMask:
    """Row-selection operator keeping ``M`` distinct voxels.

    ``indices`` are 0-based and strictly increasing; :attr:`kept` gives the
    1-based linear indices used by external formats.
    """

    def __init__(self, dims: CubeDims, indices):
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        if idx.size < 1 or idx.size > dims.nb:
            raise ValueError(f"mask must keep between 1 and {dims.nb} voxels")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("mask indices must be strictly increasing")
        if idx[0] < 0 or idx[-1] >= dims.nb:
            raise IndexError("mask index out of range")
        idx.flags.writeable = False
        self.dims = dims
        self.indices = idx

    @classmethod
    def full(cls, dims: CubeDims) -> "SamplingMask":
        return cls(dims, np.arange(dims.nb))

    @classmethod
    def from_kept(cls, dims: CubeDims, kept) -> "SamplingMask":
        return cls(dims, np.asarray(kept, dtype=np.int64) - 1)

    @property
    def kept(self) -> np.ndarray:
        return self.indices + 1

    @property
    def m(self) -> int:
        return int(self.indices.size)

    @property
    def rate(self) -> float:
        return self.m / self.dims.nb

    @property
    def is_full(self) -> bool:
        return self.m == self.dims.nb

    def __eq__(self, other):
        if not isinstance(other, SamplingMask):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.indices, other.indices)

    def apply(self, u) -> np.ndarray:
        return _as_flat(u, self.dims.nb)[self.indices]

    def adjoint(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64).reshape(-1)
        if v.size != self.m:
            raise ShapeError(f"expected {self.m} samples, got {v.size}")
        out = np.zeros(self.dims.nb)
        out[self.indices] = v
        return out


def apply_sampling(u, mask: SamplingMask) -> np.ndarray:
    return mask.apply(u)


def apply_sampling_adjoint(v, mask: SamplingMask) -> HsCube:
    return HsCube(mask.dims, mask.adjoint(v))


@dataclass
class CgInfo:
    converged: bool
    iterations: int
    residual: float


def cg_solve(
    matvec: Callable[[np.ndarray], np.ndarray],
    b,
    tol: float = 1e-8,
    max_iter: int = 1000,
    x0=None,
) -> tuple[np.ndarray, CgInfo]:
    """Unpreconditioned conjugate gradients for a symmetric positive definite map.

    Stops when ``||matvec(x) - b|| <= tol * ||b||``. Non-convergence emits a
    :class:`ConvergenceWarning` and is reported in the returned info.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    bnorm = np.linalg.norm(b)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=np.float64).reshape(-1)
    if bnorm == 0.0:
        return np.zeros_like(b), CgInfo(True, 1, 0.0)
    r = b - matvec(x)
    p = r.copy()
    rr = r @ r
    target = tol * bnorm
    k = 0
    while np.sqrt(rr) > target and k < max_iter:
        Ap = matvec(p)
        alpha = rr / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        rr_new = r @ r
        p = r + (rr_new / rr) * p
        rr = rr_new
        k += 1
    res = float(np.sqrt(rr))
    ok = res <= target
    if not ok:
        warnings.warn(
            f"CG did not converge in {max_iter} iterations (residual {res:.3e})",
            ConvergenceWarning,
            stacklevel=2,
        )
    return x, CgInfo(ok, max(k, 1), res)
