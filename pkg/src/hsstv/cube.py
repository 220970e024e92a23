"""Hyperspectral cube value type and its vectorization convention.

A cube of ``n_v`` rows, ``n_h`` columns and ``bands`` bands is held as one
flat vector of length ``n_v * n_h * bands``. Columns of each band are stacked
on top of one another and the bands are stacked last, so the (1-based) voxel
at ``(row, col, band)`` lives at ``row + (col - 1) * n_v + (band - 1) * N``
with ``N = n_v * n_h``. This is exactly NumPy's Fortran order for an array of
shape ``(n_v, n_h, bands)``, which is what :meth:`HsCube.array` returns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ShapeError(ValueError):
    """Raised when array lengths or cube dimensions disagree."""


@dataclass(frozen=True)
class CubeDims:
    n_v: int
    n_h: int
    bands: int

    def __post_init__(self):
        for name in ("n_v", "n_h", "bands"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def n(self) -> int:
        """Pixels per band."""
        return self.n_v * self.n_h

    @property
    def nb(self) -> int:
        """Total number of voxels."""
        return self.n_v * self.n_h * self.bands

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n_v, self.n_h, self.bands)


@dataclass(frozen=True)
class VoxelIndex:
    row: int
    col: int
    band: int


def linear_index(idx: VoxelIndex, dims: CubeDims) -> int:
    """1-based position of a voxel in the column-stacked vector."""
    for name, top in (("row", dims.n_v), ("col", dims.n_h), ("band", dims.bands)):
        value = getattr(idx, name)
        if not 1 <= value <= top:
            raise IndexError(f"{name}={value} outside 1..{top}")
    i = idx.row + (idx.col - 1) * dims.n_v
    return i + (idx.band - 1) * dims.n


def voxel_index(k: int, dims: CubeDims) -> VoxelIndex:
    """Inverse of :func:`linear_index`."""
    if not 1 <= k <= dims.nb:
        raise IndexError(f"linear index {k} outside 1..{dims.nb}")
    band, rem = divmod(k - 1, dims.n)
    col, row = divmod(rem, dims.n_v)
    return VoxelIndex(row + 1, col + 1, band + 1)


class HsCube:
    """Immutable hyperspectral cube stored as a flat column-stacked vector.

    Parameters
    ----------
    dims : CubeDims
        Cube dimensions.
    data : array_like
        ``dims.nb`` finite real values in column-stacked order.
    """

    __slots__ = ("_dims", "_data")

    def __init__(self, dims: CubeDims, data):
        vec = np.array(data, dtype=np.float64).reshape(-1)
        if vec.size != dims.nb:
            raise ShapeError(f"expected {dims.nb} values for {dims.shape}, got {vec.size}")
        if not np.all(np.isfinite(vec)):
            raise ValueError("cube values must be finite")
        vec.flags.writeable = False
        self._dims = dims
        self._data = vec

    @classmethod
    def from_array(cls, array) -> "HsCube":
        """Build a cube from an ``(n_v, n_h, bands)`` array."""
        arr = np.asarray(array, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise ShapeError(f"expected a 3-D array, got shape {arr.shape}")
        return cls(CubeDims(*arr.shape), arr.ravel(order="F"))

    @property
    def dims(self) -> CubeDims:
        return self._dims

    @property
    def data(self) -> np.ndarray:
        """Read-only flat vector of length ``dims.nb``."""
        return self._data

    @property
    def array(self) -> np.ndarray:
        """Read-only ``(n_v, n_h, bands)`` view of the data."""
        return self._data.reshape(self._dims.shape, order="F")

    def __getitem__(self, idx: VoxelIndex) -> float:
        return float(self._data[linear_index(idx, self._dims) - 1])

    def __len__(self) -> int:
        return self._dims.nb

    def __eq__(self, other):
        if not isinstance(other, HsCube):
            return NotImplemented
        return self._dims == other._dims and np.array_equal(self._data, other._data)

    def __hash__(self):
        return hash((self._dims, self._data.tobytes()))

    def __repr__(self):
        d = self._dims
        return f"HsCube({d.n_v}x{d.n_h}x{d.bands})"


def constant_cube(dims: CubeDims, value: float) -> HsCube:
    if not np.isfinite(value):
        raise ValueError("value must be finite")
    return HsCube(dims, np.full(dims.nb, float(value)))


def _check_same(a: HsCube, b: HsCube):
    if a.dims != b.dims:
        raise ShapeError(f"dims mismatch: {a.dims.shape} vs {b.dims.shape}")


def cube_linf_change(a: HsCube, b: HsCube) -> float:
    _check_same(a, b)
    return float(np.max(np.abs(a.data - b.data)))


def cube_l2_change(a: HsCube, b: HsCube) -> float:
    _check_same(a, b)
    return float(np.linalg.norm(a.data - b.data))
