"""Binary cube / mask formats, CSV emission and RGB export.

HSC1 cube file::

    b"HSC1" | uint32 n_v | uint32 n_h | uint32 bands | float32[NB]

HSM1 mask file::

    b"HSM1" | uint32 n_v | uint32 n_h | uint32 bands | uint64 M | uint64[M]

All integers and floats are little-endian; cube values follow the
column-stacked order and mask indices are 1-based and strictly increasing.
Every writer goes through a temporary file and an atomic rename.
"""

from __future__ import annotations

import contextlib
import csv
import io
import json
import math
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .cube import CubeDims, HsCube

HSC_MAGIC = b"HSC1"
HSM_MAGIC = b"HSM1"
_DIMS = struct.Struct("<4sIII")
_COUNT = struct.Struct("<Q")


class FormatError(ValueError):
    """Malformed or inconsistent input file."""


@contextlib.contextmanager
def atomic_open(path, mode="wb"):
    """Write to a sibling temp file and rename over ``path`` on success."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        newline = "" if "b" not in mode else None
        with os.fdopen(fd, mode, newline=newline) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def encode_cube(cube: HsCube) -> bytes:
    d = cube.dims
    payload = cube.data.astype("<f4")
    if not np.all(np.isfinite(payload)):
        raise FormatError("cube values overflow float32")
    return _DIMS.pack(HSC_MAGIC, d.n_v, d.n_h, d.bands) + payload.tobytes()


def decode_cube(buf: bytes) -> HsCube:
    if len(buf) < _DIMS.size:
        raise FormatError("truncated HSC header")
    magic, n_v, n_h, bands = _DIMS.unpack_from(buf)
    if magic != HSC_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {HSC_MAGIC!r}")
    try:
        dims = CubeDims(n_v, n_h, bands)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    if len(buf) != _DIMS.size + 4 * dims.nb:
        raise FormatError(f"payload is {len(buf) - _DIMS.size} bytes, expected {4 * dims.nb}")
    data = np.frombuffer(buf, dtype="<f4", offset=_DIMS.size)
    if not np.all(np.isfinite(data)):
        raise FormatError("non-finite values in cube payload")
    return HsCube(dims, data.astype(np.float64))


def write_cube(path, cube: HsCube):
    with atomic_open(path) as fh:
        fh.write(encode_cube(cube))


def read_cube(path) -> HsCube:
    return decode_cube(Path(path).read_bytes())


def encode_mask(dims: CubeDims, kept) -> bytes:
    """``kept`` are 1-based linear indices (may be empty)."""
    kept = np.asarray(kept, dtype=np.int64).reshape(-1)
    if kept.size and (kept[0] < 1 or kept[-1] > dims.nb or np.any(np.diff(kept) <= 0)):
        raise FormatError("mask indices must be strictly increasing within 1..NB")
    head = _DIMS.pack(HSM_MAGIC, dims.n_v, dims.n_h, dims.bands) + _COUNT.pack(kept.size)
    return head + kept.astype("<u8").tobytes()


def decode_mask(buf: bytes) -> tuple[CubeDims, np.ndarray]:
    off = _DIMS.size + _COUNT.size
    if len(buf) < off:
        raise FormatError("truncated HSM header")
    magic, n_v, n_h, bands = _DIMS.unpack_from(buf)
    if magic != HSM_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {HSM_MAGIC!r}")
    try:
        dims = CubeDims(n_v, n_h, bands)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    (count,) = _COUNT.unpack_from(buf, _DIMS.size)
    if len(buf) != off + 8 * count:
        raise FormatError(f"mask payload is {len(buf) - off} bytes, expected {8 * count}")
    kept = np.frombuffer(buf, dtype="<u8", offset=off).astype(np.int64)
    if kept.size and (kept[0] < 1 or kept[-1] > dims.nb or np.any(np.diff(kept) <= 0)):
        raise FormatError("mask indices must be strictly increasing within 1..NB")
    return dims, kept


def write_mask(path, dims: CubeDims, kept):
    with atomic_open(path) as fh:
        fh.write(encode_mask(dims, kept))


def read_mask(path) -> tuple[CubeDims, np.ndarray]:
    return decode_mask(Path(path).read_bytes())


def write_vector(path, values):
    """Store a length-``M`` measurement vector as an ``M x 1 x 1`` cube."""
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    write_cube(path, HsCube(CubeDims(values.size, 1, 1), values))


def read_vector(path) -> np.ndarray:
    return read_cube(path).data.copy()


_LAYOUTS = ("column-stacked", "band-sequential-row-major", "band-interleaved-by-pixel")


def import_raw(raw_path, header_path) -> HsCube:
    """Read a headerless raw array described by a JSON sidecar.

    The sidecar holds ``n_v``, ``n_h``, ``bands`` and optionally ``dtype``
    (NumPy dtype string, default ``"<f4"``), ``layout`` (one of
    ``column-stacked``, ``band-sequential-row-major``,
    ``band-interleaved-by-pixel``), and ``scale`` (values are divided by it).
    """
    hdr = json.loads(Path(header_path).read_text())
    try:
        dims = CubeDims(hdr["n_v"], hdr["n_h"], hdr["bands"])
    except KeyError as exc:
        raise FormatError(f"sidecar header lacks {exc}") from exc
    layout = hdr.get("layout", "column-stacked")
    if layout not in _LAYOUTS:
        raise FormatError(f"unknown layout {layout!r}")
    raw = np.fromfile(raw_path, dtype=np.dtype(hdr.get("dtype", "<f4")))
    if raw.size != dims.nb:
        raise FormatError(f"raw file holds {raw.size} values, header implies {dims.nb}")
    raw = raw.astype(np.float64) / float(hdr.get("scale", 1.0))
    if layout == "column-stacked":
        return HsCube(dims, raw)
    if layout == "band-sequential-row-major":
        arr = raw.reshape(dims.bands, dims.n_v, dims.n_h).transpose(1, 2, 0)
    else:
        arr = raw.reshape(dims.n_v, dims.n_h, dims.bands)
    return HsCube.from_array(arr)


def fmt_float(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    with atomic_open(path, "w") as fh:
        fh.write(csv_text(header, rows))


def write_json(path, obj):
    with atomic_open(path, "w") as fh:
        json.dump(obj, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def rgb_image(cube: HsCube, bands=(8, 16, 32)) -> np.ndarray:
    """8-bit ``(n_v, n_h, 3)`` image from three 1-based band indices.

    Each band is clamped to ``[0, 1]`` before quantization.
    """
    for b in bands:
        if not 1 <= b <= cube.dims.bands:
            raise IndexError(f"band {b} outside 1..{cube.dims.bands}")
    arr = cube.array[:, :, [b - 1 for b in bands]]
    return np.round(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)


def export_rgb(path, cube: HsCube, bands=(8, 16, 32)):
    from PIL import Image

    img = Image.fromarray(rgb_image(cube, bands))
    with atomic_open(path) as fh:
        img.save(fh, format="PNG")
