"""PSNR, SSIM and the 1-D response profiles used to compare restorations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cube import HsCube, ShapeError


@dataclass(frozen=True)
class SsimConfig:
    """Patch geometry and stabilizers; defaults assume unit dynamic range."""

    window: int = 8
    stride: int = 1
    c1: float = 0.01**2
    c2: float = 0.03**2

    def __post_init__(self):
        if self.window < 2:
            raise ValueError("window must be at least 2")
        if self.stride < 1:
            raise ValueError("stride must be at least 1")
        if not (self.c1 > 0 and self.c2 > 0):
            raise ValueError("C1 and C2 must be positive")


@dataclass
class MetricsReport:
    psnr: float
    ssim: float
    band_psnr: list = field(default_factory=list)
    band_ssim: list = field(default_factory=list)


def _pair(u: HsCube, ref: HsCube):
    if u.dims != ref.dims:
        raise ShapeError(f"dims mismatch: {u.dims.shape} vs {ref.dims.shape}")
    return u.array, ref.array


def _psnr(count: int, sq_err: float) -> float:
    if sq_err == 0:
        return math.inf
    return 10.0 * math.log10(count / sq_err)


def psnr(u: HsCube, ref: HsCube) -> float:
    """``10 log10(NB / ||u - ref||^2)`` in dB; ``inf`` for identical cubes."""
    a, b = _pair(u, ref)
    return _psnr(a.size, float(np.sum((a - b) ** 2)))


def _box_sums(img: np.ndarray, w: int, stride: int) -> np.ndarray:
    ii = np.zeros((img.shape[0] + 1, img.shape[1] + 1))
    ii[1:, 1:] = np.cumsum(np.cumsum(img, axis=0), axis=1)
    s = ii[w:, w:] - ii[:-w, w:] - ii[w:, :-w] + ii[:-w, :-w]
    return s[::stride, ::stride]


def ssim_map(x: np.ndarray, y: np.ndarray, cfg: SsimConfig = SsimConfig()) -> np.ndarray:
    """Per-patch SSIM of two 2-D images over all ``window x window`` patches.

    Patch variances and covariance use the unbiased ``1/(n-1)`` estimator.
    """
    w = cfg.window
    if w > min(x.shape):
        raise ShapeError(f"window {w} exceeds image size {x.shape}")
    n = w * w
    sx, sy = _box_sums(x, w, cfg.stride), _box_sums(y, w, cfg.stride)
    sxx = _box_sums(x * x, w, cfg.stride)
    syy = _box_sums(y * y, w, cfg.stride)
    sxy = _box_sums(x * y, w, cfg.stride)
    mx, my = sx / n, sy / n
    vx = np.maximum(sxx - sx * sx / n, 0.0) / (n - 1)
    vy = np.maximum(syy - sy * sy / n, 0.0) / (n - 1)
    cxy = (sxy - sx * sy / n) / (n - 1)
    num = (2 * mx * my + cfg.c1) * (2 * cxy + cfg.c2)
    den = (mx * mx + my * my + cfg.c1) * (vx + vy + cfg.c2)
    return num / den


def ssim(u: HsCube, ref: HsCube, cfg: SsimConfig = SsimConfig()) -> float:
    """Mean SSIM over the patches of every band, pooled across bands."""
    a, b = _pair(u, ref)
    if np.array_equal(a, b):
        return 1.0
    maps = [ssim_map(a[:, :, k], b[:, :, k], cfg) for k in range(a.shape[2])]
    return float(np.mean(np.stack(maps)))


def bandwise_metrics(u: HsCube, ref: HsCube, cfg: SsimConfig = SsimConfig()):
    """Per-band PSNR (normalized by ``N``) and per-band mean SSIM."""
    a, b = _pair(u, ref)
    n = a.shape[0] * a.shape[1]
    bp, bs = [], []
    for k in range(a.shape[2]):
        x, y = a[:, :, k], b[:, :, k]
        bp.append(_psnr(n, float(np.sum((x - y) ** 2))))
        bs.append(1.0 if np.array_equal(x, y) else float(np.mean(ssim_map(x, y, cfg))))
    return bp, bs


def metrics_report(u: HsCube, ref: HsCube, cfg: SsimConfig = SsimConfig()) -> MetricsReport:
    bp, bs = bandwise_metrics(u, ref, cfg)
    return MetricsReport(psnr(u, ref), ssim(u, ref, cfg), bp, bs)


def spatial_response(u: HsCube, row: int, band: int) -> np.ndarray:
    """Row ``row`` of band ``band`` (both 1-based), length ``n_h``."""
    d = u.dims
    if not (1 <= row <= d.n_v and 1 <= band <= d.bands):
        raise IndexError(f"(row={row}, band={band}) outside {d.shape}")
    return u.array[row - 1, :, band - 1].copy()


def spectral_response(u: HsCube, row: int, col: int) -> np.ndarray:
    """Spectrum at pixel ``(row, col)`` (1-based), length ``bands``."""
    d = u.dims
    if not (1 <= row <= d.n_v and 1 <= col <= d.n_h):
        raise IndexError(f"(row={row}, col={col}) outside {d.shape}")
    return u.array[row - 1, col - 1, :].copy()
