"""Hyperspectral image restoration with hybrid spatio-spectral total variation.

Constrained denoising and compressed-sensing reconstruction solved by ADMM,
with comparator TV regularizers, noise synthesis and quality metrics.
"""

from .admm import SolverConfig, SolverError, SolveReport, run
from .cube import CubeDims, HsCube, VoxelIndex, constant_cube, linear_index
from .degrade import add_mixed_noise, make_sampling_mask, observe_cs, synthetic_cube
from .linops import SamplingMask, StackedDiffOperator
from .metrics import SsimConfig, psnr, ssim
from .problems import MixedNoiseParams, NOISE_LEVELS, build_cs, build_denoise
from .prox import BoxSpec
from .regularizers import RegKind, RegularizerSpec

__version__ = "0.1.0"

__all__ = [
    "BoxSpec", "CubeDims", "HsCube", "MixedNoiseParams", "NOISE_LEVELS", "RegKind",
    "RegularizerSpec", "SamplingMask", "SolveReport", "SolverConfig", "SolverError",
    "SsimConfig", "StackedDiffOperator", "VoxelIndex", "add_mixed_noise", "build_cs",
    "build_denoise", "constant_cube", "linear_index", "make_sampling_mask", "observe_cs",
    "psnr", "run", "ssim", "synthetic_cube",
]
