"""Grading-style feature extraction and the diffusion condition vector.

A style feature is a fixed 530-vector:

    [  0:512)  8x8x8 joint RGB histogram, L1-normalized
    [512:518)  Lab mean (L, a, b) then Lab std (L, a, b), sRGB/D65
    [518:530)  mean RGB over a 2x2 spatial grid, quadrants in row-major
               order (top-left, top-right, bottom-left, bottom-right)

Frames are bilinearly resized to 256x256 before extraction so features are
comparable across resolutions. Extraction is deterministic and pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .frames import Frame

FEATURE_DIM = 530
HIST_SLICE = slice(0, 512)
LAB_SLICE = slice(512, 518)
GRID_SLICE = slice(518, 530)
_CANONICAL_SIZE = 256

# sRGB -> XYZ (D65), Bruce Lindbloom's full-precision matrix.
_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_D65_WHITE = np.array([0.95047, 1.0, 1.08883])
_LAB_EPS = (6.0 / 29.0) ** 3
_LAB_SLOPE = 1.0 / (3.0 * (6.0 / 29.0) ** 2)


@dataclass(eq=False)
class StyleFeature:
    """Fixed-length grading-style descriptor (layout in module docstring)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if v.shape != (FEATURE_DIM,):
            raise InvalidArgumentError(f"style feature must have {FEATURE_DIM} values")
        if not np.isfinite(v).all():
            raise InvalidArgumentError("style feature values must be finite")
        hist = v[HIST_SLICE]
        if (hist < 0).any() or abs(float(hist.sum()) - 1.0) > 1e-6:
            raise InvalidArgumentError("histogram segment must be nonnegative and sum to 1")
        self.values = v

    @property
    def histogram(self) -> np.ndarray:
        return self.values[HIST_SLICE]

    @property
    def lab_stats(self) -> np.ndarray:
        return self.values[LAB_SLICE]

    @property
    def grid_means(self) -> np.ndarray:
        return self.values[GRID_SLICE]


@dataclass(eq=False)
class ConditionVector:
    """Reference-minus-input style difference steering LUT generation."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if v.ndim != 1 or v.size == 0:
            raise InvalidArgumentError("condition vector must be a non-empty 1-D array")
        if not np.isfinite(v).all():
            raise InvalidArgumentError("condition vector values must be finite")
        self.values = v

    @property
    def dim(self) -> int:
        return self.values.size


def resize_bilinear(pixels: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Half-pixel-center bilinear resize, edge-clamped, float32 out."""
    src = np.asarray(pixels, dtype=np.float64)
    h, w = src.shape[:2]

    def axis_coords(n_src: int, n_dst: int):
        centers = (np.arange(n_dst, dtype=np.float64) + 0.5) * (n_src / n_dst) - 0.5
        i0 = np.floor(centers)
        frac = centers - i0
        i0 = np.clip(i0, 0, n_src - 1).astype(np.int64)
        i1 = np.clip(i0 + 1, 0, n_src - 1)
        return i0, i1, frac

    y0, y1, fy = axis_coords(h, out_h)
    x0, x1, fx = axis_coords(w, out_w)
    top = src[y0][:, x0] + (src[y0][:, x1] - src[y0][:, x0]) * fx[None, :, None]
    bot = src[y1][:, x0] + (src[y1][:, x1] - src[y1][:, x0]) * fx[None, :, None]
    out = top + (bot - top) * fy[:, None, None]
    return out.astype(np.float32)


def srgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    """sRGB in [0, 1] to CIE Lab under D65 (same leading shape, float64)."""
    c = np.asarray(rgb, dtype=np.float64)
    lin = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = lin @ _SRGB_TO_XYZ.T
    ratio = xyz / _D65_WHITE
    f = np.where(ratio > _LAB_EPS, np.cbrt(ratio), ratio * _LAB_SLOPE + 4.0 / 29.0)
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    lab = np.stack([116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)], axis=-1)
    return lab


def extract_style_feature(frame: Frame) -> StyleFeature:
    """Deterministic 530-vector of color statistics for one frame."""
    px = frame.pixels
    if px.shape[:2] != (_CANONICAL_SIZE, _CANONICAL_SIZE):
        px = resize_bilinear(px, _CANONICAL_SIZE, _CANONICAL_SIZE)
    flat = px.reshape(-1, 3).astype(np.float64)

    bins = np.minimum((flat * 8.0).astype(np.int64), 7)
    idx = (bins[:, 0] * 8 + bins[:, 1]) * 8 + bins[:, 2]
    hist = np.bincount(idx, minlength=512).astype(np.float64) / flat.shape[0]

    lab = srgb_to_lab(flat)
    lab_stats = np.concatenate([lab.mean(axis=0), lab.std(axis=0)])

    half = _CANONICAL_SIZE // 2
    grid = []
    for ys in (slice(0, half), slice(half, None)):
        for xs in (slice(0, half), slice(half, None)):
            grid.append(px[ys, xs].reshape(-1, 3).astype(np.float64).mean(axis=0))
    grid_means = np.concatenate(grid)

    return StyleFeature(np.concatenate([hist, lab_stats, grid_means]))


def condition_vector(reference_feat: StyleFeature, input_feat: StyleFeature) -> ConditionVector:
    """Componentwise reference minus input (antisymmetric by construction)."""
    if reference_feat.values.shape != input_feat.values.shape:
        raise InvalidArgumentError(
            f"feature dimensions differ: {reference_feat.values.shape} vs "
            f"{input_feat.values.shape}"
        )
    return ConditionVector(reference_feat.values - input_feat.values)


def style_distance(a: StyleFeature, b: StyleFeature) -> float:
    """L2 distance between two style features."""
    return float(np.linalg.norm(a.values - b.values))
