"""Evaluation metrics: PSNR, SSIM, no-reference blur, and clip reports.

Luma for SSIM and blur uses Rec.709 weights on the stored [0, 1] values.
The blur metric direction is higher = blurrier (stated in report output).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import correlate1d

from .errors import InvalidArgumentError
from .frames import Frame, VideoClip

LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])
PSNR_CAP_DB = 99.0
_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03
_BLUR_TAPS = 9


def luma(frame: Frame) -> np.ndarray:
    """(H, W) float64 Rec.709 luma."""
    return frame.pixels.astype(np.float64) @ LUMA_WEIGHTS


def _check_same_dims(a: Frame, b: Frame) -> None:
    if a.pixels.shape != b.pixels.shape:
        raise InvalidArgumentError(
            f"frame dimensions differ: {a.pixels.shape} vs {b.pixels.shape}"
        )


def psnr(a: Frame, b: Frame) -> float:
    """10*log10(1/MSE) over all channels; identical frames cap at 99 dB."""
    _check_same_dims(a, b)
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP_DB
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_taps(n: int, sigma: float) -> np.ndarray:
    x = np.arange(n, dtype=np.float64) - (n - 1) / 2.0
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def _valid_sep_filter(img: np.ndarray, taps: np.ndarray) -> np.ndarray:
    half = len(taps) // 2
    out = correlate1d(img, taps, axis=0, mode="constant")
    out = correlate1d(out, taps, axis=1, mode="constant")
    return out[half:-half, half:-half]


def ssim(a: Frame, b: Frame) -> float:
    """Single-scale SSIM on luma: 11x11 Gaussian window, sigma 1.5, L=1."""
    _check_same_dims(a, b)
    if min(a.pixels.shape[:2]) < _SSIM_WINDOW:
        raise InvalidArgumentError(
            f"frames must be at least {_SSIM_WINDOW} pixels per side for SSIM"
        )
    x = luma(a)
    y = luma(b)
    taps = _gaussian_taps(_SSIM_WINDOW, _SSIM_SIGMA)
    mu_x = _valid_sep_filter(x, taps)
    mu_y = _valid_sep_filter(y, taps)
    xx = _valid_sep_filter(x * x, taps)
    yy = _valid_sep_filter(y * y, taps)
    xy = _valid_sep_filter(x * y, taps)
    var_x = xx - mu_x * mu_x
    var_y = yy - mu_y * mu_y
    cov = xy - mu_x * mu_y
    c1 = _SSIM_K1**2
    c2 = _SSIM_K2**2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def blur_metric(f: Frame) -> float:
    """No-reference blur estimate in [0, 1]; higher = blurrier.

    Re-blurs luma with a 9-tap uniform filter (edge-replicated) per
    direction and measures how little the absolute neighbor differences
    degrade; a constant image returns 0 by convention.
    """
    if min(f.pixels.shape[:2]) < _BLUR_TAPS:
        raise InvalidArgumentError(
            f"frame must be at least {_BLUR_TAPS} pixels per side for the blur metric"
        )
    y = luma(f)
    taps = np.full(_BLUR_TAPS, 1.0 / _BLUR_TAPS)

    def directional(axis: int) -> float:
        blurred = correlate1d(y, taps, axis=axis, mode="nearest")
        d_src = np.abs(np.diff(y, axis=axis))
        d_blur = np.abs(np.diff(blurred, axis=axis))
        kept = np.maximum(0.0, d_src - d_blur)
        s_src = float(d_src.sum())
        if s_src == 0.0:
            return 0.0
        return (s_src - float(kept.sum())) / s_src

    return max(directional(0), directional(1))


@dataclass
class ClipReport:
    """Per-frame metric lists with aggregates and grading wall-clock time."""

    psnr_values: list[float]
    ssim_values: list[float]
    blur_values: list[float]
    elapsed_seconds: float
    stats: dict = field(init=False)

    def __post_init__(self):
        n = len(self.psnr_values)
        if not (n == len(self.ssim_values) == len(self.blur_values)) or n == 0:
            raise InvalidArgumentError("per-frame metric lists must share a nonzero length")
        self.stats = {}
        for name, vals in (
            ("psnr", self.psnr_values),
            ("ssim", self.ssim_values),
            ("blur", self.blur_values),
        ):
            mean = math.fsum(vals) / n
            var = math.fsum((v - mean) ** 2 for v in vals) / n
            self.stats[f"{name}_mean"] = mean
            self.stats[f"{name}_std"] = math.sqrt(var)
        self.stats["elapsed_seconds"] = self.elapsed_seconds
        self.stats["frames"] = n

    def to_csv(self) -> str:
        # lpips/brisque columns are reserved for externally computed values.
        lines = [
            "# blur direction: higher = blurrier",
            "frame,psnr_db,ssim,blur,lpips,brisque",
        ]
        for i, (p, s, b) in enumerate(
            zip(self.psnr_values, self.ssim_values, self.blur_values)
        ):
            lines.append(f"{i},{p:.6f},{s:.6f},{b:.6f},,")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return dict(self.stats)


def evaluate_clip(output: VideoClip, gt: VideoClip, elapsed: float = 0.0) -> ClipReport:
    """Per-frame PSNR/SSIM against ground truth plus blur of the output."""
    if len(output) != len(gt):
        raise InvalidArgumentError(
            f"clip lengths differ: {len(output)} vs {len(gt)}"
        )
    psnrs, ssims, blurs = [], [], []
    for out_f, gt_f in zip(output.frames, gt.frames):
        psnrs.append(psnr(out_f, gt_f))
        ssims.append(ssim(out_f, gt_f))
        blurs.append(blur_metric(out_f))
    return ClipReport(psnrs, ssims, blurs, elapsed_seconds=elapsed)
