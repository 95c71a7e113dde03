"""Shared fixtures and independent scalar oracles used across the suite."""

from __future__ import annotations

import numpy as np
import pytest

from gradeforge.frames import Frame, VideoClip
from gradeforge.lut import DeltaLut, Lut3D, identity_table, lut_from_delta


def random_frame(seed: int, h: int = 24, w: int = 32) -> Frame:
    rng = np.random.default_rng(seed)
    return Frame(rng.random((h, w, 3), dtype=np.float32))


def random_clip(seed: int, n: int = 6, h: int = 24, w: int = 32, fps: float = 12.0) -> VideoClip:
    return VideoClip([random_frame((seed, i)) for i in range(n)], fps=fps)


def random_lut_from_table(seed: int, size: int = 16) -> Lut3D:
    """LUT built from a random absolute table (the parser-style constructor)."""
    rng = np.random.default_rng(seed)
    return Lut3D.from_table(rng.random((size, size, size, 3)))


def random_lut_from_offsets(seed: int, size: int = 16, scale: float = 0.2) -> Lut3D:
    """LUT built from random signed offsets (the diffusion-style constructor)."""
    rng = np.random.default_rng(seed)
    offsets = rng.normal(0.0, scale, (size, size, size, 3))
    return lut_from_delta(DeltaLut(offsets))


def invert_lut(size: int = 16) -> Lut3D:
    """Entries are 1 - coordinate: a linear, exactly-interpolated map."""
    return Lut3D.from_table(1.0 - identity_table(size))


def oracle_trilerp(lut: Lut3D, pixel) -> np.ndarray:
    """Scalar-loop trilinear oracle in weighted-corner-sum form.

    Deliberately formulated differently from the production kernel (explicit
    8-corner weight products instead of nested lerps).
    """
    table = lut.table
    n = lut.size
    out = np.zeros(3)
    idx = np.zeros(3, dtype=int)
    frac = np.zeros(3)
    for c in range(3):
        lo = float(lut.domain_min[c])
        hi = float(lut.domain_max[c])
        v = min(max(float(pixel[c]), lo), hi)
        t = (v - lo) / (hi - lo) * (n - 1)
        i = min(int(np.floor(t)), n - 2)
        idx[c] = i
        frac[c] = t - i
    for dr in (0, 1):
        for dg in (0, 1):
            for db in (0, 1):
                w = (
                    (frac[0] if dr else 1.0 - frac[0])
                    * (frac[1] if dg else 1.0 - frac[1])
                    * (frac[2] if db else 1.0 - frac[2])
                )
                corner = table[idx[2] + db, idx[1] + dg, idx[0] + dr]
                out += w * corner
    return np.clip(out, 0.0, 1.0)


@pytest.fixture(scope="session")
def identity16():
    from gradeforge.lut import identity_lut

    return identity_lut(16)
