"""Frames, clips, disk I/O, and key-frame pair selection.

Frames hold float32 RGB in [0, 1], row-major. On disk a clip is a directory
of zero-padded ``%06d.png`` files plus a ``clip.json`` sidecar carrying the
frame rate and frame count.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from PIL import Image

from .errors import ClipIOError, DegenerateEmbeddingError, InvalidArgumentError

SIDECAR_NAME = "clip.json"
_FRAME_NAME_RE = re.compile(r"^\d+$")


@dataclass(eq=False)
class Frame:
    """One RGB image: ``pixels`` is (height, width, 3) float32 in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float32)
        if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] * px.shape[1] == 0:
            raise InvalidArgumentError(f"frame pixels must be (h, w, 3), got {px.shape}")
        # A range check also rejects NaN (fails both comparisons) and +-Inf.
        if not ((px >= 0.0).all() and (px <= 1.0).all()):
            raise InvalidArgumentError("frame pixel values must be finite and in [0, 1]")
        self.pixels = px

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def from_uint8(cls, data: np.ndarray) -> "Frame":
        data = np.asarray(data, dtype=np.uint8)
        return cls(data.astype(np.float32) / np.float32(255.0))

    def to_uint8(self) -> np.ndarray:
        return np.rint(self.pixels * 255.0).astype(np.uint8)

    def same_pixels(self, other: "Frame") -> bool:
        return np.array_equal(self.pixels, other.pixels)


@dataclass(eq=False)
class VideoClip:
    """Ordered frame sequence at a fixed frame rate."""

    frames: list[Frame]
    fps: float = 24.0

    def __post_init__(self):
        if len(self.frames) == 0:
            raise InvalidArgumentError("clip must contain at least one frame")
        if not (self.fps > 0 and math.isfinite(self.fps)):
            raise InvalidArgumentError(f"fps must be positive, got {self.fps}")
        w, h = self.frames[0].width, self.frames[0].height
        for i, f in enumerate(self.frames):
            if f.width != w or f.height != h:
                raise InvalidArgumentError(
                    f"frame {i} is {f.width}x{f.height}, expected {w}x{h}"
                )

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height


@dataclass(frozen=True)
class KeyFramePair:
    """Input/reference indices (0-based) with their embedding cosine."""

    input_index: int
    reference_index: int
    similarity: float


def frame_to_png_bytes(frame: Frame) -> bytes:
    import io

    buf = io.BytesIO()
    Image.fromarray(frame.to_uint8(), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def frame_from_png_bytes(data: bytes) -> Frame:
    import io

    img = Image.open(io.BytesIO(data))
    return Frame.from_uint8(np.asarray(img.convert("RGB")))


def save_clip(clip: VideoClip, path: str | Path) -> None:
    """Write a clip as ``%06d.png`` frames plus the metadata sidecar."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(clip.frames):
        name = root / f"{i + 1:06d}.png"
        try:
            Image.fromarray(frame.to_uint8(), mode="RGB").save(name)
        except OSError as exc:
            raise ClipIOError(f"cannot write frame file {name}: {exc}") from exc
    sidecar = root / SIDECAR_NAME
    sidecar.write_text(
        json.dumps({"fps": clip.fps, "frame_count": len(clip.frames)}, indent=2) + "\n"
    )


def load_clip(path: str | Path, fps: Optional[float] = None) -> VideoClip:
    """Load numbered PNG frames from a directory, ordered by numeric name.

    ``fps`` overrides the sidecar value; without either, 24.0 is assumed.
    """
    root = Path(path)
    if not root.is_dir():
        raise ClipIOError(f"not a directory: {root}")
    numbered: list[tuple[int, Path]] = []
    for p in sorted(root.glob("*.png")):
        if not _FRAME_NAME_RE.match(p.stem):
            raise ClipIOError(f"frame file {p} does not have a numeric name")
        numbered.append((int(p.stem), p))
    if not numbered:
        raise ClipIOError(f"no .png frames found in {root}")
    numbered.sort(key=lambda t: t[0])

    frames: list[Frame] = []
    for _, p in numbered:
        try:
            img = Image.open(p)
            arr = np.asarray(img.convert("RGB"))
        except OSError as exc:
            raise ClipIOError(f"cannot read frame file {p}: {exc}") from exc
        frames.append(Frame.from_uint8(arr))
        if frames[-1].width != frames[0].width or frames[-1].height != frames[0].height:
            raise ClipIOError(
                f"frame file {p} is {frames[-1].width}x{frames[-1].height}, "
                f"expected {frames[0].width}x{frames[0].height}"
            )

    if fps is None:
        sidecar = root / SIDECAR_NAME
        if sidecar.exists():
            meta = json.loads(sidecar.read_text())
            fps = float(meta.get("fps", 24.0))
        else:
            fps = 24.0
    return VideoClip(frames, fps=fps)


def sample_indices(frame_count: int, fps: float, sample_hz: float) -> list[int]:
    """Frame indices sampled at ``sample_hz``; index 0 is always included."""
    if sample_hz <= 0:
        raise InvalidArgumentError(f"sample_hz must be positive, got {sample_hz}")
    step = fps / sample_hz
    out: list[int] = []
    seen = set()
    i = 0
    while True:
        idx = int(round(i * step))
        if idx >= frame_count:
            break
        if idx not in seen:
            seen.add(idx)
            out.append(idx)
        i += 1
        if step <= 0:
            break
    if not out or out[0] != 0:
        out.insert(0, 0)
    return out


def select_key_frames(
    input_clip: VideoClip,
    reference_clip: VideoClip,
    embed: Optional[Callable[[Frame], np.ndarray]] = None,
    sample_hz: float = 1.0,
) -> KeyFramePair:
    """Pick the (input, reference) frame pair with maximal embedding cosine.

    Both clips are sampled at ``sample_hz`` (a single-frame clip contributes
    its only frame). Ties break toward the smallest input index, then the
    smallest reference index.
    """
    if embed is None:
        from .features import extract_style_feature

        embed = lambda fr: extract_style_feature(fr).values  # noqa: E731

    def embeddings(clip: VideoClip, label: str) -> tuple[list[int], np.ndarray]:
        idxs = sample_indices(len(clip), clip.fps, sample_hz)
        vecs = []
        for i in idxs:
            v = np.asarray(embed(clip.frames[i]), dtype=np.float64).ravel()
            norm = float(np.linalg.norm(v))
            if norm == 0.0 or not math.isfinite(norm):
                raise DegenerateEmbeddingError(
                    f"zero-norm embedding for {label} frame {i}"
                )
            vecs.append(v / norm)
        return idxs, np.stack(vecs)

    in_idx, in_vecs = embeddings(input_clip, "input")
    ref_idx, ref_vecs = embeddings(reference_clip, "reference")
    if in_vecs.shape[1] != ref_vecs.shape[1]:
        raise InvalidArgumentError(
            f"embedding dimensions differ: {in_vecs.shape[1]} vs {ref_vecs.shape[1]}"
        )

    sims = in_vecs @ ref_vecs.T
    flat = int(np.argmax(sims))  # row-major argmax = smallest m, then n, on ties
    m, n = divmod(flat, sims.shape[1])
    return KeyFramePair(
        input_index=in_idx[m],
        reference_index=ref_idx[n],
        similarity=float(sims[m, n]),
    )
