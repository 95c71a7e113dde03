"""Synthetic training corpus: LUT base catalogs, mixed-LUT sampling,
(input, graded-reference, target-offset) triples, and a procedural scene
generator so the whole pipeline runs with zero external data.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError, InvalidCatalogError
from .features import condition_vector, extract_style_feature
from .frames import Frame, VideoClip
from .lut import (
    DeltaLut,
    Lut3D,
    apply_lut,
    delta_from,
    identity_table,
    mix_luts,
    parse_cube,
    reshape_delta,
    write_cube,
)

log = logging.getLogger(__name__)

DEFAULT_SPLIT_RATIO = 0.9
EXTRAPOLATION_PROB = 0.3
EXTRAPOLATION_MAX = 1.5
DESCRIPTION_SIDECAR = "descriptions.yaml"


@dataclass(eq=False)
class LutBaseCatalog:
    """Named LUT bases with a disjoint, exhaustive train/test name split."""

    bases: dict[str, Lut3D]
    train_names: list[str]
    test_names: list[str]
    parse_failures: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        names = set(self.bases)
        train, test = set(self.train_names), set(self.test_names)
        if train & test:
            raise InvalidCatalogError(f"split overlaps: {sorted(train & test)}")
        if train | test != names:
            raise InvalidCatalogError("split does not cover the catalog exactly")

    def side(self, name: str) -> list[str]:
        if name == "train":
            return self.train_names
        if name == "test":
            return self.test_names
        raise InvalidArgumentError(f"unknown split side {name!r}")

    def save_split_manifest(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps({"train": self.train_names, "test": self.test_names}, indent=2)
            + "\n"
        )


def catalog_from_luts(
    named: Sequence[tuple[str, Lut3D]],
    split_ratio: float = DEFAULT_SPLIT_RATIO,
    seed: int = 0,
) -> LutBaseCatalog:
    """Split in-memory bases into train/test by a seeded shuffle."""
    if len(named) < 2:
        raise InvalidCatalogError(f"need at least 2 usable bases, got {len(named)}")
    if not 0.0 < split_ratio < 1.0:
        raise InvalidArgumentError(f"split_ratio must be in (0, 1), got {split_ratio}")
    names = [n for n, _ in named]
    if len(set(names)) != len(names):
        raise InvalidCatalogError("base names must be unique")
    order = np.random.default_rng(seed).permutation(len(named))
    shuffled = [names[i] for i in order]
    cut = int(round(split_ratio * len(named)))
    cut = min(max(cut, 1), len(named) - 1)  # both sides non-empty
    return LutBaseCatalog(
        bases=dict(named),
        train_names=shuffled[:cut],
        test_names=shuffled[cut:],
    )


def load_catalog(
    directory: str | Path,
    split_ratio: float = DEFAULT_SPLIT_RATIO,
    seed: int = 0,
) -> LutBaseCatalog:
    """Parse every ``*.cube`` in a directory and split it train/test.

    Unparseable files are reported (logged and kept on the catalog) and
    skipped; fewer than 2 usable bases is an error.
    """
    root = Path(directory)
    named: list[tuple[str, Lut3D]] = []
    failures: list[tuple[str, str]] = []
    for path in sorted(root.glob("*.cube")):
        try:
            named.append((path.stem, parse_cube(path.read_bytes())))
        except Exception as exc:  # noqa: BLE001 - report and continue per file
            failures.append((path.name, str(exc)))
            log.warning("skipping unparseable LUT base %s: %s", path.name, exc)
    if len(named) < 2:
        raise InvalidCatalogError(
            f"need at least 2 usable bases in {root}, got {len(named)} "
            f"(failures: {failures})"
        )
    catalog = catalog_from_luts(named, split_ratio=split_ratio, seed=seed)
    catalog.parse_failures = failures
    return catalog


def synth_random_lut(
    catalog: LutBaseCatalog,
    rng: np.random.Generator,
    side: str = "train",
) -> Lut3D:
    """Mix 2-4 bases with flat-simplex weights; occasionally extrapolate.

    With probability 0.3 one weight is inflated by a factor in [1, 1.5] and
    the rest are rescaled so the weights still sum to 1 (some may then be
    negative).
    """
    names = catalog.side(side)
    if len(names) < 2:
        raise InvalidCatalogError(f"{side} split needs >= 2 bases, got {len(names)}")
    k = int(rng.integers(2, min(4, len(names)) + 1))
    picked = rng.choice(len(names), size=k, replace=False)
    weights = rng.dirichlet(np.ones(k))
    if rng.random() < EXTRAPOLATION_PROB:
        i = int(rng.integers(k))
        lam = float(rng.uniform(1.0, EXTRAPOLATION_MAX))
        if weights[i] < 1.0 - 1e-9:
            inflated = lam * weights[i]
            rest_scale = (1.0 - inflated) / (1.0 - weights[i])
            weights = weights * rest_scale
            weights[i] = inflated
    luts = [catalog.bases[names[j]] for j in picked]
    return mix_luts(luts, list(weights))


@dataclass(eq=False)
class GradingTriple:
    """Ungraded input, graded reference of different content, and the target."""

    input_frame: Frame
    reference_frame: Frame
    target_delta: DeltaLut
    raw_reference: Frame


def make_triple(
    frame_pool: VideoClip | Sequence[Frame],
    lut: Lut3D,
    rng: np.random.Generator,
) -> GradingTriple:
    """Pick two distinct frames from one pool and grade the reference side."""
    frames = frame_pool.frames if isinstance(frame_pool, VideoClip) else list(frame_pool)
    if len(frames) < 2:
        raise InvalidArgumentError(f"frame pool needs >= 2 frames, got {len(frames)}")
    i, j = (int(v) for v in rng.choice(len(frames), size=2, replace=False))
    raw_reference = frames[j]
    return GradingTriple(
        input_frame=frames[i],
        reference_frame=apply_lut(lut, raw_reference),
        target_delta=delta_from(lut),
        raw_reference=raw_reference,
    )


# ---------------------------------------------------------------------------
# Procedural scenes: gradient background, drifting shapes, mild noise.


def synth_scene(
    seed: int | tuple,
    n_frames: int = 4,
    height: int = 256,
    width: int = 256,
    noise: float = 0.01,
    fps: float = 4.0,
) -> VideoClip:
    """Deterministic colorful scene with slow shape drift across frames."""
    rng = np.random.default_rng(seed)
    yy, xx = np.meshgrid(
        np.linspace(0.0, 1.0, height), np.linspace(0.0, 1.0, width), indexing="ij"
    )
    angle = rng.uniform(0.0, 2.0 * math.pi)
    t = (math.cos(angle) * xx + math.sin(angle) * yy + 1.0) / 2.0
    c0 = rng.uniform(0.05, 0.95, 3)
    c1 = rng.uniform(0.05, 0.95, 3)
    background = c0 + t[..., None] * (c1 - c0)

    shapes = []
    for _ in range(4):
        shapes.append(
            {
                "kind": "circle" if rng.random() < 0.5 else "rect",
                "center": rng.uniform(0.15, 0.85, 2),
                "radius": rng.uniform(0.06, 0.2),
                "color": rng.uniform(0.0, 1.0, 3),
                "drift": rng.uniform(-0.03, 0.03, 2),
            }
        )

    frames = []
    for f in range(n_frames):
        canvas = background.copy()
        for s in shapes:
            cy, cx = s["center"] + f * s["drift"]
            if s["kind"] == "circle":
                mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= s["radius"] ** 2
            else:
                r = s["radius"]
                mask = (np.abs(yy - cy) <= r) & (np.abs(xx - cx) <= 1.3 * r)
            canvas[mask] = 0.1 * canvas[mask] + 0.9 * s["color"]
        canvas = canvas + rng.normal(0.0, noise, canvas.shape)
        frames.append(Frame(np.clip(canvas, 0.0, 1.0).astype(np.float32)))
    return VideoClip(frames, fps=fps)


def save_scene_corpus(
    root: str | Path, n_scenes: int, seed: int = 0, **scene_kwargs
) -> None:
    """Write ``<scene>/<frame>.png`` directories for CLI training runs."""
    from .frames import save_clip

    base = Path(root)
    for s in range(n_scenes):
        clip = synth_scene((seed, s), **scene_kwargs)
        save_clip(clip, base / f"scene{s:04d}")


def load_scene_corpus(root: str | Path) -> list[VideoClip]:
    """Load every scene subdirectory of a corpus as a frame pool."""
    from .frames import load_clip

    base = Path(root)
    scenes = [load_clip(p) for p in sorted(base.iterdir()) if p.is_dir()]
    if not scenes:
        raise InvalidArgumentError(f"no scene subdirectories under {base}")
    return scenes


# ---------------------------------------------------------------------------
# Bundled parametric LUT bases (roughly balanced around identity in aggregate)
# and their hand-authored descriptions for the prompt-retouch catalog.


def _rec709_luma(rgb: np.ndarray) -> np.ndarray:
    return rgb @ np.array([0.2126, 0.7152, 0.0722])


def _toy_base_fns() -> list[tuple[str, str, callable]]:
    def warm(c):
        out = c.copy()
        out[..., 0] += 0.09
        out[..., 2] -= 0.07
        return out

    def cool(c):
        out = c.copy()
        out[..., 0] -= 0.07
        out[..., 2] += 0.09
        return out

    def contrast(c):
        return 0.5 + 0.5 * np.tanh(3.0 * (c - 0.5)) / math.tanh(1.5)

    def fade(c):
        return 0.12 + 0.76 * c

    def vivid(c):
        y = _rec709_luma(c)[..., None]
        return y + 1.45 * (c - y)

    def muted(c):
        y = _rec709_luma(c)[..., None]
        return y + 0.55 * (c - y)

    def shadow_lift(c):
        return c + 0.14 * (1.0 - c) ** 2

    def crush(c):
        return c**1.45

    def green(c):
        out = c.copy()
        out[..., 1] += 0.08
        out[..., 0] -= 0.03
        out[..., 2] -= 0.03
        return out

    def magenta(c):
        out = c.copy()
        out[..., 0] += 0.05
        out[..., 2] += 0.05
        out[..., 1] -= 0.06
        return out

    return [
        (
            "warm-amber",
            "Warm amber cast that lifts reds and oranges for a golden sunset "
            "glow, adding cozy warmth to skin tones.",
            warm,
        ),
        (
            "arctic-cool",
            "Cool blue cast that chills the image toward steel and teal for a "
            "cold wintry mood.",
            cool,
        ),
        (
            "punch-contrast",
            "Steep contrast curve with deeper shadows and brighter highlights "
            "for a punchy dramatic look; increases contrast strongly.",
            contrast,
        ),
        (
            "soft-fade",
            "Faded film look with lifted blacks and lowered contrast, a gentle "
            "matte finish.",
            fade,
        ),
        (
            "vivid-pop",
            "Boosts saturation so colors pop with extra vividness and intensity.",
            vivid,
        ),
        (
            "muted-pastel",
            "Desaturates toward muted pastel tones for a subdued, understated "
            "palette.",
            muted,
        ),
        (
            "shadow-lift",
            "Raises shadow brightness to reveal detail in dark regions while "
            "leaving highlights alone.",
            shadow_lift,
        ),
        (
            "noir-crush",
            "Darkens midtones with a gamma crush: moody noir shadows and dense "
            "blacks.",
            crush,
        ),
        (
            "verdant-tint",
            "Adds a green tint reminiscent of verdant foliage grading.",
            green,
        ),
        (
            "rose-magenta",
            "Shifts toward rose magenta hues, a flattering pink cast for dreamy "
            "portraits.",
            magenta,
        ),
    ]


def make_toy_bases(size: int = 16) -> list[tuple[str, Lut3D, str]]:
    """Ten bundled (name, lut, description) bases spanning common looks."""
    coords = identity_table(size).copy()
    out = []
    for name, description, fn in _toy_base_fns():
        table = np.clip(fn(coords), 0.0, 1.0)
        out.append((name, Lut3D.from_table(table), description))
    return out


def toy_catalog(split_ratio: float = 0.8, seed: int = 7) -> LutBaseCatalog:
    """Catalog over the bundled bases (default split: 8 train / 2 test)."""
    named = [(name, lut) for name, lut, _ in make_toy_bases()]
    return catalog_from_luts(named, split_ratio=split_ratio, seed=seed)


def write_toy_catalog(directory: str | Path) -> None:
    """Write the bundled bases as .cube files plus the description sidecar."""
    import yaml

    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    records = []
    for name, lut, description in make_toy_bases():
        (root / f"{name}.cube").write_text(write_cube(lut, title=name))
        records.append({"name": name, "description": description})
    (root / DESCRIPTION_SIDECAR).write_text(
        yaml.safe_dump(records, sort_keys=False, allow_unicode=True)
    )


# ---------------------------------------------------------------------------
# Training sample synthesis (per-sample seeds derived from a root seed so
# sample construction could be parallelized without changing the output).


def make_training_samples(
    catalog: LutBaseCatalog,
    n_samples: int,
    seed: int = 0,
    frames_per_scene: int = 4,
    scene_size: int = 256,
    side: str = "train",
):
    """Build diffusion training samples from procedural scenes.

    Returns a list of TrainingSample (imported lazily to keep this module
    torch-free for light-weight users).
    """
    from .diffusion.train import TrainingSample

    samples = []
    for i in range(n_samples):
        rng = np.random.default_rng((seed, i))
        scene = synth_scene((seed, i, 1), n_frames=frames_per_scene,
                            height=scene_size, width=scene_size)
        lut = synth_random_lut(catalog, rng, side=side)
        triple = make_triple(scene, lut, rng)
        cond = condition_vector(
            extract_style_feature(triple.reference_frame),
            extract_style_feature(triple.input_frame),
        )
        samples.append(TrainingSample(reshape_delta(triple.target_delta), cond.values))
    return samples


def make_eval_pairs(
    catalog: LutBaseCatalog,
    n_pairs: int,
    seed: int = 1000,
    frames_per_scene: int = 4,
    scene_size: int = 256,
    side: str = "test",
) -> list[GradingTriple]:
    """Held-out (input, graded reference) pairs for end-to-end evaluation."""
    out = []
    for i in range(n_pairs):
        rng = np.random.default_rng((seed, i, 2))
        scene = synth_scene((seed, i, 3), n_frames=frames_per_scene,
                            height=scene_size, width=scene_size)
        lut = synth_random_lut(catalog, rng, side=side)
        out.append(make_triple(scene, lut, rng))
    return out
