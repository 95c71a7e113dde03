"""gradeforge: reference-based video color grading with explicit 3D LUTs.

A small conditional diffusion model turns a (input, reference) key-frame pair
into an explicit 16^3 LUT that is applied losslessly across all frames;
text-prompt retouching stacks described catalog LUTs on top.
"""

__version__ = "0.1.0"

from .errors import (
    CheckpointError,
    ClipIOError,
    CubeParseError,
    DegenerateEmbeddingError,
    GradeforgeError,
    InvalidArgumentError,
    InvalidCatalogError,
    TrainingDivergedError,
    UnmatchablePromptError,
    UnsupportedSizeError,
)
from .frames import Frame, KeyFramePair, VideoClip, load_clip, save_clip, select_key_frames
from .lut import (
    DeltaLut,
    Lut3D,
    apply_lut,
    apply_lut_clip,
    compose_luts,
    delta_from,
    identity_lut,
    lut_from_delta,
    mix_luts,
    parse_cube,
    reshape_delta,
    unreshape,
    write_cube,
)

__all__ = [
    "CheckpointError",
    "ClipIOError",
    "CubeParseError",
    "DegenerateEmbeddingError",
    "DeltaLut",
    "Frame",
    "GradeforgeError",
    "InvalidArgumentError",
    "InvalidCatalogError",
    "KeyFramePair",
    "Lut3D",
    "TrainingDivergedError",
    "UnmatchablePromptError",
    "UnsupportedSizeError",
    "VideoClip",
    "apply_lut",
    "apply_lut_clip",
    "compose_luts",
    "delta_from",
    "identity_lut",
    "load_clip",
    "lut_from_delta",
    "mix_luts",
    "parse_cube",
    "reshape_delta",
    "save_clip",
    "select_key_frames",
    "unreshape",
    "write_cube",
]
