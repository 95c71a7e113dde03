"""Mutable per-user grading state: the LUT stack, feedback history, status.

Graded frames are always derived by pushing the *original* input frames
through the composed LUT stack, so undo is exact and repeated retouching
never re-quantizes already-graded pixels.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .errors import InvalidArgumentError
from .frames import Frame, KeyFramePair, VideoClip
from .lut import Lut3D, apply_lut, apply_lut_clip, compose_luts

STATUS_CREATED = "created"
STATUS_LOADED = "loaded"
STATUS_GRADED = "graded"
STATUS_ERROR = "error"

SOURCE_GENERATED = "generated"
SOURCE_CATALOG = "catalog"


@dataclass(eq=False)
class StackEntry:
    source: str  # "generated" or a catalog entry
    name: str
    lut: Lut3D


@dataclass(eq=False)
class FeedbackRecord:
    prompt: str
    matched: str
    similarity: float
    runner_up: Optional[str]
    runner_up_similarity: Optional[float]
    timestamp: float = field(default_factory=time.time)


@dataclass(eq=False)
class GradingSession:
    id: str
    status: str = STATUS_CREATED
    input_clip: Optional[VideoClip] = None
    reference_clip: Optional[VideoClip] = None
    key_pair: Optional[KeyFramePair] = None
    lut_stack: list[StackEntry] = field(default_factory=list)
    history: list[FeedbackRecord] = field(default_factory=list)
    seed: int = 0
    revision: int = 0

    def check(self) -> None:
        """Enforce the session invariants after any mutation."""
        if (len(self.lut_stack) > 0) != (self.status == STATUS_GRADED):
            raise InvalidArgumentError(
                f"stack length {len(self.lut_stack)} inconsistent with status "
                f"{self.status!r}"
            )
        catalog_entries = sum(1 for e in self.lut_stack if e.source == SOURCE_CATALOG)
        if catalog_entries != len(self.history):
            raise InvalidArgumentError(
                f"{catalog_entries} catalog stack entries but "
                f"{len(self.history)} history records"
            )

    def current_lut(self) -> Lut3D:
        """Left-fold composition of the stack."""
        if not self.lut_stack:
            raise InvalidArgumentError("session has no graded state yet")
        lut = self.lut_stack[0].lut
        for entry in self.lut_stack[1:]:
            lut = compose_luts(lut, entry.lut)
        return lut

    def graded_frame(self, index: int) -> Frame:
        if self.input_clip is None:
            raise InvalidArgumentError("session has no input clip")
        if not 0 <= index < len(self.input_clip):
            raise InvalidArgumentError(
                f"frame index {index} outside [0, {len(self.input_clip)})"
            )
        return apply_lut(self.current_lut(), self.input_clip.frames[index])

    def graded_clip(self, workers: Optional[int] = None) -> VideoClip:
        if self.input_clip is None:
            raise InvalidArgumentError("session has no input clip")
        return apply_lut_clip(self.current_lut(), self.input_clip, workers=workers)

    def set_graded(self, generated: Lut3D, key_pair: KeyFramePair) -> None:
        self.key_pair = key_pair
        self.lut_stack = [StackEntry(SOURCE_GENERATED, "generated", generated)]
        self.history = []
        self.status = STATUS_GRADED
        self.revision += 1
        self.check()

    def undo(self, to_index: int) -> None:
        """Keep only the first ``to_index`` feedbacks (0 = generated LUT only)."""
        if self.status != STATUS_GRADED:
            raise InvalidArgumentError("cannot undo before grading")
        if not 0 <= to_index <= len(self.history):
            raise InvalidArgumentError(
                f"undo index {to_index} outside [0, {len(self.history)}]"
            )
        self.lut_stack = self.lut_stack[: 1 + to_index]
        self.history = self.history[:to_index]
        self.revision += 1
        self.check()
