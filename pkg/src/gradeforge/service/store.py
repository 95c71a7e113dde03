"""Disk persistence for grading sessions.

Authoritative state is ``state.json`` plus the uploaded frame directories and
the LUT stack saved as lossless ``.npz`` offsets; graded frames are derived
data and are never persisted. Writes are atomic (tmp + rename), so a restart
on the same store reproduces every session exactly.
"""

from __future__ import annotations

import json
import secrets
import shutil
from dataclasses import asdict
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import InvalidArgumentError
from ..frames import Frame, KeyFramePair, VideoClip, load_clip, save_clip
from ..lut import Lut3D
from ..session import (
    STATUS_CREATED,
    STATUS_GRADED,
    STATUS_LOADED,
    FeedbackRecord,
    GradingSession,
    StackEntry,
)
from PIL import Image


class UnknownSessionError(InvalidArgumentError):
    """Session id not present in the store."""


class SessionStore:
    def __init__(self, root: str | Path, base_seed: int = 0):
        self.root = Path(root)
        self.base_seed = base_seed
        (self.root / "sessions").mkdir(parents=True, exist_ok=True)

    # -- paths ---------------------------------------------------------------

    def _dir(self, session_id: str) -> Path:
        return self.root / "sessions" / session_id

    def _state_path(self, session_id: str) -> Path:
        return self._dir(session_id) / "state.json"

    def exists(self, session_id: str) -> bool:
        return self._state_path(session_id).exists()

    def ids(self) -> list[str]:
        return sorted(p.name for p in (self.root / "sessions").iterdir() if p.is_dir())

    # -- lifecycle -----------------------------------------------------------

    def create(self) -> GradingSession:
        session_id = secrets.token_hex(8)
        d = self._dir(session_id)
        d.mkdir(parents=True)
        seed = self.base_seed + (int(session_id, 16) % 1_000_000)
        session = GradingSession(id=session_id, seed=seed)
        self.save(session)
        return session

    def save(self, session: GradingSession) -> None:
        d = self._dir(session.id)
        luts_dir = d / "luts"
        if luts_dir.exists():
            shutil.rmtree(luts_dir)
        luts_dir.mkdir()
        stack_meta = []
        for i, entry in enumerate(session.lut_stack):
            fname = f"{i:04d}.npz"
            np.savez(
                luts_dir / fname,
                offsets=entry.lut.offsets,
                domain_min=entry.lut.domain_min,
                domain_max=entry.lut.domain_max,
            )
            stack_meta.append({"source": entry.source, "name": entry.name, "file": fname})

        state = {
            "id": session.id,
            "status": session.status,
            "seed": session.seed,
            "revision": session.revision,
            "key_pair": asdict(session.key_pair) if session.key_pair else None,
            "stack": stack_meta,
            "history": [asdict(h) for h in session.history],
            "input_frames": len(session.input_clip) if session.input_clip else 0,
            "reference_frames": len(session.reference_clip) if session.reference_clip else 0,
            "fps": session.input_clip.fps if session.input_clip else None,
        }
        tmp = self._state_path(session.id).with_suffix(".json.tmp")
        tmp.write_text(json.dumps(state, indent=2) + "\n")
        tmp.replace(self._state_path(session.id))

    def load(self, session_id: str) -> GradingSession:
        """Rehydrate a session including its uploaded clips and LUT stack."""
        if not self.exists(session_id):
            raise UnknownSessionError(f"unknown session {session_id!r}")
        d = self._dir(session_id)
        state = json.loads(self._state_path(session_id).read_text())

        stack = []
        for meta in state["stack"]:
            with np.load(d / "luts" / meta["file"]) as z:
                lut = Lut3D(z["offsets"], z["domain_min"], z["domain_max"])
            stack.append(StackEntry(meta["source"], meta["name"], lut))

        session = GradingSession(
            id=state["id"],
            status=state["status"],
            seed=state["seed"],
            revision=state["revision"],
            key_pair=KeyFramePair(**state["key_pair"]) if state["key_pair"] else None,
            lut_stack=stack,
            history=[FeedbackRecord(**h) for h in state["history"]],
        )
        if (d / "input").is_dir():
            session.input_clip = load_clip(d / "input")
        if (d / "reference").is_dir():
            session.reference_clip = load_clip(d / "reference")
        session.check()
        return session

    # -- uploads -------------------------------------------------------------

    def replace_clip(self, session: GradingSession, kind: str, clip: VideoClip) -> None:
        """Idempotent re-upload: replaces content and resets graded state."""
        if kind not in ("input", "reference"):
            raise InvalidArgumentError(f"unknown clip kind {kind!r}")
        d = self._dir(session.id) / kind
        if d.exists():
            shutil.rmtree(d)
        save_clip(clip, d)
        if kind == "input":
            session.input_clip = clip
        else:
            session.reference_clip = clip
        session.lut_stack = []
        session.history = []
        session.key_pair = None
        session.status = (
            STATUS_LOADED
            if session.input_clip is not None and session.reference_clip is not None
            else STATUS_CREATED
        )
        session.revision += 1
        session.check()
        self.save(session)

    def load_frame(self, session_id: str, kind: str, index: int) -> Frame:
        """Load one stored frame without decoding the whole clip."""
        path = self._dir(session_id) / kind / f"{index + 1:06d}.png"
        if not path.exists():
            raise InvalidArgumentError(f"no {kind} frame {index} in session {session_id}")
        return Frame.from_uint8(np.asarray(Image.open(path).convert("RGB")))
