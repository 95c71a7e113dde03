"""Text-prompt retouching: match an instruction against described LUT presets
and stack the winner onto the current grade.

Prompts and catalog descriptions are embedded as L2-normalized TF-IDF term
vectors scoped to the catalog; matching is cosine similarity with ties broken
by catalog order. The embedder is deliberately simple and deterministic; a
learned text encoder can be swapped in by replacing ``RetouchCatalog``.
"""

from __future__ import annotations

import math
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError, InvalidCatalogError, UnmatchablePromptError
from .lut import Lut3D, parse_cube
from .session import SOURCE_CATALOG, FeedbackRecord, GradingSession, StackEntry

LOW_CONFIDENCE_THRESHOLD = 0.15
_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase, punctuation-stripped whitespace tokens."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(eq=False)
class LutCatalogEntry:
    name: str
    lut: Lut3D
    description: str
    embedding: np.ndarray  # unit-norm TF-IDF vector over the catalog vocabulary

    def __post_init__(self):
        if not self.description.strip():
            raise InvalidCatalogError(f"entry {self.name!r} has an empty description")
        norm = float(np.linalg.norm(self.embedding))
        if abs(norm - 1.0) > 1e-9:
            raise InvalidCatalogError(
                f"entry {self.name!r} embedding norm {norm} is not 1"
            )


@dataclass(frozen=True)
class PromptMatch:
    name: str
    similarity: float
    runner_up: Optional[str]
    runner_up_similarity: Optional[float]
    low_confidence: bool

    def __post_init__(self):
        if self.runner_up_similarity is not None:
            assert self.similarity >= self.runner_up_similarity - 1e-12


class RetouchCatalog:
    """Described LUT presets with a catalog-scoped TF-IDF text index."""

    def __init__(self, records: Sequence[tuple[str, Lut3D, str]],
                 low_confidence: float = LOW_CONFIDENCE_THRESHOLD):
        if not records:
            raise InvalidCatalogError("retouch catalog must be non-empty")
        names = [name for name, _, _ in records]
        if len(set(names)) != len(names):
            raise InvalidCatalogError("catalog names must be unique")
        self.low_confidence = low_confidence

        docs = [tokenize(desc) for _, _, desc in records]
        vocab = sorted({tok for doc in docs for tok in doc})
        self._vocab = {tok: i for i, tok in enumerate(vocab)}
        n_docs = len(docs)
        df = np.zeros(len(vocab))
        for doc in docs:
            for tok in set(doc):
                df[self._vocab[tok]] += 1
        self._idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0

        self.entries: list[LutCatalogEntry] = []
        for (name, lut, desc), doc in zip(records, docs):
            vec = self._raw_embed(doc)
            if vec is None:
                raise InvalidCatalogError(f"description of {name!r} has no tokens")
            self.entries.append(LutCatalogEntry(name, lut, desc, vec))
        self._matrix = np.stack([e.embedding for e in self.entries])

    def _raw_embed(self, tokens: Sequence[str]) -> Optional[np.ndarray]:
        vec = np.zeros(len(self._vocab))
        known = 0
        for tok in tokens:
            i = self._vocab.get(tok)
            if i is not None:
                vec[i] += 1.0
                known += 1
        if known == 0:
            return None
        vec *= self._idf
        return vec / np.linalg.norm(vec)

    def embed_text(self, text: str) -> np.ndarray:
        """Unit-norm TF-IDF vector; out-of-vocabulary tokens are ignored."""
        tokens = tokenize(text)
        if not tokens:
            raise UnmatchablePromptError("prompt is empty after tokenization")
        vec = self._raw_embed(tokens)
        if vec is None:
            raise UnmatchablePromptError(
                f"no prompt token matches the catalog vocabulary: {text!r}"
            )
        return vec

    def match_prompt(self, prompt: str) -> PromptMatch:
        """Best-cosine entry; deterministic tie-break by catalog order."""
        query = self.embed_text(prompt)
        sims = self._matrix @ query
        best = int(np.argmax(sims))
        runner_name = None
        runner_sim = None
        if len(self.entries) > 1:
            order = np.argsort(-sims, kind="stable")
            second = int(order[1]) if int(order[0]) == best else int(order[0])
            runner_name = self.entries[second].name
            runner_sim = float(sims[second])
        sim = float(sims[best])
        return PromptMatch(
            name=self.entries[best].name,
            similarity=sim,
            runner_up=runner_name,
            runner_up_similarity=runner_sim,
            low_confidence=sim < self.low_confidence,
        )

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, name: str) -> LutCatalogEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise InvalidArgumentError(f"no catalog entry named {name!r}")

    @classmethod
    def load(cls, directory: str | Path, **kwargs) -> "RetouchCatalog":
        """Read ``*.cube`` files with their description sidecar."""
        import yaml

        root = Path(directory)
        sidecar = root / "descriptions.yaml"
        if not sidecar.exists():
            raise InvalidCatalogError(f"missing description sidecar {sidecar}")
        raw = yaml.safe_load(sidecar.read_text())
        if not isinstance(raw, list):
            raise InvalidCatalogError("description sidecar must be a list of records")
        records = []
        for rec in raw:
            name = rec.get("name")
            desc = rec.get("description", "")
            cube = root / f"{name}.cube"
            if not cube.exists():
                raise InvalidCatalogError(f"described LUT {name!r} has no cube file")
            records.append((name, parse_cube(cube.read_bytes()), desc))
        return cls(records, **kwargs)


def toy_retouch_catalog(**kwargs) -> RetouchCatalog:
    """Catalog over the bundled parametric bases."""
    from .dataset import make_toy_bases

    return RetouchCatalog(make_toy_bases(), **kwargs)


def apply_feedback(
    session: GradingSession,
    prompt: str,
    catalog: RetouchCatalog,
    timestamp: Optional[float] = None,
) -> PromptMatch:
    """Stack the matched LUT onto the session; unmatched leaves it untouched."""
    if session.status != "graded":
        raise InvalidArgumentError("session must be graded before feedback")
    match = catalog.match_prompt(prompt)  # raises before any mutation
    entry = catalog.get(match.name)
    session.lut_stack.append(StackEntry(SOURCE_CATALOG, entry.name, entry.lut))
    session.history.append(
        FeedbackRecord(
            prompt=prompt,
            matched=match.name,
            similarity=match.similarity,
            runner_up=match.runner_up,
            runner_up_similarity=match.runner_up_similarity,
            timestamp=time.time() if timestamp is None else timestamp,
        )
    )
    session.revision += 1
    session.check()
    return match
