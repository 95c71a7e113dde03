"""Exception types shared across the gradeforge package."""


class GradeforgeError(Exception):
    """Base class for all gradeforge errors."""


class InvalidArgumentError(GradeforgeError, ValueError):
    """A caller-supplied value violates an operation precondition."""


class UnsupportedSizeError(InvalidArgumentError):
    """Lattice size outside what the operation supports (reshape needs 16)."""


class CubeParseError(GradeforgeError, ValueError):
    """Malformed .cube text. Carries the 1-based offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ClipIOError(GradeforgeError, OSError):
    """Frame directory could not be read or written; names the file."""


class DegenerateEmbeddingError(GradeforgeError, ValueError):
    """A frame embedding had zero norm, so cosine similarity is undefined."""


class InvalidCatalogError(GradeforgeError, ValueError):
    """LUT base catalog unusable (fewer than 2 parseable bases)."""


class UnmatchablePromptError(GradeforgeError, ValueError):
    """Prompt empty or entirely out of vocabulary; no catalog match possible."""


class TrainingDivergedError(GradeforgeError, RuntimeError):
    """Training loss became non-finite. Carries diagnostics."""

    def __init__(self, step: int, batch_ids, loss_tail):
        super().__init__(
            f"non-finite loss at step {step}; batch sample ids {list(batch_ids)}; "
            f"last losses {[round(v, 6) for v in loss_tail]}"
        )
        self.step = step
        self.batch_ids = list(batch_ids)
        self.loss_tail = list(loss_tail)


class CheckpointError(GradeforgeError, ValueError):
    """Checkpoint file missing, corrupt, or of an unsupported version."""
