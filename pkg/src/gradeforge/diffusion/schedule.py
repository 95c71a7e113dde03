"""Noise schedule and the forward diffusion (q-sample) map.

Steps are 1-based: step k uses ``betas[k-1]`` / ``alpha_bars[k-1]``.
Defaults are a linear beta ramp 1e-4..0.02 over 1000 steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError

DEFAULT_STEPS = 1000
DEFAULT_BETA_START = 1e-4
DEFAULT_BETA_END = 0.02


@dataclass(eq=False)
class NoiseSchedule:
    betas: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.betas, dtype=np.float64).ravel()
        if b.size < 1:
            raise InvalidArgumentError("schedule needs at least one step")
        if not ((b > 0.0).all() and (b < 1.0).all()):
            raise InvalidArgumentError("betas must lie strictly inside (0, 1)")
        self.betas = b
        self.alphas = 1.0 - b
        self.alpha_bars = np.cumprod(self.alphas)

    @property
    def steps(self) -> int:
        return self.betas.size

    def alpha_bar(self, k: int) -> float:
        """Cumulative alpha product at 1-based step ``k``."""
        if not 1 <= k <= self.steps:
            raise InvalidArgumentError(f"step {k} outside [1, {self.steps}]")
        return float(self.alpha_bars[k - 1])


def make_schedule(
    steps: int = DEFAULT_STEPS,
    beta_start: float = DEFAULT_BETA_START,
    beta_end: float = DEFAULT_BETA_END,
) -> NoiseSchedule:
    """Linear beta schedule over ``steps`` training steps."""
    if steps < 1:
        raise InvalidArgumentError(f"steps must be >= 1, got {steps}")
    if not (0.0 < beta_start <= beta_end < 1.0):
        raise InvalidArgumentError(
            f"need 0 < beta_start <= beta_end < 1, got ({beta_start}, {beta_end})"
        )
    if steps == 1:
        betas = np.array([beta_start], dtype=np.float64)
    else:
        betas = np.linspace(beta_start, beta_end, steps, dtype=np.float64)
    return NoiseSchedule(betas)


def forward_diffuse(x0: np.ndarray, k: int, eps: np.ndarray, sched: NoiseSchedule) -> np.ndarray:
    """q-sample: sqrt(abar_k) * x0 + sqrt(1 - abar_k) * eps."""
    x0 = np.asarray(x0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if x0.shape != eps.shape:
        raise InvalidArgumentError(f"shape mismatch: {x0.shape} vs {eps.shape}")
    abar = sched.alpha_bar(k)
    return np.sqrt(abar) * x0 + np.sqrt(1.0 - abar) * eps
