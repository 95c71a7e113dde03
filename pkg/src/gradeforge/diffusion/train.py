"""Noise-prediction training loop for the LUT denoiser.

All sampling randomness (batch composition, step indices, noise, condition
dropout) is drawn from one numpy generator seeded by the config, so a fixed
seed reproduces the loss trace exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import torch
import torch.nn.functional as F

from ..errors import InvalidArgumentError, TrainingDivergedError
from ..lut import DELTA_IMAGE_SHAPE, identity_image
from .model import DenoiserConfig, DenoiserParams
from .schedule import NoiseSchedule


@dataclass(eq=False)
class TrainingSample:
    """One supervision pair: target offset image and its condition vector."""

    delta_image: np.ndarray
    condition: np.ndarray

    def __post_init__(self):
        img = np.asarray(self.delta_image, dtype=np.float64)
        if img.shape != DELTA_IMAGE_SHAPE:
            raise InvalidArgumentError(
                f"delta image must be {DELTA_IMAGE_SHAPE}, got {img.shape}"
            )
        cond = np.asarray(self.condition, dtype=np.float64).ravel()
        if not (np.isfinite(img).all() and np.isfinite(cond).all()):
            raise InvalidArgumentError("training sample values must be finite")
        self.delta_image = img
        self.condition = cond


@dataclass
class TrainConfig:
    steps: int = 2000
    batch_size: int = 64
    learning_rate: float = 1e-5
    adam_betas: tuple[float, float] = (0.9, 0.999)
    weight_decay: float = 1e-2
    seed: int = 0
    cond_dropout: float = 0.1
    # "cosine" ramps over `warmup_steps` then decays to 10% of the peak;
    # "constant" applies learning_rate throughout.
    lr_schedule: str = "constant"
    warmup_steps: int = 100
    # exponential moving average of the weights used for sampling; 0 disables
    ema_decay: float = 0.0

    def lr_at(self, step: int) -> float:
        if self.lr_schedule == "constant":
            return self.learning_rate
        if self.lr_schedule != "cosine":
            raise InvalidArgumentError(f"unknown lr schedule {self.lr_schedule!r}")
        if step <= self.warmup_steps:
            return self.learning_rate * step / max(1, self.warmup_steps)
        frac = (step - self.warmup_steps) / max(1, self.steps - self.warmup_steps)
        return self.learning_rate * (0.1 + 0.45 * (1.0 + math.cos(math.pi * frac)))


def train(
    samples: Sequence[TrainingSample],
    sched: NoiseSchedule,
    config: TrainConfig,
    params: Optional[DenoiserParams] = None,
    denoiser_config: DenoiserConfig = DenoiserConfig(),
) -> tuple[DenoiserParams, list[tuple[int, float]]]:
    """Minimize the expected squared error between drawn and predicted noise.

    Returns the trained parameters and the per-step loss trace.
    """
    if len(samples) == 0:
        raise InvalidArgumentError("training dataset must be non-empty")
    if denoiser_config.image_size != DELTA_IMAGE_SHAPE[0]:
        raise InvalidArgumentError("denoiser image size must match the delta image size")

    if params is None:
        params = DenoiserParams.init(denoiser_config, seed=config.seed)
    model = params.model
    model.train()

    scale = params.config.delta_scale
    x0 = torch.from_numpy(
        np.stack(
            [(scale * s.delta_image).transpose(2, 0, 1) for s in samples]
        ).astype(np.float32)
    )
    cond_dim = params.config.cond_dim
    conds = np.stack([s.condition for s in samples])
    if conds.shape[1] != cond_dim:
        raise InvalidArgumentError(
            f"condition dim {conds.shape[1]} does not match model dim {cond_dim}"
        )
    conds_t = torch.from_numpy(conds.astype(np.float32))
    ident = torch.from_numpy(
        identity_image().transpose(2, 0, 1).astype(np.float32)
    )[None]

    rng = np.random.default_rng(config.seed)
    opt = torch.optim.AdamW(
        model.parameters(),
        lr=config.learning_rate,
        betas=config.adam_betas,
        weight_decay=config.weight_decay,
    )
    abars = torch.from_numpy(sched.alpha_bars.astype(np.float32))
    n = len(samples)
    trace: list[tuple[int, float]] = []
    ema_state = None
    if config.ema_decay > 0:
        ema_state = {
            k: v.detach().clone() for k, v in model.state_dict().items()
        }

    for step in range(1, config.steps + 1):
        idx = rng.integers(0, n, size=config.batch_size)
        ks = rng.integers(1, sched.steps + 1, size=config.batch_size)
        eps = torch.from_numpy(
            rng.standard_normal((config.batch_size, 3, *DELTA_IMAGE_SHAPE[:2])).astype(
                np.float32
            )
        )
        batch_x0 = x0[idx]
        batch_cond = conds_t[idx].clone()
        if config.cond_dropout > 0:
            drop = rng.random(config.batch_size) < config.cond_dropout
            if drop.any():
                batch_cond[torch.from_numpy(drop)] = 0.0
        ab = abars[ks - 1].reshape(-1, 1, 1, 1)
        xk = torch.sqrt(ab) * batch_x0 + torch.sqrt(1.0 - ab) * eps
        kt = torch.from_numpy(ks.astype(np.int64))

        pred = model(torch.cat([xk, ident.expand(len(idx), -1, -1, -1)], dim=1), batch_cond, kt)
        loss = F.mse_loss(pred, eps)
        loss_val = float(loss.detach())
        if not math.isfinite(loss_val):
            raise TrainingDivergedError(step, idx.tolist(), [v for _, v in trace[-10:]])
        for group in opt.param_groups:
            group["lr"] = config.lr_at(step)
        opt.zero_grad()
        loss.backward()
        opt.step()
        if ema_state is not None:
            with torch.no_grad():
                decay = config.ema_decay
                for name, value in model.state_dict().items():
                    if value.dtype.is_floating_point:
                        ema_state[name].mul_(decay).add_(value, alpha=1.0 - decay)
                    else:
                        ema_state[name].copy_(value)
        trace.append((step, loss_val))

    if ema_state is not None:
        model.load_state_dict(ema_state)
    model.eval()
    return params, trace


def write_loss_trace(path: str | Path, trace: Sequence[tuple[int, float]]) -> None:
    """Persist a loss trace as ``step,loss`` CSV."""
    lines = ["step,loss"]
    lines.extend(f"{step},{value:.8f}" for step, value in trace)
    Path(path).write_text("\n".join(lines) + "\n")
