"""Conditional denoising diffusion over LUT offset images."""

from .checkpoint import load_checkpoint, save_checkpoint
from .model import DenoiserConfig, DenoiserParams, GradingDenoiser, denoiser_predict
from .sample import DEFAULT_SAMPLE_STEPS, ddim_sample, ddim_step_indices, generate_lut
from .schedule import (
    DEFAULT_BETA_END,
    DEFAULT_BETA_START,
    DEFAULT_STEPS,
    NoiseSchedule,
    forward_diffuse,
    make_schedule,
)
from .train import TrainConfig, TrainingSample, train, write_loss_trace

__all__ = [
    "DEFAULT_BETA_END",
    "DEFAULT_BETA_START",
    "DEFAULT_SAMPLE_STEPS",
    "DEFAULT_STEPS",
    "DenoiserConfig",
    "DenoiserParams",
    "GradingDenoiser",
    "NoiseSchedule",
    "TrainConfig",
    "TrainingSample",
    "ddim_sample",
    "ddim_step_indices",
    "denoiser_predict",
    "forward_diffuse",
    "generate_lut",
    "load_checkpoint",
    "make_schedule",
    "save_checkpoint",
    "train",
    "write_loss_trace",
]
