"""Deterministic DDIM sampling and the end-to-end LUT generation entry point."""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from ..errors import InvalidArgumentError
from ..features import condition_vector, extract_style_feature
from ..frames import Frame
from ..lut import DELTA_IMAGE_SHAPE, Lut3D, identity_image, lut_from_delta, unreshape
from .model import DenoiserParams, denoiser_predict
from .schedule import NoiseSchedule

DEFAULT_SAMPLE_STEPS = 25


def ddim_step_indices(total_steps: int, steps: int) -> np.ndarray:
    """Evenly spaced 1-based step subset of length <= ``steps``, ascending."""
    if steps < 1:
        raise InvalidArgumentError(f"steps must be >= 1, got {steps}")
    if steps > total_steps:
        raise InvalidArgumentError(
            f"cannot sample {steps} steps from a {total_steps}-step schedule"
        )
    return np.unique(np.round(np.linspace(1, total_steps, steps)).astype(np.int64))


def ddim_sample(
    cond,
    params: Optional[DenoiserParams],
    sched: NoiseSchedule,
    steps: int = DEFAULT_SAMPLE_STEPS,
    seed: int = 0,
    *,
    init_noise: Optional[np.ndarray] = None,
    predict: Optional[Callable[[np.ndarray, int], np.ndarray]] = None,
    x0_clamp: Optional[float] = None,
) -> np.ndarray:
    """Run the eta=0 DDIM update chain; returns the image-space estimate.

    Fully deterministic given (seed, params). ``predict`` overrides the
    denoiser (used for analytic tests); otherwise ``params`` must be given.
    ``x0_clamp`` bounds the per-step clean-image estimate (the 1/sqrt(abar)
    amplification at high noise levels otherwise lets early prediction error
    blow up the trajectory); None leaves the plain update untouched.
    """
    cond_values = np.asarray(getattr(cond, "values", cond), dtype=np.float64).ravel()
    if predict is None:
        if params is None:
            raise InvalidArgumentError("either params or a predict function is required")
        ident = identity_image()

        def predict(x: np.ndarray, k: int) -> np.ndarray:  # noqa: F811
            return denoiser_predict(x, ident, cond_values, k, params)

    if init_noise is not None:
        x = np.asarray(init_noise, dtype=np.float64)
        if x.shape != DELTA_IMAGE_SHAPE:
            raise InvalidArgumentError(
                f"init noise must be {DELTA_IMAGE_SHAPE}, got {x.shape}"
            )
        x = x.copy()
    else:
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(DELTA_IMAGE_SHAPE)

    taus = ddim_step_indices(sched.steps, steps)
    for i in range(len(taus) - 1, -1, -1):
        k = int(taus[i])
        abar = sched.alpha_bar(k)
        eps = np.asarray(predict(x, k), dtype=np.float64)
        x0 = (x - np.sqrt(1.0 - abar) * eps) / np.sqrt(abar)
        if x0_clamp is not None:
            np.clip(x0, -x0_clamp, x0_clamp, out=x0)
        if i > 0:
            prev = sched.alpha_bar(int(taus[i - 1]))
            x = np.sqrt(prev) * x0 + np.sqrt(1.0 - prev) * eps
        else:
            x = x0
    return x


def generate_lut(
    input_key: Frame,
    reference_key: Frame,
    params: DenoiserParams,
    sched: NoiseSchedule,
    steps: int = DEFAULT_SAMPLE_STEPS,
    seed: int = 0,
) -> Lut3D:
    """Condition on the reference-minus-input style difference, sample, add identity.

    The DDIM chain runs in the network's scaled units; the sampled image is
    divided by ``delta_scale`` to recover offset units before the identity
    lattice is added.
    """
    cond = condition_vector(
        extract_style_feature(reference_key), extract_style_feature(input_key)
    )
    img = ddim_sample(
        cond, params, sched, steps=steps, seed=seed, x0_clamp=params.config.x0_clamp
    )
    return lut_from_delta(unreshape(img / params.config.delta_scale))
