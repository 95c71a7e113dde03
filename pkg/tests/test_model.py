"""Denoiser network: determinism, zero-parameter behavior, gradient checks,
and checkpoint round trips."""

import numpy as np
import pytest
import torch
import torch.nn.functional as F

from gradeforge.diffusion import (
    DenoiserConfig,
    DenoiserParams,
    denoiser_predict,
    load_checkpoint,
    make_schedule,
    save_checkpoint,
)
from gradeforge.errors import CheckpointError, InvalidArgumentError
from gradeforge.lut import identity_image

SMALL = DenoiserConfig(image_size=16, widths=(8, 16, 24), emb_dim=32)


def small_params(seed=0) -> DenoiserParams:
    return DenoiserParams.init(SMALL, seed=seed)


def small_inputs(seed=1, batch=2, dtype=torch.float32):
    rng = np.random.default_rng(seed)
    x = torch.from_numpy(rng.standard_normal((batch, 6, 16, 16))).to(dtype)
    cond = torch.from_numpy(rng.standard_normal((batch, 530))).to(dtype)
    k = torch.from_numpy(rng.integers(1, 1000, batch))
    return x, cond, k


class TestForward:
    def test_zero_parameters_give_zero_output(self):
        params = small_params()
        with torch.no_grad():
            for p in params.model.parameters():
                p.zero_()
        x, cond, k = small_inputs()
        out = params.model(x, cond, k)
        assert out.shape == (2, 3, 16, 16)
        assert not out.abs().any()

    def test_deterministic_given_seed_and_inputs(self):
        x, cond, k = small_inputs()
        a = small_params(seed=3).model(x, cond, k)
        b = small_params(seed=3).model(x, cond, k)
        assert torch.equal(a, b)

    def test_output_finite(self):
        params = small_params(seed=4)
        x, cond, k = small_inputs(seed=5)
        assert torch.isfinite(params.model(x, cond, k)).all()

    def test_rejects_wrong_channel_count(self):
        params = small_params()
        with pytest.raises(InvalidArgumentError):
            params.model(torch.zeros(1, 4, 16, 16), torch.zeros(1, 530), torch.ones(1).long())

    def test_rejects_wrong_cond_dim(self):
        params = small_params()
        with pytest.raises(InvalidArgumentError):
            params.model(torch.zeros(1, 6, 16, 16), torch.zeros(1, 100), torch.ones(1).long())

    def test_numpy_surface_shape_checks(self):
        params = DenoiserParams.init(DenoiserConfig(), seed=0)
        with pytest.raises(InvalidArgumentError):
            denoiser_predict(
                np.zeros((32, 32, 3)), identity_image(), np.zeros(530), 5, params
            )

    def test_numpy_surface_deterministic(self):
        params = DenoiserParams.init(DenoiserConfig(), seed=0)
        rng = np.random.default_rng(0)
        xk = rng.standard_normal((64, 64, 3))
        cond = rng.standard_normal(530)
        a = denoiser_predict(xk, identity_image(), cond, 10, params)
        b = denoiser_predict(xk, identity_image(), cond, 10, params)
        assert np.array_equal(a, b)
        assert a.shape == (64, 64, 3)
        assert np.isfinite(a).all()


class TestGradients:
    """Analytic (autograd) gradients vs central finite differences in float64."""

    def _loss_fn(self, model, x, cond, k, eps):
        return F.mse_loss(model(x, cond, k), eps)

    def test_matches_finite_differences_per_layer_type(self):
        torch.manual_seed(7)
        params = small_params(seed=7)
        model = params.model.double()
        # zero-initialized heads would zero most gradients; perturb all weights
        with torch.no_grad():
            for p in model.parameters():
                p.add_(0.05 * torch.randn_like(p))

        rng = np.random.default_rng(8)
        x = torch.from_numpy(rng.standard_normal((2, 6, 16, 16)))
        cond = torch.from_numpy(rng.standard_normal((2, 530)))
        k = torch.from_numpy(np.array([17, 900]))
        eps = torch.from_numpy(rng.standard_normal((2, 3, 16, 16)))

        loss = self._loss_fn(model, x, cond, k, eps)
        loss.backward()

        by_type: dict[str, list[torch.Tensor]] = {}
        for module in model.modules():
            type_name = type(module).__name__
            if type_name in ("Conv2d", "Linear", "GroupNorm"):
                for p in module.parameters(recurse=False):
                    by_type.setdefault(type_name, []).append(p)

        assert set(by_type) == {"Conv2d", "Linear", "GroupNorm"}
        h = 1e-4
        for type_name, tensors in by_type.items():
            checked = 0
            worst = 0.0
            while checked < 50:
                t = tensors[int(rng.integers(len(tensors)))]
                flat_idx = int(rng.integers(t.numel()))
                idx = np.unravel_index(flat_idx, t.shape)
                analytic = float(t.grad[idx])
                with torch.no_grad():
                    orig = float(t[idx])
                    t[idx] = orig + h
                    up = float(self._loss_fn(model, x, cond, k, eps))
                    t[idx] = orig - h
                    down = float(self._loss_fn(model, x, cond, k, eps))
                    t[idx] = orig
                fd = (up - down) / (2 * h)
                denom = max(abs(analytic), abs(fd), 1e-6)
                worst = max(worst, abs(analytic - fd) / denom)
                checked += 1
            assert worst < 1e-3, f"{type_name}: worst relative error {worst}"

    def test_loss_is_mean_squared_error(self):
        params = small_params(seed=9)
        x, cond, k = small_inputs(seed=10)
        eps = torch.randn(2, 3, 16, 16)
        with torch.no_grad():
            pred = params.model(x, cond, k)
        loss = F.mse_loss(pred, eps)
        manual = float(((eps - pred) ** 2).sum() / eps.numel())
        assert float(loss) == pytest.approx(manual, rel=1e-6)
        assert float(loss) >= 0.0


class TestCheckpoint:
    def test_roundtrip_bit_identical_predictions(self, tmp_path):
        params = DenoiserParams.init(DenoiserConfig(), seed=11)
        sched = make_schedule(64, 1e-4, 0.02)
        path = tmp_path / "model.ckpt"
        save_checkpoint(path, params, sched)
        loaded, sched2 = load_checkpoint(path)
        assert np.array_equal(sched2.betas, sched.betas)
        assert loaded.config == params.config
        rng = np.random.default_rng(12)
        xk = rng.standard_normal((64, 64, 3))
        cond = rng.standard_normal(530)
        a = denoiser_predict(xk, identity_image(), cond, 3, params)
        b = denoiser_predict(xk, identity_image(), cond, 3, loaded)
        assert np.array_equal(a, b)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "missing.ckpt")

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.ckpt"
        p.write_bytes(b"NOTACKPT" + b"\x00" * 32)
        with pytest.raises(CheckpointError):
            load_checkpoint(p)

    def test_truncated_payload(self, tmp_path):
        params = DenoiserParams.init(SMALL, seed=0)
        sched = make_schedule(8, 1e-4, 0.02)
        p = tmp_path / "model.ckpt"
        save_checkpoint(p, params, sched)
        data = p.read_bytes()
        p.write_bytes(data[: len(data) - 100])
        with pytest.raises(CheckpointError):
            load_checkpoint(p)

    def test_bad_version(self, tmp_path):
        params = DenoiserParams.init(SMALL, seed=0)
        sched = make_schedule(8, 1e-4, 0.02)
        p = tmp_path / "model.ckpt"
        save_checkpoint(p, params, sched)
        data = bytearray(p.read_bytes())
        data[8] = 99
        p.write_bytes(bytes(data))
        with pytest.raises(CheckpointError):
            load_checkpoint(p)
