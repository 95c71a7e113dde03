"""Config file loading, env overrides, and the offline CLI commands."""

import numpy as np
import pytest

from gradeforge.cli import main
from gradeforge.config import load_config
from gradeforge.errors import InvalidArgumentError


class TestConfig:
    def test_defaults(self):
        cfg = load_config(None)
        assert cfg.schedule.steps == 1000
        assert cfg.training.learning_rate == 1e-5
        assert cfg.catalog.split_ratio == 0.9
        assert cfg.server.port == 8742

    def test_yaml_sections(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(
            "schedule:\n  steps: 100\n"
            "training:\n  batch_size: 8\n  learning_rate: 0.001\n"
            "catalog:\n  split_ratio: 0.8\n"
            "server:\n  port: 9000\n"
        )
        cfg = load_config(path)
        assert cfg.schedule.steps == 100
        assert cfg.training.batch_size == 8
        assert cfg.training.learning_rate == 0.001
        assert cfg.catalog.split_ratio == 0.8
        assert cfg.server.port == 9000

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("training:\n  warp_speed: 9\n")
        with pytest.raises(InvalidArgumentError):
            load_config(path)

    def test_env_overrides(self, tmp_path, monkeypatch):
        monkeypatch.setenv("GRADEFORGE_STORE", "/tmp/other-store")
        monkeypatch.setenv("GRADEFORGE_CHECKPOINT", "/tmp/other.ckpt")
        monkeypatch.setenv("GRADEFORGE_BIND", "0.0.0.0:9999")
        cfg = load_config(None)
        assert cfg.server.store == "/tmp/other-store"
        assert cfg.server.checkpoint == "/tmp/other.ckpt"
        assert cfg.server.host == "0.0.0.0"
        assert cfg.server.port == 9999

    def test_bad_bind_rejected(self, monkeypatch):
        monkeypatch.setenv("GRADEFORGE_BIND", "nonsense")
        with pytest.raises(InvalidArgumentError):
            load_config(None)


class TestCli:
    def test_mix_luts_writes_cubes(self, tmp_path):
        rc = main(
            ["mix-luts", "--count", "3", "--seed", "5", "--out", str(tmp_path / "m")]
        )
        assert rc == 0
        cubes = sorted((tmp_path / "m").glob("*.cube"))
        assert len(cubes) == 3
        from gradeforge.lut import parse_cube

        lut = parse_cube(cubes[0].read_text())
        assert lut.size == 16

    def test_eval_command(self, tmp_path, capsys):
        from gradeforge.frames import save_clip

        from conftest import random_clip

        save_clip(random_clip(0, n=2, h=16, w=16), tmp_path / "out")
        save_clip(random_clip(1, n=2, h=16, w=16), tmp_path / "gt")
        rc = main(
            [
                "eval",
                "--output", str(tmp_path / "out"),
                "--gt", str(tmp_path / "gt"),
                "--csv", str(tmp_path / "report.csv"),
            ]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "psnr_mean" in out
        report = (tmp_path / "report.csv").read_text()
        assert report.count("\n") == 4  # comment + header + 2 frames

    def test_grade_requires_checkpoint(self, tmp_path, capsys):
        from gradeforge.frames import save_clip

        from conftest import random_clip

        save_clip(random_clip(0, n=2, h=16, w=16), tmp_path / "in")
        rc = main(
            ["grade", "--input", str(tmp_path / "in"), "--reference", str(tmp_path / "in")]
        )
        assert rc == 2

    def test_grade_end_to_end_with_untrained_checkpoint(self, tmp_path, capsys):
        from gradeforge.diffusion import DenoiserConfig, DenoiserParams, make_schedule, save_checkpoint
        from gradeforge.frames import load_clip, save_clip

        from conftest import random_clip

        ckpt = tmp_path / "toy.ckpt"
        save_checkpoint(ckpt, DenoiserParams.init(DenoiserConfig(), 0), make_schedule(20, 1e-4, 0.02))
        save_clip(random_clip(0, n=2, h=16, w=16), tmp_path / "in")
        save_clip(random_clip(1, n=1, h=16, w=16), tmp_path / "ref")
        rc = main(
            [
                "grade",
                "--input", str(tmp_path / "in"),
                "--reference", str(tmp_path / "ref"),
                "--checkpoint", str(ckpt),
                "--out-cube", str(tmp_path / "look.cube"),
                "--out-dir", str(tmp_path / "graded"),
                "--steps", "4",
            ]
        )
        assert rc == 0
        assert (tmp_path / "look.cube").exists()
        assert len(load_clip(tmp_path / "graded")) == 2
        assert "key pair" in capsys.readouterr().out

    def test_train_command_minimal(self, tmp_path):
        rc = main(
            [
                "train",
                "--out", str(tmp_path / "t.ckpt"),
                "--steps", "2",
                "--batch-size", "2",
                "--samples", "2",
                "--loss-csv", str(tmp_path / "loss.csv"),
            ]
        )
        assert rc == 0
        assert (tmp_path / "t.ckpt").exists()
        assert (tmp_path / "loss.csv").read_text().startswith("step,loss")
