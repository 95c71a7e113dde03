"""Configuration file (YAML) with schedule, training, catalog, and server
sections, plus environment-variable overrides for deployment knobs.

Environment overrides: GRADEFORGE_STORE (session store path),
GRADEFORGE_CHECKPOINT (model checkpoint path), GRADEFORGE_BIND (host:port).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .errors import InvalidArgumentError


@dataclass
class ScheduleSection:
    steps: int = 1000
    beta_start: float = 1e-4
    beta_end: float = 0.02


@dataclass
class TrainingSection:
    steps: int = 2000
    batch_size: int = 64
    learning_rate: float = 1e-5
    seed: int = 0
    cond_dropout: float = 0.1
    samples: int = 500
    sample_seed: int = 0


@dataclass
class CatalogSection:
    dir: Optional[str] = None  # None = bundled toy bases
    split_ratio: float = 0.9
    seed: int = 0


@dataclass
class ServerSection:
    store: str = "gradeforge-store"
    checkpoint: Optional[str] = None
    host: str = "127.0.0.1"
    port: int = 8742
    workers: int = 2


@dataclass
class AppConfig:
    schedule: ScheduleSection = field(default_factory=ScheduleSection)
    training: TrainingSection = field(default_factory=TrainingSection)
    catalog: CatalogSection = field(default_factory=CatalogSection)
    server: ServerSection = field(default_factory=ServerSection)


def _merge(section, data: dict):
    for key, value in (data or {}).items():
        if not hasattr(section, key):
            raise InvalidArgumentError(f"unknown config key {key!r}")
        setattr(section, key, value)
    return section


def load_config(path: Optional[str | Path] = None) -> AppConfig:
    """Load YAML config (all sections optional) and apply env overrides."""
    cfg = AppConfig()
    if path is not None:
        raw = yaml.safe_load(Path(path).read_text()) or {}
        if not isinstance(raw, dict):
            raise InvalidArgumentError(f"config root must be a mapping: {path}")
        allowed = {"schedule", "training", "catalog", "server"}
        unknown = set(raw) - allowed
        if unknown:
            raise InvalidArgumentError(f"unknown config sections: {sorted(unknown)}")
        _merge(cfg.schedule, raw.get("schedule"))
        _merge(cfg.training, raw.get("training"))
        _merge(cfg.catalog, raw.get("catalog"))
        _merge(cfg.server, raw.get("server"))

    if os.environ.get("GRADEFORGE_STORE"):
        cfg.server.store = os.environ["GRADEFORGE_STORE"]
    if os.environ.get("GRADEFORGE_CHECKPOINT"):
        cfg.server.checkpoint = os.environ["GRADEFORGE_CHECKPOINT"]
    bind = os.environ.get("GRADEFORGE_BIND")
    if bind:
        host, _, port = bind.rpartition(":")
        if not host or not port.isdigit():
            raise InvalidArgumentError(f"GRADEFORGE_BIND must be host:port, got {bind!r}")
        cfg.server.host = host
        cfg.server.port = int(port)
    return cfg
