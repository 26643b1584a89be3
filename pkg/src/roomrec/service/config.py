"""Service configuration: JSON file with environment-variable overrides.

Every field can be overridden by `ROOMREC_<FIELD>` (upper-case); environment
values win over the file, the file wins over defaults.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from ..errors import ConfigurationError

ENV_PREFIX = "ROOMREC_"


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    data_dir: str = "data"
    model_path: str = "data/model.rrm"
    arch: str = "C"
    max_body_bytes: int = 50_000_000
    max_batch_records: int = 500
    session_ttl_hours: float = 24.0
    train_max_steps: int = 10000
    train_eval_every: int = 100
    train_patience: int = 10
    train_batch: int = 100
    train_lr: float = 0.001
    seed: int = 0
    tls_cert: str = ""
    tls_key: str = ""

    def __post_init__(self):
        if self.port < 1 or self.port > 65535:
            raise ConfigurationError(f"port {self.port} out of range")
        if self.max_batch_records < 1:
            raise ConfigurationError("max_batch_records must be positive")
        if self.session_ttl_hours <= 0:
            raise ConfigurationError("session_ttl_hours must be positive")


def load_config(path: str | Path | None = None,
                env: dict | None = None) -> ServiceConfig:
    """Merge defaults <- config file <- environment."""
    env = os.environ if env is None else env
    doc: dict = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"unreadable config file {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigurationError("config file must hold a JSON object")
    values = {}
    for f in fields(ServiceConfig):
        if f.name in doc:
            values[f.name] = doc[f.name]
        raw = env.get(ENV_PREFIX + f.name.upper())
        if raw is not None:
            if f.type in ("int", int):
                values[f.name] = int(raw)
            elif f.type in ("float", float):
                values[f.name] = float(raw)
            else:
                values[f.name] = raw
    unknown = set(doc) - {f.name for f in fields(ServiceConfig)}
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    return ServiceConfig(**values)
