"""Run configuration: defaults, JSON config file, environment overrides.

Precedence: command-line flags > environment > config file > defaults.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

ENV_PREFIX = "LEXCITE_"

DEFAULT_THRESHOLDS = {"tfidf_pos": 0.15, "tfidf_neg": 0.05, "vector_tau": 0.574}
DEFAULT_RATIOS = (0.70, 0.15, 0.15)


@dataclass
class RunConfig:
    seed: int = 0
    jobs: int = 1
    k: int = 5
    max_tokens: int = 100
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    ratios: tuple = DEFAULT_RATIOS
    filter_model: str | None = None
    fusion_models: list = field(default_factory=list)
    cross_encoder_model: str | None = None
    paths: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, value in self.thresholds.items():
            if value < 0:
                raise ValueError(f"threshold {name} must be >= 0, got {value}")
        if self.k < 1:
            raise ValueError("k must be >= 1")


_ENV_KEYS = {
    "SEED": ("seed", int),
    "JOBS": ("jobs", int),
    "K": ("k", int),
    "MAX_TOKENS": ("max_tokens", int),
}
_ENV_THRESHOLDS = {
    "TFIDF_POS": "tfidf_pos",
    "TFIDF_NEG": "tfidf_neg",
    "TAU": "vector_tau",
}


def load_config(path: str | Path | None = None, env: dict | None = None, **overrides) -> RunConfig:
    """Merge defaults, an optional JSON config file, LEXCITE_* environment
    variables and explicit keyword overrides (flags)."""
    env = os.environ if env is None else env
    data: dict = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise FileNotFoundError(f"config file not found: {p}")
        data = json.loads(p.read_text())

    config = RunConfig(
        seed=data.get("seed", 0),
        jobs=data.get("jobs", 1),
        k=data.get("k", 5),
        max_tokens=data.get("max_tokens", 100),
        thresholds={**DEFAULT_THRESHOLDS, **data.get("thresholds", {})},
        ratios=tuple(data.get("ratios", DEFAULT_RATIOS)),
        filter_model=data.get("filter_model"),
        fusion_models=list(data.get("fusion_models", [])),
        cross_encoder_model=data.get("cross_encoder_model"),
        paths=dict(data.get("paths", {})),
    )

    for env_key, (attr, cast) in _ENV_KEYS.items():
        raw = env.get(ENV_PREFIX + env_key)
        if raw is not None:
            setattr(config, attr, cast(raw))
    for env_key, threshold in _ENV_THRESHOLDS.items():
        raw = env.get(ENV_PREFIX + env_key)
        if raw is not None:
            config.thresholds[threshold] = float(raw)

    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("tfidf_pos", "tfidf_neg", "vector_tau"):
            config.thresholds[key] = value
        elif hasattr(config, key):
            setattr(config, key, value)
        else:
            raise KeyError(f"unknown config override {key!r}")
    return config
