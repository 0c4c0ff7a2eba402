"""Pipeline configuration: a JSON or TOML file of defaults; CLI flags win.

Only the knobs commands actually consult live here. A missing config file
means built-in defaults everywhere; an explicitly configured path that does
not resolve is an error at command start.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigError


@dataclass
class LdaDefaults:
    k: int = 10
    alpha: Optional[float] = None  # None -> 50 / k
    beta: float = 0.01
    iterations: int = 1000
    seed: int = 0
    min_df: int = 2
    top_n_segments: int = 12
    keywords_per_topic: int = 12

    def effective_alpha(self) -> float:
        return self.alpha if self.alpha is not None else 50.0 / self.k


@dataclass
class SplitDefaults:
    train: int = 2383
    val: int = 596
    test: int = 340
    seed: int = 0


@dataclass
class SyntheticDefaults:
    train: int = 1792
    val: int = 453
    seed: int = 0


@dataclass
class GenerationDefaults:
    temperature: float = 0.0
    seed: int = 0
    max_tokens: int = 512


@dataclass
class LlmDefaults:
    base_url: Optional[str] = None
    model_name: Optional[str] = None
    api_key_env: Optional[str] = None
    max_concurrency: int = 4
    max_attempts: int = 4
    backoff_base_ms: int = 250
    request_timeout_ms: int = 60_000


@dataclass
class PipelineConfig:
    keywords_path: Optional[str] = None
    stopwords_path: Optional[str] = None
    lda: LdaDefaults = field(default_factory=LdaDefaults)
    split: SplitDefaults = field(default_factory=SplitDefaults)
    synthetic: SyntheticDefaults = field(default_factory=SyntheticDefaults)
    generation: GenerationDefaults = field(default_factory=GenerationDefaults)
    llm: LlmDefaults = field(default_factory=LlmDefaults)

    def validate_paths(self) -> None:
        for label, value in (("keywords", self.keywords_path), ("stopwords", self.stopwords_path)):
            if value is not None and not Path(value).exists():
                raise ConfigError(f"configured {label} file does not exist: {value}")


def _apply(obj: Any, data: dict) -> None:
    for key, value in data.items():
        if not hasattr(obj, key):
            raise ConfigError(f"unknown config key {key!r}")
        current = getattr(obj, key)
        if hasattr(current, "__dataclass_fields__"):
            if not isinstance(value, dict):
                raise ConfigError(f"config section {key!r} must be a table/object")
            _apply(current, value)
        else:
            setattr(obj, key, value)


def load_config(path: str | Path | None) -> PipelineConfig:
    config = PipelineConfig()
    if path is None:
        return config
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file does not exist: {path}")
    if path.suffix.lower() == ".toml":
        try:
            data = tomllib.loads(path.read_text(encoding="utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: invalid TOML: {exc}") from None
    else:
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config root must be an object/table")
    _apply(config, data)
    config.validate_paths()
    return config
