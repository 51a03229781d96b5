"""Run configuration: defaults, config file, environment, flag overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from .gateway import DEFAULT_MAX_TOKENS, DEFAULT_NUCLEUS_MASS, DEFAULT_TEMPERATURES

VARIANTS = ("tod", "tod_no_tree", "tod_no_sd", "single_stage", "two_stage")

ENV_PREFIX = "TREEDEBATE_"


class ConfigError(ValueError):
    """The configuration is unusable (bad file, bad value, bad variant)."""


@dataclass(frozen=True)
class ProviderSettings:
    endpoint: str = ""
    model: str = ""
    api_key: str | None = None

    @property
    def configured(self) -> bool:
        return bool(self.endpoint and self.model)


@dataclass(frozen=True)
class RunConfig:
    delta: int = 5
    k: int = 3
    max_depth: int = 3
    variant: str = "tod"
    temperatures: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_TEMPERATURES)
    )
    nucleus_mass: float = DEFAULT_NUCLEUS_MASS
    max_tokens: int = DEFAULT_MAX_TOKENS
    retries: int = 3
    concurrency: int = 1
    segment_target: int = 3
    seed_label: str = ""
    chat: ProviderSettings = field(default_factory=ProviderSettings)
    embeddings: ProviderSettings = field(default_factory=ProviderSettings)

    def __post_init__(self) -> None:
        if self.delta < 1:
            raise ConfigError(f"delta must be >= 1, got {self.delta}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.max_depth < 1:
            raise ConfigError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.variant not in VARIANTS:
            raise ConfigError(
                f"unknown variant {self.variant!r}; valid: {', '.join(VARIANTS)}"
            )
        if self.concurrency < 1:
            raise ConfigError(f"concurrency must be >= 1, got {self.concurrency}")
        if self.segment_target < 1:
            raise ConfigError(f"segment_target must be >= 1, got {self.segment_target}")
        unknown = set(self.temperatures) - set(DEFAULT_TEMPERATURES)
        if unknown:
            raise ConfigError(f"unknown temperature tasks: {sorted(unknown)}")

    def temperature_table(self) -> dict[str, float]:
        table = dict(DEFAULT_TEMPERATURES)
        table.update(self.temperatures)
        return table

    def snapshot(self) -> dict[str, Any]:
        """Serializable view of the run settings. Credentials are excluded."""
        return {
            "delta": self.delta,
            "k": self.k,
            "max_depth": self.max_depth,
            "variant": self.variant,
            "temperatures": self.temperature_table(),
            "nucleus_mass": self.nucleus_mass,
            "max_tokens": self.max_tokens,
            "retries": self.retries,
            "concurrency": self.concurrency,
            "segment_target": self.segment_target,
            "seed_label": self.seed_label,
            "chat_model": self.chat.model,
            "embedding_model": self.embeddings.model,
        }


_INT_KEYS = ("delta", "k", "max_depth", "max_tokens", "retries", "concurrency", "segment_target")
_FLOAT_KEYS = ("nucleus_mass",)
_STR_KEYS = ("variant", "seed_label")


def _provider_from(data: Mapping[str, Any], base: ProviderSettings) -> ProviderSettings:
    return ProviderSettings(
        endpoint=str(data.get("endpoint", base.endpoint) or ""),
        model=str(data.get("model", base.model) or ""),
        api_key=data.get("api_key", base.api_key),
    )


def _apply(config: RunConfig, data: Mapping[str, Any]) -> RunConfig:
    updates: dict[str, Any] = {}
    for key in _INT_KEYS:
        if data.get(key) is not None:
            updates[key] = int(data[key])
    for key in _FLOAT_KEYS:
        if data.get(key) is not None:
            updates[key] = float(data[key])
    for key in _STR_KEYS:
        if data.get(key) is not None:
            updates[key] = str(data[key])
    if data.get("temperatures") is not None:
        merged = dict(config.temperatures)
        merged.update({str(k): float(v) for k, v in data["temperatures"].items()})
        updates["temperatures"] = merged
    if data.get("chat") is not None:
        updates["chat"] = _provider_from(data["chat"], config.chat)
    if data.get("embeddings") is not None:
        updates["embeddings"] = _provider_from(data["embeddings"], config.embeddings)
    return replace(config, **updates) if updates else config


def _env_data(environ: Mapping[str, str]) -> dict[str, Any]:
    def get(name: str) -> str | None:
        return environ.get(ENV_PREFIX + name)

    data: dict[str, Any] = {}
    chat = {
        "endpoint": get("CHAT_ENDPOINT"),
        "model": get("CHAT_MODEL"),
        "api_key": get("CHAT_API_KEY"),
    }
    if any(v is not None for v in chat.values()):
        data["chat"] = {k: v for k, v in chat.items() if v is not None}
    embed = {
        "endpoint": get("EMBED_ENDPOINT"),
        "model": get("EMBED_MODEL"),
        "api_key": get("EMBED_API_KEY"),
    }
    if any(v is not None for v in embed.values()):
        data["embeddings"] = {k: v for k, v in embed.items() if v is not None}
    return data


def load_config(
    config_path: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
) -> RunConfig:
    """Resolve a RunConfig with precedence: flags > config file > env > defaults."""
    config = RunConfig()
    try:
        config = _apply(config, _env_data(environ if environ is not None else os.environ))
        if config_path is not None:
            path = Path(config_path)
            if not path.exists():
                raise ConfigError(f"config file not found: {path}")
            loaded = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
            if not isinstance(loaded, dict):
                raise ConfigError(f"config file must hold a mapping: {path}")
            config = _apply(config, loaded)
        if overrides:
            config = _apply(config, {k: v for k, v in overrides.items() if v is not None})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid configuration value: {exc}") from exc
    return config
