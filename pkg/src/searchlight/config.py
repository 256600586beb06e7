"""One config file for the whole engine, with flag and env overrides.

Every entry point (CLI subcommands, HTTP service) reads the same YAML file
so an experiment is reproducible from its config snapshot alone. Precedence,
lowest to highest: built-in defaults, config file, SEARCHLIGHT_* environment
variables (artifact paths and listen address only), explicit flag overrides.
Unknown keys are rejected rather than ignored; a typo that silently falls
back to a default costs hours.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace
from typing import Any

import yaml

from .drmm.histogram import MODES, MODE_LOGCOUNT
from .drmm.model import GATING_EMBEDDING, GATING_VARIANTS
from .drmm.training import Hyperparams
from .index import RetrievalConfig

MODE_REGULAR = "regular"
MODE_EXPLAINABLE = "explainable"
SERP_MODES = (MODE_REGULAR, MODE_EXPLAINABLE)

# env var -> dotted config key (paths/address only, per service interface)
ENV_OVERRIDES = {
    "SEARCHLIGHT_INDEX": "artifacts.index",
    "SEARCHLIGHT_MODEL": "artifacts.model",
    "SEARCHLIGHT_STORE": "artifacts.store",
    "SEARCHLIGHT_EMBEDDINGS": "embeddings.path",
    "SEARCHLIGHT_HOST": "service.host",
    "SEARCHLIGHT_PORT": "service.port",
}


@dataclass(frozen=True)
class TokenizerConfig:
    stopwords: str | None = None  # path; bundled list when null
    stemming: bool = True


@dataclass(frozen=True)
class RetrievalSection:
    k1: float = 0.9
    b: float = 0.4
    k_documents: int = 1000
    k_passages: int = 100

    def __post_init__(self):
        # fail at load time, not when the first query arrives
        self.config(passages=False)
        self.config(passages=True)

    def config(self, passages: bool) -> RetrievalConfig:
        k = self.k_passages if passages else self.k_documents
        return RetrievalConfig(k1=self.k1, b=self.b, k=k)


@dataclass(frozen=True)
class HistogramSection:
    num_bins: int = 30
    mode: str = MODE_LOGCOUNT


@dataclass(frozen=True)
class EmbeddingsSection:
    path: str | None = None
    dim: int = 300
    oov_seed: int = 42


@dataclass(frozen=True)
class ArtifactsSection:
    index: str | None = None
    model: str | None = None
    store: str | None = None


@dataclass(frozen=True)
class ServiceSection:
    host: str = "127.0.0.1"
    port: int = 8080
    page_size: int = 5
    default_mode: str = MODE_EXPLAINABLE
    serve_text: bool = False  # /api/doc returns full text only when enabled
    ui_dir: str | None = None
    cors_origins: tuple[str, ...] = ("*",)


@dataclass(frozen=True)
class EngineConfig:
    tokenizer: TokenizerConfig = field(default_factory=TokenizerConfig)
    retrieval: RetrievalSection = field(default_factory=RetrievalSection)
    passage_length: int = 100
    histogram: HistogramSection = field(default_factory=HistogramSection)
    gating: str = GATING_EMBEDDING
    embeddings: EmbeddingsSection = field(default_factory=EmbeddingsSection)
    training: Hyperparams = field(default_factory=Hyperparams)
    training_cache_dir: str | None = None
    artifacts: ArtifactsSection = field(default_factory=ArtifactsSection)
    service: ServiceSection = field(default_factory=ServiceSection)

    def __post_init__(self):
        if self.histogram.mode not in MODES:
            raise ValueError(f"histogram.mode must be one of {MODES}")
        if self.histogram.num_bins < 2:
            raise ValueError("histogram.num_bins must be >= 2")
        if self.gating not in GATING_VARIANTS:
            raise ValueError(f"gating must be one of {GATING_VARIANTS}")
        if self.service.default_mode not in SERP_MODES:
            raise ValueError(f"service.default_mode must be one of {SERP_MODES}")
        if self.passage_length < 1:
            raise ValueError("passage_length must be >= 1")
        if self.service.page_size < 1:
            raise ValueError("service.page_size must be >= 1")


_SECTION_TYPES = {
    "tokenizer": TokenizerConfig,
    "retrieval": RetrievalSection,
    "histogram": HistogramSection,
    "embeddings": EmbeddingsSection,
    "training": Hyperparams,
    "artifacts": ArtifactsSection,
    "service": ServiceSection,
}


class ConfigError(ValueError):
    pass


def _build_section(name: str, cls, raw: Any):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    allowed = {f.name for f in fields(cls)}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {name!r}: {sorted(unknown)}")
    kwargs = dict(raw)
    if cls is ServiceSection and "cors_origins" in kwargs:
        kwargs["cors_origins"] = tuple(kwargs["cors_origins"])
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {name!r} section: {exc}") from exc


def load_config(
    path: str | None = None,
    overrides: dict[str, Any] | None = None,
    env: dict[str, str] | None = None,
) -> EngineConfig:
    """Load YAML config, then apply env and explicit overrides.

    `overrides` maps dotted keys ("retrieval.k1") to values. `env` defaults
    to os.environ; pass {} in tests to isolate them.
    """
    raw: dict[str, Any] = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            loaded = yaml.safe_load(fh)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: config root must be a mapping")
        raw = loaded

    env = os.environ if env is None else env
    for var, key in ENV_OVERRIDES.items():
        if var in env:
            _set_dotted(raw, key, env[var])
    for key, value in (overrides or {}).items():
        _set_dotted(raw, key, value)

    top_allowed = set(_SECTION_TYPES) | {"passage_length", "training_cache_dir", "gating"}
    unknown = set(raw) - top_allowed
    if unknown:
        raise ConfigError(f"unknown top-level config key(s): {sorted(unknown)}")

    kwargs: dict[str, Any] = {}
    for name, cls in _SECTION_TYPES.items():
        if name in raw:
            kwargs[name] = _build_section(name, cls, raw[name])
    for scalar in ("passage_length", "training_cache_dir", "gating"):
        if scalar in raw:
            kwargs[scalar] = raw[scalar]
    try:
        return EngineConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _set_dotted(raw: dict, dotted: str, value: Any) -> None:
    parts = dotted.split(".")
    node = raw
    for part in parts[:-1]:
        nxt = node.get(part)
        if not isinstance(nxt, dict):
            nxt = {}
            node[part] = nxt
        node = nxt
    leaf = parts[-1]
    node[leaf] = _coerce(value, parts)


def _coerce(value: Any, parts: list[str]):
    # Env var values arrive as strings; config types are known per leaf.
    if not isinstance(value, str):
        return value
    if parts[-1] == "port":
        return int(value)
    return value


def config_snapshot(cfg: EngineConfig) -> dict:
    """Plain-dict view of the effective config, for manifests and logs."""

    def as_dict(obj):
        if hasattr(obj, "__dataclass_fields__"):
            return {f.name: as_dict(getattr(obj, f.name)) for f in fields(obj)}
        if isinstance(obj, tuple):
            return list(obj)
        return obj

    return as_dict(cfg)


def with_artifacts(cfg: EngineConfig, **paths) -> EngineConfig:
    return replace(cfg, artifacts=replace(cfg.artifacts, **paths))
