"""Pipeline configuration and JSON config-file loading."""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .core import Guardrails
from .errors import ConfigError, InvalidArgumentError

log = logging.getLogger(__name__)

DEFAULT_PROMO_LEXICON_FILE = Path(__file__).parent / "data" / "promo_lexicon.txt"
DEFAULT_CTA_PHRASES = ("buy now", "shop now", "order today", "discover", "explore")


@dataclass(frozen=True)
class PipelineConfig:
    K_lib: int = 10
    K_hit: int = 10
    K_aug: int = 5
    epsilon_dup: float = 0.95
    tau_q: float = 0.35
    m: int = 3
    lam: float = 0.7
    gamma: float = 0.1
    K_max: int = 5
    stagnation_delta: float = 0.01
    stagnation_window: int = 2
    stagnation_enabled: bool = True
    d: int = 256
    n_expand: int = 5

    def __post_init__(self):
        for key in ("K_lib", "K_hit", "K_aug", "m", "K_max", "stagnation_window", "d", "n_expand"):
            value = getattr(self, key)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(_external(key), "must be a positive integer")
        for key in ("epsilon_dup", "tau_q"):
            value = getattr(self, key)
            if not _is_real(value) or not 0.0 < value < 1.0:
                raise ConfigError(_external(key), "must be a real in (0, 1)")
        if not _is_real(self.lam) or not 0.0 <= self.lam <= 1.0:
            raise ConfigError("lambda", "must be a real in [0, 1]")
        if not _is_real(self.gamma):
            raise ConfigError("gamma", "must be a real number")
        if not _is_real(self.stagnation_delta) or self.stagnation_delta < 0:
            raise ConfigError("stagnation_delta", "must be a real >= 0")
        if not isinstance(self.stagnation_enabled, bool):
            raise ConfigError("stagnation_enabled", "must be a boolean")


def _is_real(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


# "lambda" is a Python keyword; it is the config-file spelling of ``lam``
_ALIASES = {"lambda": "lam"}


def _external(name: str) -> str:
    return {v: k for k, v in _ALIASES.items()}.get(name, name)


@dataclass(frozen=True)
class ClientSettings:
    kind: str
    options: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Settings:
    """Everything a config file can set, after defaults are applied."""

    pipeline: PipelineConfig
    guardrails: Guardrails
    search: ClientSettings
    llm: ClientSettings
    embedding: ClientSettings
    promo_lexicon: tuple[str, ...]
    cta_phrases: tuple[str, ...]
    workers: int = 1
    base_dir: Path | None = field(default=None, compare=False)

    def resolve_path(self, value: str) -> Path:
        path = Path(value)
        if self.base_dir is not None and not path.is_absolute():
            return self.base_dir / path
        return path

    def to_dict(self) -> dict:
        pipeline = {_external(k): v for k, v in asdict(self.pipeline).items()}
        return {
            "pipeline": pipeline,
            "guardrails": self.guardrails.to_dict(),
            "search": {"kind": self.search.kind, **self.search.options},
            "llm": {"kind": self.llm.kind, **self.llm.options},
            "embedding": {"kind": self.embedding.kind, **self.embedding.options},
            "promo_lexicon": list(self.promo_lexicon),
            "cta_phrases": list(self.cta_phrases),
            "workers": self.workers,
        }


def load_promo_lexicon(path: Path = DEFAULT_PROMO_LEXICON_FILE) -> tuple[str, ...]:
    lines = path.read_text(encoding="utf-8").splitlines()
    return tuple(s.strip().lower() for s in lines if s.strip() and not s.startswith("#"))


_TOP_LEVEL = {"pipeline", "guardrails", "search", "llm", "embedding", "promo_lexicon", "cta_phrases", "workers"}


def parse_pipeline(data: dict) -> PipelineConfig:
    known = {f.name for f in fields(PipelineConfig)}
    kwargs = {}
    for key, value in data.items():
        name = _ALIASES.get(key, key)
        if name not in known:
            log.warning("unknown pipeline config key %r ignored", key)
            continue
        kwargs[name] = value
    return PipelineConfig(**kwargs)


def _client(data: Any, key: str, default_kind: str) -> ClientSettings:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(key, "must be an object")
    options = dict(data)
    kind = options.pop("kind", default_kind)
    return ClientSettings(kind=kind, options=options)


def settings_from_dict(data: dict) -> Settings:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    for key in data:
        if key not in _TOP_LEVEL:
            log.warning("unknown config key %r ignored", key)
    pipeline = parse_pipeline(data.get("pipeline", {}))
    try:
        guardrails = Guardrails.from_dict(data.get("guardrails", {}))
    except InvalidArgumentError as exc:
        raise ConfigError("guardrails", str(exc)) from exc
    search = _client(data.get("search"), "search", "simulated")
    llm = _client(data.get("llm"), "llm", "mock")
    embedding = _client(data.get("embedding"), "embedding", "hashing")
    if embedding.kind == "hashing" and embedding.options.get("dimension", pipeline.d) != pipeline.d:
        raise ConfigError("embedding.dimension", "must equal pipeline.d")
    lexicon = data.get("promo_lexicon")
    promo = tuple(s.lower() for s in lexicon) if lexicon is not None else load_promo_lexicon()
    cta = tuple(s.lower() for s in data.get("cta_phrases", DEFAULT_CTA_PHRASES))
    if not cta:
        raise ConfigError("cta_phrases", "must be non-empty")
    workers = data.get("workers", 1)
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise ConfigError("workers", "must be a positive integer")
    return Settings(pipeline, guardrails, search, llm, embedding, promo, cta, workers)


def load_config(path: str | Path) -> Settings:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(str(path), "file not found") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON: {exc}") from exc
    settings = settings_from_dict(data)
    # relative file references resolve against the config file's directory
    return replace(settings, base_dir=path.parent)
