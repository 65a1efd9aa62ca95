"""Run configuration: a flat ``key = value`` file plus command-line overrides."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .corpus import DELIMITER, ENCODING

CONFIG_ENV = "SCREENREP_CONFIG"

PATH_KEYS = (
    "movies",
    "characters",
    "lines",
    "conversations",
    "crew",
    "names",
    "vectors",
    "lexicon",
    "stoplist",
    "tagger",
    "male_reference",
    "named_blocklist",
    "gender_model",
    "features",
    "output",
)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # corpus inputs
    movies: Path | None = None
    characters: Path | None = None
    lines: Path | None = None
    conversations: Path | None = None
    crew: Path | None = None
    # models and lexical resources; None means the bundled default where one exists
    names: Path | None = None
    vectors: Path | None = None
    vectors_format: str = "text"
    lexicon: Path | None = None
    stoplist: Path | None = None
    tagger: Path | None = None
    male_reference: Path | None = None
    named_blocklist: Path | None = None
    gender_model: Path | None = None
    features: Path | None = None
    output: Path = Path("out")
    # parameters
    delimiter: str = DELIMITER
    encoding: str = ENCODING
    train_fraction: float = 0.9
    seed: int = 0
    max_depth: int = 12
    min_leaf: int = 3
    confidence_floor: float = 0.0
    alpha: float = 15.0
    caps_boost: float = 0.733
    exclamation_boost: float = 0.292
    genre_limit: int = 3  # 0 means use every genre
    retention: str = "kaiser"
    label_threshold: float = 0.55
    extra_columns: str = ""
    workers: int = 1
    emit_intermediate: bool = False

    def validate(self) -> None:
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must lie strictly between 0 and 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.genre_limit < 0:
            raise ConfigError("genre_limit must be non-negative")

    def snapshot(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = str(value) if isinstance(value, Path) else value
        return out

    @property
    def extra(self) -> list[str]:
        return [c.strip() for c in self.extra_columns.split(",") if c.strip()]


def _coerce(name: str, raw, base: Path | None):
    field = {f.name: f for f in fields(RunConfig)}[name]
    if raw is None:
        return None
    if name in PATH_KEYS:
        if raw == "":
            return None
        path = Path(raw).expanduser()
        if base is not None and not path.is_absolute():
            path = base / path
        return path
    default = field.default
    if isinstance(default, bool):
        if isinstance(raw, bool):
            return raw
        text = str(raw).strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return str(raw)


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, keys use underscores or dashes."""
    path = Path(path)
    known = {f.name for f in fields(RunConfig)}
    values = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = stripped.split("=", 1)
        key = key.strip().replace("-", "_")
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        value = value.strip()
        if key != "delimiter":
            value = value.split(" #", 1)[0].strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        values[key] = value
    return values


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """
    Build a config from an optional file and explicit overrides (overrides win).

    Relative paths in the file resolve against the file's directory. Without
    an explicit path the ``SCREENREP_CONFIG`` environment variable is used.
    """
    if path is None and os.environ.get(CONFIG_ENV):
        path = os.environ[CONFIG_ENV]
    cfg = RunConfig()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(path)
        for key, raw in read_config_file(path).items():
            setattr(cfg, key, _coerce(key, raw, path.parent))
    for key, raw in (overrides or {}).items():
        if raw is None:
            continue
        setattr(cfg, key, _coerce(key, raw, None))
    cfg.validate()
    return cfg


def config_keys() -> list[dataclasses.Field]:
    return list(fields(RunConfig))
