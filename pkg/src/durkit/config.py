"""Layered run configuration: built-in defaults < INI file < ``--set`` flags.

The file is plain INI with one section per area::

    [model]
    family = durformer
    size = S
    num_semantic_tokens = 8

    [train]
    steps = 800
    seeds = 0, 1, 2

Keys are validated against the matching dataclass; anything unknown is
an error.  ``[model]`` keys other than ``family`` and ``size`` are
overrides of the chosen family's architecture config.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .data import SyntheticSpec
from .eval.training import TrainConfig
from .families import SIZES, get_family

CONFIG_ENV = "DURKIT_CONFIG"
SECTIONS = ("model", "train", "data", "semantic", "eval")


class ConfigError(ValueError):
    pass


def _coerce(raw: str, default, key: str):
    """Parse ``raw`` into the type of ``default``."""
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            items = [x.strip() for x in raw.split(",") if x.strip()]
            kind = type(default[0]) if default else str
            return tuple(kind(x) for x in items)
        if isinstance(default, dict):
            return json.loads(raw)
        if isinstance(default, str) or default is None:
            return raw
    except (ValueError, json.JSONDecodeError):
        raise ConfigError(f"{key}: cannot parse {raw!r} as {type(default).__name__}") from None
    raise ConfigError(f"{key}: unsupported value type {type(default).__name__}")


def _coerce_model(raw: str):
    """Model overrides have no default to read a type from: bool, int, float, then string."""
    low = raw.strip().lower()
    if low in ("true", "false"):
        return low == "true"
    for kind in (int, float):
        try:
            return kind(raw)
        except ValueError:
            pass
    return raw.strip()


@dataclass
class RunConfig:
    family: str = "durformer"
    size: str = "S"
    model: dict = field(default_factory=dict)
    train: TrainConfig = field(default_factory=TrainConfig)
    data: SyntheticSpec = field(default_factory=SyntheticSpec)
    semantic: str = "hash"
    split: str = "test"
    jobs: int = 1

    def validate(self) -> None:
        fam = get_family(self.family)
        if self.size not in SIZES:
            raise ConfigError(f"model.size must be one of {SIZES}, got {self.size!r}")
        allowed = {f.name for f in fields(fam.config_cls)} if fam.config_cls else set()
        unknown = set(self.model) - allowed
        if unknown:
            raise ConfigError(f"unknown model keys for family {self.family!r}: {sorted(unknown)}")
        if self.jobs < 1:
            raise ConfigError("eval.jobs must be >= 1")

    def to_dict(self) -> dict:
        return {"model": {"family": self.family, "size": self.size, **dict(sorted(self.model.items()))},
                "train": self.train.to_dict(), "data": self.data.to_dict(),
                "semantic": {"extractor": self.semantic}, "eval": {"split": self.split, "jobs": self.jobs}}

    @property
    def hash(self) -> str:
        """Hash of everything that affects results (``eval.jobs`` only changes scheduling)."""
        d = self.to_dict()
        d["eval"] = {"split": self.split}
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def describe(self) -> str:
        lines = []
        for section, values in self.to_dict().items():
            lines.append(f"[{section}]")
            for k, v in values.items():
                if isinstance(v, (list, tuple)):
                    v = ", ".join(str(x) for x in v)
                elif isinstance(v, dict):
                    v = json.dumps(v, sort_keys=True)
                lines.append(f"{k} = {v}")
            lines.append("")
        return "\n".join(lines)


def _apply(cfg: RunConfig, section: str, key: str, raw: str, where: str) -> None:
    name = f"{section}.{key}"
    if section == "model":
        if key == "family":
            cfg.family = raw.strip()
        elif key == "size":
            cfg.size = raw.strip()
        else:
            cfg.model[key] = _coerce_model(raw)
    elif section == "train":
        defaults = TrainConfig()
        if not hasattr(defaults, key):
            raise ConfigError(f"{where}: unknown key {name}")
        values = cfg.train.to_dict()
        values[key] = _coerce(raw, getattr(defaults, key), name)
        cfg.train = TrainConfig.from_dict(values)
    elif section == "data":
        defaults = SyntheticSpec()
        if not hasattr(defaults, key):
            raise ConfigError(f"{where}: unknown key {name}")
        setattr(cfg.data, key, _coerce(raw, getattr(defaults, key), name))
    elif section == "semantic":
        if key != "extractor":
            raise ConfigError(f"{where}: unknown key {name}")
        cfg.semantic = raw.strip()
    elif section == "eval":
        if key == "split":
            cfg.split = raw.strip()
        elif key == "jobs":
            cfg.jobs = _coerce(raw, 1, name)
        else:
            raise ConfigError(f"{where}: unknown key {name}")
    else:
        raise ConfigError(f"{where}: unknown section {section!r}; expected one of {SECTIONS}")


def load_config(path: str | Path | None = None, overrides=()) -> RunConfig:
    """Resolve defaults, then ``path`` (or ``$DURKIT_CONFIG``), then ``key=value`` overrides."""
    cfg = RunConfig()
    path = path or os.environ.get(CONFIG_ENV) or None
    try:
        if path:
            parser = configparser.ConfigParser(interpolation=None)
            parser.optionxform = str
            try:
                with open(path, encoding="utf-8") as fh:
                    parser.read_file(fh)
            except (OSError, configparser.Error) as exc:
                raise ConfigError(f"{path}: {exc}") from None
            for section in parser.sections():
                for key, raw in parser.items(section):
                    _apply(cfg, section, key, raw, str(path))
        for item in overrides:
            dotted, sep, raw = item.partition("=")
            section, dot, key = dotted.strip().partition(".")
            if not sep or not dot or not key:
                raise ConfigError(f"--set expects section.key=value, got {item!r}")
            _apply(cfg, section, key, raw, "--set")
        cfg.data.validate()
        cfg.validate()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg
