"""Run configuration files: INI-style ``key = value`` lines under section headers.

Recognised sections::

    [dataset]            preset, out, seed, count, name
    [generator.<label>]  family, n_min, n_max, count, seed, plus family parameters
    [train]              dataset, probe, out and every TrainConfig field

Unknown sections or keys are rejected.  Relative paths resolve against the
directory holding the config file.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .datasets import PRESETS, GeneratorSpec
from .errors import ConfigError, InputError
from .oracles import MEASURES
from .training import TrainConfig

FAMILY_PARAMS = {
    "erdos-renyi": {"p": float},
    "powerlaw-tree": {"gamma": float, "tries": int},
    "watts-strogatz": {"k": int, "p": float, "tries": int},
    "holme-kim": {"m": int, "p": float},
    "barabasi-albert": {"m": int},
    "shell": {},
}
DATASET_KEYS = {"preset": str, "out": "path", "seed": int, "count": int, "name": str}
GENERATOR_KEYS = {"family": str, "n_min": int, "n_max": int, "count": int, "seed": int}
TRAIN_KEYS = {
    "dataset": "path",
    "probe": "path",
    "out": "path",
    "d": int,
    "t_max": int,
    "epochs": int,
    "batches_per_epoch": int,
    "batch_size": int,
    "mode": str,
    "centralities": "list",
    "seed": int,
    "lr": float,
    "beta1": float,
    "beta2": float,
    "eps": float,
    "ties": str,
}


@dataclass
class RunConfig:
    path: Path | None = None
    dataset: dict = field(default_factory=dict)
    generators: list[GeneratorSpec] = field(default_factory=list)
    train: dict = field(default_factory=dict)

    def train_config(self, seed: int | None = None) -> TrainConfig:
        fields = {k: v for k, v in self.train.items() if k not in ("dataset", "probe", "out")}
        if seed is not None:
            fields["seed"] = seed
        try:
            return TrainConfig(**fields)
        except Exception as exc:
            raise ConfigError(f"[train]: {exc}") from None


def _convert(section: str, key: str, raw: str, kind, base: Path):
    try:
        if kind == "path":
            p = Path(raw).expanduser()
            return p if p.is_absolute() else (base / p).resolve()
        if kind == "list":
            items = [x.strip() for x in raw.split(",") if x.strip()]
            if items == ["all"]:
                return list(MEASURES)
            return items
        return kind(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r}: expected {getattr(kind, '__name__', kind)}") from None


def _read_section(parser, section: str, allowed: dict, base: Path) -> dict:
    out = {}
    for key, raw in parser.items(section):
        if key not in allowed:
            raise ConfigError(f"[{section}]: unknown key {key!r}")
        out[key] = _convert(section, key, raw, allowed[key], base)
    return out


def parse_config(text: str, base: Path | str = ".", path: Path | None = None) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0]) from None
    base = Path(base)
    cfg = RunConfig(path=path)
    for section in parser.sections():
        if section == "dataset":
            cfg.dataset = _read_section(parser, section, DATASET_KEYS, base)
            preset = cfg.dataset.get("preset", "custom")
            if preset != "custom" and preset not in PRESETS:
                raise ConfigError(f"[dataset]: unknown preset {preset!r}")
        elif section.startswith("generator."):
            family = parser.get(section, "family", fallback=None)
            if family not in FAMILY_PARAMS:
                raise ConfigError(f"[{section}]: unknown family {family!r}")
            allowed = {**GENERATOR_KEYS, **FAMILY_PARAMS[family]}
            vals = _read_section(parser, section, allowed, base)
            params = {k: vals[k] for k in FAMILY_PARAMS[family] if k in vals}
            try:
                cfg.generators.append(
                    GeneratorSpec(
                        family,
                        params,
                        (vals.get("n_min", 32), vals.get("n_max", 128)),
                        vals.get("count", 1),
                        vals.get("seed", 0),
                    )
                )
            except InputError as exc:
                raise ConfigError(f"[{section}]: {exc}") from None
        elif section == "train":
            cfg.train = _read_section(parser, section, TRAIN_KEYS, base)
            if "centralities" in cfg.train:
                bad = [c for c in cfg.train["centralities"] if c not in MEASURES]
                if bad:
                    raise ConfigError(f"[train]: unknown centrality {bad[0]!r}")
        else:
            raise ConfigError(f"unknown section [{section}]")
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    return parse_config(text, path.resolve().parent, path)
