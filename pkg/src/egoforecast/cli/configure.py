"""Layered configuration: preset -> config file -> --set overrides.

Every key is validated against the model, training, data, and world
schemas; an unknown key is an error naming the full dotted path.  The
fully resolved configuration is echoed as ``effective_config.json``
into each output directory so every artifact records how it was made.
"""
import dataclasses
import json
import os

from ..datagen.socialforce import WorldConfig
from ..model.config import ConfigError, ModelConfig
from ..traineval import TrainConfig
from .presets import preset_config

# shorthand --set keys accepted for the most common switches
ALIASES = {
    "model": "model.kind",
    "modalities": "model.modalities",
}

_MODEL_KEYS = set(ModelConfig.__dataclass_fields__)
_TRAIN_KEYS = set(TrainConfig.__dataclass_fields__)
_DATA_KEYS = {"n_train", "n_val", "n_test", "master_seed", "world"}
_WORLD_KEYS = set(WorldConfig.__dataclass_fields__)


class CliConfigError(ValueError):
    pass


def _check_keys(cfg):
    for key in cfg:
        if key not in ("preset", "model", "train", "data"):
            raise CliConfigError("unknown config section %r" % key)
    for key in cfg.get("model", {}):
        if key not in _MODEL_KEYS:
            raise CliConfigError("unknown config key 'model.%s'" % key)
    for key in cfg.get("train", {}):
        if key not in _TRAIN_KEYS:
            raise CliConfigError("unknown config key 'train.%s'" % key)
    for key in cfg.get("data", {}):
        if key not in _DATA_KEYS:
            raise CliConfigError("unknown config key 'data.%s'" % key)
    for key in cfg.get("data", {}).get("world", {}):
        if key not in _WORLD_KEYS:
            raise CliConfigError("unknown config key 'data.world.%s'" % key)


def _merge(base, extra, path=""):
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value, path + key + ".")
        else:
            base[key] = value


def _parse_value(raw):
    try:
        return json.loads(raw)
    except (json.JSONDecodeError, ValueError):
        return raw


def parse_set_item(item):
    """One --set argument 'dotted.key=value' -> (path tuple, value)."""
    if "=" not in item:
        raise CliConfigError(
            "--set needs key=value, got %r" % item)
    key, raw = item.split("=", 1)
    key = key.strip()
    key = ALIASES.get(key, key)
    if not key:
        raise CliConfigError("--set with empty key in %r" % item)
    parts = tuple(key.split("."))
    # world keys may be spelled without the data. prefix
    if parts[0] == "world" and len(parts) > 1:
        parts = ("data",) + parts
    return parts, _parse_value(raw.strip())


def resolve_config(config_file=None, set_items=(), seed=None):
    """Resolve the effective configuration dict.

    Precedence: command line --set > config file > preset defaults.
    ``seed`` (the --seed flag) overrides both the training seed and the
    data generation master seed.
    """
    file_cfg = {}
    if config_file:
        with open(config_file, "r", encoding="utf-8") as fh:
            try:
                file_cfg = json.load(fh)
            except json.JSONDecodeError as exc:
                raise CliConfigError(
                    "config file %s is not valid JSON: %s" % (config_file, exc))
        if not isinstance(file_cfg, dict):
            raise CliConfigError("config file %s must hold a JSON object"
                                 % config_file)

    parsed = [parse_set_item(item) for item in set_items]
    preset = "desk"
    if "preset" in file_cfg:
        preset = file_cfg["preset"]
    for parts, value in parsed:
        if parts == ("preset",):
            preset = value
    try:
        cfg = preset_config(preset)
    except KeyError as exc:
        raise CliConfigError(str(exc.args[0]))

    _merge(cfg, {k: v for k, v in file_cfg.items() if k != "preset"})
    for parts, value in parsed:
        if parts == ("preset",):
            continue
        node = cfg
        for part in parts[:-1]:
            nxt = node.get(part)
            if not isinstance(nxt, dict):
                raise CliConfigError(
                    "unknown config key %r" % ".".join(parts))
            node = nxt
        node[parts[-1]] = value

    if seed is not None:
        cfg["train"]["seed"] = int(seed)
        cfg["data"]["master_seed"] = int(seed)

    _check_keys(cfg)
    return cfg


def materialize(cfg):
    """Validated (ModelConfig, TrainConfig, data dict, WorldConfig)."""
    try:
        model_cfg = ModelConfig.from_dict(cfg["model"])
    except ConfigError:
        raise
    train_cfg = TrainConfig(**cfg["train"])
    train_cfg.validate()
    data = dict(cfg["data"])
    world_over = data.get("world") or {}
    world_cfg = dataclasses.replace(WorldConfig(), **world_over)
    for key in ("n_train", "n_val", "n_test"):
        if int(data.get(key, 0)) < 0:
            raise CliConfigError("data.%s must be >= 0" % key)
    if int(data.get("n_train", 0)) < 1:
        raise CliConfigError("data.n_train must be >= 1")
    return model_cfg, train_cfg, data, world_cfg


def echo_config(cfg, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "effective_config.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
