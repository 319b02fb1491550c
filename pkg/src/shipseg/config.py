"""Flat key=value config files.

UTF-8 text, one ``key=value`` per line, ``#`` starts a comment, dotted
keys nest (``model.depth=4``). Unknown keys are errors.
"""

from __future__ import annotations

from pathlib import Path

from .augment import AugmentConfig
from .errors import ConfigError
from .model import ModelConfig
from .synthetic import SyntheticSpec
from .training import SUPERVISION_MODES, TrainConfig

_TRAIN_KEYS = {
    "epochs": int,
    "batch_size": int,
    "learning_rate": float,
    "split_ratio": float,
    "seed": int,
    "supervision": str,
    "mask_fraction": float,
    "pretrain_checkpoint": str,
    "augment.enabled": bool,
    "augment.rotation_degrees_max": float,
    "augment.scale_range": "pair_float",
    "augment.crop_size": "pair_int",
    "augment.enable_grayscale": bool,
    "augment.invert_probability": float,
    "augment.seed": int,
    "model.depth": int,
    "model.base_channels": int,
    "model.in_channels": int,
    "model.out_classes": int,
    "model.upsample": str,
}

_SYNTH_KEYS = {
    "count": int,
    "height": int,
    "width": int,
    "ships_min": int,
    "ships_max": int,
    "axis_min": float,
    "axis_max": float,
    "noise_sigma": float,
    "polarity_mix.white_hot": float,
    "polarity_mix.black_hot": float,
    "polarity_mix.visible": float,
}


def parse_kv_file(path: str | Path) -> dict[str, str]:
    text = Path(path).read_text(encoding="utf-8")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    return values


def _convert(key: str, value: str, kind):
    try:
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
        if kind is bool:
            lowered = value.lower()
            if lowered in ("true", "1", "yes"):
                return True
            if lowered in ("false", "0", "no"):
                return False
            raise ValueError(value)
        if kind == "pair_float":
            parts = [float(p) for p in value.split(",")]
            if len(parts) != 2:
                raise ValueError(value)
            return (parts[0], parts[1])
        if kind == "pair_int":
            if value.lower() == "none":
                return None
            parts = [int(p) for p in value.split(",")]
            if len(parts) != 2:
                raise ValueError(value)
            return (parts[0], parts[1])
        return value
    except ValueError:
        raise ConfigError(f"bad value for {key!r}: {value!r}") from None


def _checked(values: dict[str, str], allowed: dict) -> dict:
    unknown = set(values) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return {key: _convert(key, raw, allowed[key]) for key, raw in values.items()}


def load_train_config(path: str | Path) -> TrainConfig:
    values = _checked(parse_kv_file(path), _TRAIN_KEYS)
    if values.get("supervision", "squiggle_n32") not in SUPERVISION_MODES:
        raise ConfigError(f"unknown supervision {values['supervision']!r}")

    model_kwargs = {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith("model.")}
    model = ModelConfig(**model_kwargs)

    augment = None
    augment_kwargs = {
        k.split(".", 1)[1]: v
        for k, v in values.items()
        if k.startswith("augment.") and k != "augment.enabled"
    }
    if values.get("augment.enabled", bool(augment_kwargs)):
        try:
            augment = AugmentConfig(**augment_kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    train_kwargs = {k: v for k, v in values.items() if "." not in k}
    try:
        return TrainConfig(model=model, augment=augment, **train_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_synthetic_spec(path: str | Path) -> SyntheticSpec:
    values = _checked(parse_kv_file(path), _SYNTH_KEYS)
    mix = {
        k.split(".", 1)[1]: v for k, v in values.items() if k.startswith("polarity_mix.")
    }
    kwargs = {k: v for k, v in values.items() if "." not in k}
    if mix:
        kwargs["polarity_mix"] = mix
    return SyntheticSpec(**kwargs)
