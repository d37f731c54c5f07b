"""Config loading: defaults < file < command-line overrides."""

from __future__ import annotations

import dataclasses
import json
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError
from .experiments import ExperimentConfig

_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_INT_TUPLES = {"n_grid"}
_FLOAT_TUPLES = {"spectrum_a"}


def _as_float(key, v):
    if isinstance(v, bool):
        raise ConfigError(f"{key}: expected a number, got {v!r}")
    if isinstance(v, (int, float)):
        return float(v)
    try:
        return float(Fraction(str(v).strip()))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{key}: expected a number, got {v!r}") from None


def _as_int(key, v):
    if isinstance(v, bool):
        raise ConfigError(f"{key}: expected an integer, got {v!r}")
    if isinstance(v, int):
        return v
    if isinstance(v, float) and v.is_integer():
        return int(v)
    try:
        return int(str(v).strip())
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {v!r}") from None


def _as_list(key, v):
    if isinstance(v, (list, tuple)):
        return list(v)
    if isinstance(v, str):
        text = v.strip()
        if text.startswith("["):
            try:
                return list(json.loads(text))
            except json.JSONDecodeError:
                raise ConfigError(f"{key}: malformed list {v!r}") from None
        return [p for p in text.split(",") if p.strip()]
    raise ConfigError(f"{key}: expected a list, got {v!r}")


def coerce(key, value):
    """Convert a raw (string or JSON) value to the type of config field ``key``."""
    if key not in _FIELDS:
        raise ConfigError(f"{key}: unknown config key")
    if key in _INT_TUPLES:
        return tuple(_as_int(key, x) for x in _as_list(key, value))
    if key in _FLOAT_TUPLES:
        return tuple(_as_float(key, x) for x in _as_list(key, value))
    default = _FIELDS[key].default
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value.strip()
    if isinstance(default, int):
        return _as_int(key, value)
    return _as_float(key, value)


def parse_text(text):
    """Parse a JSON object or flat ``key = value`` lines (``#`` starts a comment)."""
    stripped = text.strip()
    if not stripped:
        return {}
    if stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError("config file: JSON must be an object")
        return data
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config file line {lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def parse_overrides(pairs):
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise ConfigError(f"{item}: overrides must look like key=value")
        key, value = item.split("=", 1)
        out[key.strip()] = value
    return out


def load_config(path=None, overrides=None, mode="rate"):
    """Build and validate an ExperimentConfig.

    ``overrides`` may be a dict or a list of ``key=value`` strings.
    """
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"config file {path}: {exc.strerror}") from None
        for key, value in parse_text(text).items():
            values[key] = coerce(key, value)
    if overrides:
        if not isinstance(overrides, dict):
            overrides = parse_overrides(overrides)
        for key, value in overrides.items():
            values[key] = coerce(key, value)
    return ExperimentConfig(**values).validate(mode)
