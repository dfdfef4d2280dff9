"""Flat key=value experiment configuration: diff-able, strict, lossless.

Unknown keys are rejected by name.  Values are plain scalars; lengths may
use an `*pi` suffix (e.g. ``box_length = 800*pi``) since periodic boxes are
naturally multiples of pi.  Full round trip through text is exact: floats
are written with 17 significant digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

from .dynamics import RunConfig

__all__ = ["ExperimentConfig", "ConfigError", "parse_config", "format_config"]


class ConfigError(ValueError):
    pass


_BOOL = {"true": True, "false": False, "1": True, "0": False,
         "yes": True, "no": False, "on": True, "off": False}


@dataclass
class ExperimentConfig:
    """RunConfig plus reproducibility plumbing."""

    run: RunConfig
    label: str = "run"
    seed: int = 1234
    scattering: bool = True

    def validate(self):
        if not self.label or any(c in self.label for c in "/\\ \t\n"):
            raise ConfigError(f"label {self.label!r} is not filesystem-safe")
        try:
            self.run.validate()
        except Exception as exc:
            raise ConfigError(str(exc)) from exc


_RUN_KEYS = {
    "num_points": int,
    "box_length": float,
    "amplitude": float,
    "packet_width": float,
    "carrier": float,
    "dt": float,
    "t_final": float,
    "formulation": str,
    "electric_field": bool,          # maps to electric_field_on
    "diag_interval": float,
    "n_sob": int,
    "n1_sob": int,
    "p0": float,
    "nonlinear": bool,
    "allow_wraparound": bool,
}
_TOP_KEYS = {"label": str, "seed": int, "scattering": bool}
_KEY_TO_ATTR = {"electric_field": "electric_field_on"}


def _parse_value(key: str, raw: str, typ):
    raw = raw.strip()
    try:
        if typ is bool:
            if raw.lower() not in _BOOL:
                raise ValueError(f"not a boolean: {raw!r}")
            return _BOOL[raw.lower()]
        if typ is int:
            return int(raw)
        if typ is float:
            if raw.endswith("*pi"):
                return float(raw[:-3]) * math.pi
            if raw == "pi":
                return math.pi
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for key {key!r}: {raw!r} ({exc})") from exc


def parse_config(text: str) -> ExperimentConfig:
    run_kwargs = {}
    top_kwargs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in _RUN_KEYS:
            attr = _KEY_TO_ATTR.get(key, key)
            run_kwargs[attr] = _parse_value(key, raw, _RUN_KEYS[key])
        elif key in _TOP_KEYS:
            top_kwargs[key] = _parse_value(key, raw, _TOP_KEYS[key])
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    cfg = ExperimentConfig(run=RunConfig(**run_kwargs), **top_kwargs)
    return cfg


def format_config(cfg: ExperimentConfig) -> str:
    lines = [f"label = {cfg.label}", f"seed = {cfg.seed}",
             f"scattering = {'true' if cfg.scattering else 'false'}"]
    attr_to_key = {v: k for k, v in _KEY_TO_ATTR.items()}
    for f in fields(RunConfig):
        if f.name in ("store_fields",):
            continue
        key = attr_to_key.get(f.name, f.name)
        if key not in _RUN_KEYS and f.name not in _KEY_TO_ATTR.values():
            continue
        val = getattr(cfg.run, f.name)
        if isinstance(val, bool):
            lines.append(f"{key} = {'true' if val else 'false'}")
        elif isinstance(val, float):
            lines.append(f"{key} = %.17g" % val)
        else:
            lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = parse_config(text)
    cfg.validate()
    return cfg
