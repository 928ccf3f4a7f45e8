"""Flat key = value run configuration.

Unknown keys are hard errors so a typo in a physics parameter cannot pass
silently.  `#` starts a comment; blank lines are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .errors import ParseError, ValidationError

__all__ = ["RunConfig", "parse_config", "config_from_dict"]

_MODELS = ("frw1", "frw2", "tov", "frw1_tov", "frw2_tov")


@dataclass
class RunConfig:
    model: str = "frw1_tov"
    r_min: float = 3.0
    r_max: float = 7.0
    r0: float = 5.0
    n: int = 2**14
    duration: float = 1.0
    reversed: bool = False
    sigma: float = 1.0 / 3.0
    eps: float = 1e-10
    snapshots: int = 5
    outdir: str = "out"
    t_start: float = 15.0   # pure models only; matched models derive it from r0
    b0: float = 1.0         # pure static model time scale
    psi0: float | None = None  # pure frw2; default keeps light speed 1 at start
    min_cells: int = 64     # floor for boundary chopping
    track_cones: bool = False

    def validate(self) -> "RunConfig":
        if self.model not in _MODELS:
            raise ValidationError(f"model must be one of {_MODELS}, got {self.model!r}")
        if self.n < 8:
            raise ValidationError(f"n must be at least 8, got {self.n}")
        if not self.r_min < self.r_max:
            raise ValidationError("r_min must be below r_max")
        if self.model.endswith("_tov") and not self.r_min < self.r0 < self.r_max:
            raise ValidationError(
                f"r0 must lie inside ({self.r_min}, {self.r_max}), got {self.r0}"
            )
        if not 0.0 < self.sigma < 1.0:
            raise ValidationError(f"sigma must lie in (0, 1), got {self.sigma}")
        if self.eps <= 0.0:
            raise ValidationError("eps must be positive")
        if self.duration <= 0.0:
            raise ValidationError("duration must be positive")
        if self.reversed and self.model != "frw1_tov":
            raise ValidationError("reversed runs are defined for model = frw1_tov")
        return self


_BOOLS = {"true": True, "false": False, "yes": True, "no": False, "1": True, "0": False}


def _coerce(name: str, kind, raw: str, line: int):
    raw = raw.strip()
    try:
        if kind is bool:
            if raw.lower() not in _BOOLS:
                raise ValueError(raw)
            return _BOOLS[raw.lower()]
        if kind is int:
            return int(raw)
        if kind is float or "float" in str(kind):
            return None if raw.lower() == "none" else float(raw)
        return raw
    except ValueError:
        raise ParseError(f"cannot parse {name} = {raw!r} as {kind}", line=line)


def config_from_dict(values: dict, lines: dict | None = None) -> RunConfig:
    known = {f.name: f.type for f in fields(RunConfig)}
    types = {
        "model": str, "outdir": str, "n": int, "snapshots": int,
        "min_cells": int, "reversed": bool, "track_cones": bool, "psi0": float,
    }
    cfg = RunConfig()
    for name, raw in values.items():
        if name not in known:
            raise ParseError(
                f"unknown key {name!r}",
                line=None if lines is None else lines.get(name),
            )
        kind = types.get(name, float)
        value = raw if not isinstance(raw, str) else _coerce(
            name, kind, raw, None if lines is None else lines.get(name)
        )
        setattr(cfg, name, value)
    return cfg.validate()


def parse_config(path: str) -> RunConfig:
    values: dict = {}
    lines: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ParseError(f"expected key = value, got {text!r}", line=lineno)
            key, _, val = text.partition("=")
            key = key.strip()
            if key in values:
                raise ParseError(f"duplicate key {key!r}", line=lineno)
            values[key] = val.strip()
            lines[key] = lineno
    return config_from_dict(values, lines)
