"""Flat ``key = value`` run configuration."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .maps import CATALOG

_LISTS = {"functions", "rho_list", "r_list", "delta_list", "r0_list", "chain_r0_list"}
_BOOLS = {"record", "strict", "series_certified", "series_override", "chain"}
_STRS = {"out", "series_file", "golden_dir"}


@dataclass
class RunConfig:
    """Everything a CLI run depends on.  Radii are validated into (0, 1)."""

    functions: list = field(default_factory=lambda: list(CATALOG))
    series_file: str = ""
    series_certified: bool = False
    series_override: bool = False
    rho_list: list = field(default_factory=lambda: [0.9, 0.99])
    # slab and transport checks run at this rho
    rho: float = 0.9
    r_list: list = field(default_factory=lambda: [0.3, 0.5, 0.7])
    delta_list: list = field(default_factory=lambda: [0.05, 0.025])
    prop3_r: float = 0.5
    r0: float = 0.1
    r0_list: list = field(default_factory=lambda: [0.2, 0.1, 0.05])
    prop4_rho: float = 0.95
    prop4_delta: float = 0.05
    eq5_rho: float = 0.9
    eq5_r1: float = math.nan  # nan: 0.55 * eq5_rho
    eq5_r2: float = math.nan  # nan: 0.65 * eq5_rho
    eq5_samples: int = 3
    chain: bool = True
    chain_rho: float = 0.99
    chain_r1: float = 0.5
    chain_r2: float = 0.9
    chain_r0_list: list = field(default_factory=lambda: [0.2, 0.1, 0.05])
    curve_tol: float = 1e-5
    line_abs_tol: float = 1e-8
    area_abs_tol: float = 1e-5
    prop4_tol: float = 1e-4
    lift_tol: float = 1e-9
    t_floor: float = 0.01
    prop3_floor: float = 0.45
    minkowski_samples: int = 1000
    seed: int = 20240601
    out: str = "vertcover_out"
    golden_dir: str = ""
    record: bool = False
    strict: bool = False

    def __post_init__(self):
        self.validate()

    @property
    def eq5_interval(self):
        r1 = 0.55 * self.eq5_rho if math.isnan(self.eq5_r1) else self.eq5_r1
        r2 = 0.65 * self.eq5_rho if math.isnan(self.eq5_r2) else self.eq5_r2
        return r1, r2

    def validate(self):
        for name in ("rho_list", "r_list", "delta_list", "r0_list", "chain_r0_list"):
            vals = getattr(self, name)
            if not vals:
                raise ConfigError(f"{name} is empty")
            setattr(self, name, sorted(float(v) for v in vals))
        if not self.functions:
            raise ConfigError("functions is empty")
        for fn in self.functions:
            if fn not in CATALOG and fn != "series":
                raise ConfigError(f"unknown function {fn!r}")
        if "series" in self.functions and not self.series_file:
            raise ConfigError("function 'series' needs series_file")
        radii = (self.rho_list + self.r_list + self.r0_list + self.chain_r0_list +
                 [self.rho, self.prop3_r, self.r0, self.prop4_rho, self.eq5_rho, self.chain_rho,
                  self.chain_r1, self.chain_r2, *self.eq5_interval])
        for r in radii:
            if not 0 < r < 1:
                raise ConfigError(f"radius {r} outside (0, 1)")
        if any(d <= 0 for d in self.delta_list) or self.prop4_delta <= 0:
            raise ConfigError("delta must be positive")
        if max(self.r_list) >= self.rho or self.prop3_r >= self.rho:
            raise ConfigError("r values must lie below rho")
        r1, r2 = self.eq5_interval
        if not r1 < r2 < self.eq5_rho:
            raise ConfigError("need eq5_r1 < eq5_r2 < eq5_rho")
        if not self.chain_r1 < self.chain_r2 < self.chain_rho:
            raise ConfigError("need chain_r1 < chain_r2 < chain_rho")
        for name in ("curve_tol", "line_abs_tol", "area_abs_tol", "prop4_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")

    def to_dict(self):
        d = dataclasses.asdict(self)
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()}


def _convert(key, raw, ftype):
    raw = raw.strip()
    try:
        if key in _LISTS:
            items = [x.strip() for x in raw.split(",") if x.strip()]
            return items if key == "functions" else [float(x) for x in items]
        if key in _BOOLS:
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if key in _STRS:
            return raw
        if ftype in ("int", int):
            return int(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_config(text):
    """Parse ``key = value`` lines (``#`` starts a comment) into a :class:`RunConfig`."""
    fields = {f.name: f.type for f in dataclasses.fields(RunConfig)}
    kw = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in fields:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        kw[key] = _convert(key, val, fields[key])
    return RunConfig(**kw)


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
