"""Run configuration: INI sections mapped onto frozen dataclasses.

Every key has a default, so an empty file is a valid config. Unknown sections
or keys and unparsable values raise ``ConfigError`` naming the line and field.
"""
from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError
from .evolution import IntegratorConfig
from .hartree import Params
from .spectral import Grid

__all__ = [
    "GridConfig",
    "InitialData",
    "PotentialConfig",
    "GroundStateConfig",
    "OutputConfig",
    "SweepConfig",
    "CheckConfig",
    "RunConfig",
    "load_config",
    "parse_config",
    "reference_text",
]


@dataclass(frozen=True)
class GridConfig:
    n_per_axis: int = 64
    box_length: float = 16.0
    dim: int = 3

    def build(self) -> Grid:
        return Grid(self.n_per_axis, self.box_length, self.dim)


@dataclass(frozen=True)
class ParamsConfig:
    m: float = 0.0
    lam: float = -1.0
    mu: float = 0.0

    def build(self) -> Params:
        return Params(self.m, self.lam, self.mu)


@dataclass(frozen=True)
class InitialData:
    """``gaussian`` (width, mass), ``ground_state_scaled`` (mass_ratio, a) or ``from_file`` (path)."""

    kind: str = "gaussian"
    width: float = 1.2
    mass: float = 1.0
    mass_ratio: float = 0.5
    a: float = 1.0
    path: str = ""

    def __post_init__(self):
        if self.kind not in ("gaussian", "ground_state_scaled", "from_file"):
            raise ValueError(f"unknown initial data kind {self.kind!r}")
        if self.width <= 0 or self.mass < 0 or self.mass_ratio < 0 or self.a <= 0:
            raise ValueError("width and a must be positive, mass and mass_ratio nonnegative")
        if self.kind == "from_file" and not self.path:
            raise ValueError("from_file needs a path")


@dataclass(frozen=True)
class PotentialConfig:
    """``vplus``: none | power | exponential | file; ``vminus``: none | coulomb_like | file."""

    vplus: str = "none"
    beta: float = 2.0
    scale: float = 1.0
    clip: float = 10.0
    vplus_path: str = ""
    vminus: str = "none"
    c: float = 0.0
    eps: float = 0.0
    d: float = 0.0
    vminus_path: str = ""
    n_probes: int = 40

    def __post_init__(self):
        if self.vplus not in ("none", "power", "exponential", "file"):
            raise ValueError(f"unknown vplus {self.vplus!r}")
        if self.vminus not in ("none", "coulomb_like", "file"):
            raise ValueError(f"unknown vminus {self.vminus!r}")

    @property
    def active(self) -> bool:
        return self.vplus != "none" or self.vminus != "none"


@dataclass(frozen=True)
class GroundStateConfig:
    """Grid and solver settings for the threshold profile; ``path`` loads a saved one."""

    n_per_axis: int = 64
    box_length: float = 32.0
    tol: float = 1e-8
    max_iter: int = 500
    path: str = ""

    def build_grid(self, dim: int = 3) -> Grid:
        return Grid(self.n_per_axis, self.box_length, dim)


@dataclass(frozen=True)
class OutputConfig:
    csv: str = "timeseries.csv"
    seed: int = 0


@dataclass(frozen=True)
class SweepConfig:
    ratios: tuple[float, ...] = (0.5, 0.8, 1.5, 2.0)
    workers: int = 0


@dataclass(frozen=True)
class CheckConfig:
    n_fields: int = 100
    n_per_axis: int = 64
    box_length: float = 16.0
    n_bumps: int = 50
    n_lipschitz: int = 8
    groundstate: bool = True


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    params: ParamsConfig = field(default_factory=ParamsConfig)
    initial: InitialData = field(default_factory=InitialData)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    groundstate: GroundStateConfig = field(default_factory=GroundStateConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    check: CheckConfig = field(default_factory=CheckConfig)


_SECTIONS = {f.name: f.default_factory for f in fields(RunConfig)}
# the file writes "lambda", the dataclass field is "lam"
_ALIASES = {("params", "lambda"): "lam"}


def _field_types(cls) -> dict[str, str]:
    return {f.name: str(f.type) for f in fields(cls)}


def _convert(raw: str, typ: str):
    raw = raw.strip()
    if typ == "bool":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if typ == "int":
        return int(raw)
    if typ == "float":
        return float(raw)
    if typ == "float | None":
        return None if raw.lower() in ("", "none") else float(raw)
    if typ.startswith("tuple"):
        return tuple(float(x) for x in raw.split(",") if x.strip())
    return raw


def _line_numbers(text: str) -> dict[tuple[str, str], int]:
    out, section = {}, None
    for no, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip().lower()
            out[(section, "")] = no
        elif section and s and not s.startswith(("#", ";")) and ("=" in s or ":" in s):
            key = re.split(r"[=:]", s, maxsplit=1)[0].strip().lower()
            out[(section, key)] = no
    return out


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    lines = _line_numbers(text)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    parts = {}
    for sec in cp.sections():
        key = sec.lower()
        where = f"{source}:{lines.get((key, ''), '?')}"
        if key not in _SECTIONS:
            raise ConfigError(f"{where}: unknown section [{sec}]")
        cls = type(_SECTIONS[key]())
        types = _field_types(cls)
        kwargs = {}
        for name, raw in cp.items(sec):
            attr = _ALIASES.get((key, name), name)
            where = f"{source}:{lines.get((key, name), '?')}"
            if attr not in types:
                raise ConfigError(f"{where}: unknown field {key}.{name}")
            try:
                kwargs[attr] = _convert(raw, types[attr])
            except ValueError as exc:
                raise ConfigError(f"{where}: bad value for {key}.{name}: {exc}") from exc
        try:
            parts[key] = cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{source}:{lines.get((key, ''), '?')}: section [{sec}]: {exc}") from exc
    return RunConfig(**parts)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


def reference_text() -> str:
    """A complete config listing every key at its default value."""
    cfg = RunConfig()
    out = []
    for sec in _SECTIONS:
        out.append(f"[{sec}]")
        part = getattr(cfg, sec)
        for f in fields(part):
            name = "lambda" if (sec, f.name) == ("params", "lam") else f.name
            val = getattr(part, f.name)
            if isinstance(val, tuple):
                val = ", ".join(f"{x:g}" for x in val)
            elif val is None:
                val = "none"
            out.append(f"{name} = {val}")
        out.append("")
    return "\n".join(out)
