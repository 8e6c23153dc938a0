"""Run configuration: sectioned ``key = value`` text files.

Example::

    [lattice]
    v_xy = 36
    z_f = 0.1
    theta_z = pi/2

    [kick]
    enabled = true
    strength_m = 10
    rate_hz = 100

Angles accept arithmetic in ``pi``.  Unknown sections or keys are errors.
"""

from __future__ import annotations

import ast
import configparser
import math
import operator
import re
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from .decoherence import EMISSION_PATTERNS, KickParams
from .dynamics import DEFAULT_DT, DEFAULT_RECORD_POINTS, init_grid
from .ensemble import INITIAL_KINDS, EnsembleConfig, InitialState
from .errors import BadDomain, ParseError, ValidationError
from .lattice import (
    DEFAULT_ER_QUOTE_HZ,
    ER_CONVENTIONS,
    LatticeParams,
    convert_rate,
    er_frequency_from_quote,
)
from .spectral import DEFAULT_N_LEVELS, DEFAULT_N_MAX, SuperpositionSpec


@dataclass(frozen=True)
class LatticeBlock:
    v_xy: float = 36.0
    z_f: float = 0.1
    theta_xy: float = 0.0
    theta_z: float = math.pi / 2
    phi_xy: float = 0.0
    phi_z: float = 0.0
    er_quote_hz: float = DEFAULT_ER_QUOTE_HZ
    er_convention: str = "hbar"

    def params(self) -> LatticeParams:
        return LatticeParams(
            v_xy=self.v_xy,
            z_f=self.z_f,
            theta_xy=self.theta_xy,
            theta_z=self.theta_z,
            phi_xy=self.phi_xy,
            phi_z=self.phi_z,
            er_frequency=er_frequency_from_quote(self.er_quote_hz, self.er_convention),
        )


@dataclass(frozen=True)
class GridBlock:
    x_min: float = -9.75
    x_max: float = 10.25
    n_points: int = 512


@dataclass(frozen=True)
class SpectrumBlock:
    n_max: int = DEFAULT_N_MAX
    n_levels: int = DEFAULT_N_LEVELS


@dataclass(frozen=True)
class PropagationBlock:
    dt: float = DEFAULT_DT
    t_final: float = 40.0
    # Steps between records; 0 means DEFAULT_RECORD_POINTS records per run.
    n_record: int = 0

    def record_every(self) -> int:
        if self.n_record:
            return self.n_record
        return max(1, round(self.t_final / self.dt) // DEFAULT_RECORD_POINTS)


@dataclass(frozen=True)
class InitialStateBlock:
    kind: str = "L"
    sigma: float = 0.1
    center: float = 0.0
    coefficients: tuple = ()

    def state(self) -> InitialState:
        coeffs = SuperpositionSpec(tuple(self.coefficients)) if self.coefficients else None
        return InitialState(self.kind, self.sigma, self.center, coeffs)


@dataclass(frozen=True)
class KickBlock:
    enabled: bool = False
    strength_m: float = 10.0
    rate_hz: Optional[float] = None
    rate_dimensionless: Optional[float] = None
    emission: str = "isotropic"

    def params(self, lattice: LatticeParams) -> KickParams:
        if self.rate_hz is not None:
            rate = convert_rate(lattice, self.rate_hz)
        elif self.rate_dimensionless is not None:
            rate = self.rate_dimensionless
        else:
            rate = 0.0
        return KickParams(self.strength_m, rate, self.enabled, self.emission)


@dataclass(frozen=True)
class EnsembleBlock:
    n_trajectories: int = 50
    base_seed: int = 0
    workers: int = 1


@dataclass(frozen=True)
class OutputBlock:
    directory: str = "."
    format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    lattice: LatticeBlock = field(default_factory=LatticeBlock)
    grid: GridBlock = field(default_factory=GridBlock)
    spectrum: SpectrumBlock = field(default_factory=SpectrumBlock)
    propagation: PropagationBlock = field(default_factory=PropagationBlock)
    initial_state: InitialStateBlock = field(default_factory=InitialStateBlock)
    kick: KickBlock = field(default_factory=KickBlock)
    ensemble: EnsembleBlock = field(default_factory=EnsembleBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    def lattice_params(self) -> LatticeParams:
        return self.lattice.params()

    def kick_params(self) -> KickParams:
        return self.kick.params(self.lattice_params())

    def ensemble_config(self) -> EnsembleConfig:
        return EnsembleConfig(
            t_final=self.propagation.t_final,
            n_trajectories=self.ensemble.n_trajectories,
            base_seed=self.ensemble.base_seed,
            n_record=self.propagation.record_every(),
            initial_state=self.initial_state.state(),
            kick=self.kick_params(),
            workers=self.ensemble.workers,
        )

    def with_updates(self, section: str, **changes) -> "RunConfig":
        return replace(self, **{section: replace(getattr(self, section), **changes)})


SECTIONS = {f.name: f.default_factory for f in fields(RunConfig)}

# -- value parsing ---------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv, ast.Pow: operator.pow}


def _eval_number(text: str) -> float:
    """Evaluate a float literal or arithmetic in ``pi``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(f"unsupported expression {text!r}")

    return ev(ast.parse(text.strip(), mode="eval"))


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        pass
    v = _eval_number(text)
    if v != int(v):
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


def _parse_coefficients(text: str) -> tuple:
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        level, _, value = item.partition(":")
        if not value:
            raise ValueError(f"coefficient {item!r} must look like 'level:value'")
        out.append((int(level), complex(value.replace(" ", ""))))
    return tuple(out)


def _format_complex(c: complex) -> str:
    c = complex(c)
    if c.imag == 0:
        return repr(c.real)
    if c.real == 0:
        return f"{c.imag!r}j"
    return f"{c.real!r}{c.imag:+}j"


_OPTIONAL_FLOATS = {("kick", "rate_hz"), ("kick", "rate_dimensionless")}


def _converter(section: str, name: str, default):
    if (section, name) in _OPTIONAL_FLOATS:
        return _eval_number
    if section == "initial_state" and name == "coefficients":
        return _parse_coefficients
    if isinstance(default, bool):
        return _parse_bool
    if isinstance(default, int):
        return _parse_int
    if isinstance(default, float):
        return _eval_number
    return str.strip


def _locate(text: str, section: str, key: Optional[str] = None) -> Optional[int]:
    current = None
    for i, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return i
            continue
        if key is not None and current == section:
            m = re.match(r"\s*([A-Za-z0-9_]+)\s*[=:]", line)
            if m and m.group(1) == key:
                return i
    return None


def parse_config(text: str) -> RunConfig:
    """Parse and validate a run configuration.

    Raises :class:`ParseError` for malformed text or unknown names and
    :class:`ValidationError` for values that violate a module invariant.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ParseError(str(exc).splitlines()[0], line=getattr(exc, "lineno", None)) from exc

    blocks = {}
    for section in cp.sections():
        if section not in SECTIONS:
            raise ParseError(f"unknown section [{section}]", line=_locate(text, section))
        base = SECTIONS[section]()
        known = {f.name: getattr(base, f.name) for f in fields(base)}
        values = {}
        for key, raw in cp.items(section):
            if key not in known:
                raise ParseError(f"unknown key in [{section}]", line=_locate(text, section, key), key=key)
            try:
                values[key] = _converter(section, key, known[key])(raw)
            except (ValueError, SyntaxError) as exc:
                raise ParseError(f"bad value {raw!r}: {exc}", line=_locate(text, section, key), key=key) from exc
        blocks[section] = replace(base, **values)
    cfg = RunConfig(**blocks)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> RunConfig:
    """Check every block against its module invariants; returns ``cfg``."""
    lat = cfg.lattice
    if lat.er_convention not in ER_CONVENTIONS:
        raise ValidationError("lattice.er_convention", f"must be one of {ER_CONVENTIONS}")
    if not lat.er_quote_hz > 0:
        raise ValidationError("lattice.er_quote_hz", "must be positive")
    if not 0.0 <= lat.z_f <= 1.0:
        raise ValidationError("z_f", f"must lie in [0, 1], got {lat.z_f}")
    if not lat.v_xy > 0:
        raise ValidationError("v_xy", f"must be positive, got {lat.v_xy}")
    params = cfg.lattice_params()

    try:
        init_grid(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n_points)
    except BadDomain as exc:
        raise ValidationError("grid", str(exc)) from exc
    if cfg.spectrum.n_max < 2:
        raise ValidationError("spectrum.n_max", "must be >= 2")
    if not 1 <= cfg.spectrum.n_levels <= 2 * cfg.spectrum.n_max + 1:
        raise ValidationError("spectrum.n_levels", "must lie between 1 and the basis size")

    prop = cfg.propagation
    if not prop.dt > 0:
        raise ValidationError("propagation.dt", "must be positive")
    if not prop.t_final > 0:
        raise ValidationError("propagation.t_final", "must be positive")
    n = round(prop.t_final / prop.dt)
    if abs(n * prop.dt - prop.t_final) > 1e-9 * max(1.0, prop.t_final):
        raise ValidationError("propagation.t_final", "must be an integer multiple of dt")
    if prop.n_record < 0:
        raise ValidationError("propagation.n_record", "must be >= 0")

    init = cfg.initial_state
    if init.kind not in INITIAL_KINDS:
        raise ValidationError("initial_state.kind", f"must be one of {INITIAL_KINDS}")
    if init.kind == "gaussian":
        if not init.sigma > 0:
            raise ValidationError("initial_state.sigma", "must be positive")
        if not cfg.grid.x_min <= init.center < cfg.grid.x_max:
            raise ValidationError("initial_state.center", "must lie inside the domain")
    if init.kind == "coefficients":
        if not init.coefficients:
            raise ValidationError("initial_state.coefficients", "required for kind 'coefficients'")
        if max(l for l, _ in init.coefficients) >= 2 * cfg.spectrum.n_max + 1:
            raise ValidationError("initial_state.coefficients", "level index beyond the basis")

    kick = cfg.kick
    if kick.rate_hz is not None and kick.rate_dimensionless is not None:
        raise ValidationError("kick.rate", "give exactly one of rate_hz and rate_dimensionless")
    if kick.enabled and kick.rate_hz is None and kick.rate_dimensionless is None:
        raise ValidationError("kick.rate", "enabled kicks need rate_hz or rate_dimensionless")
    for name in ("rate_hz", "rate_dimensionless"):
        v = getattr(kick, name)
        if v is not None and not v >= 0:
            raise ValidationError(f"kick.{name}", "must be non-negative")
    if not kick.strength_m > 0:
        raise ValidationError("kick.strength_m", "must be positive")
    if kick.emission not in EMISSION_PATTERNS:
        raise ValidationError("kick.emission", f"must be one of {EMISSION_PATTERNS}")
    kick.params(params)

    ens = cfg.ensemble
    if ens.n_trajectories < 1:
        raise ValidationError("ensemble.n_trajectories", "must be >= 1")
    if ens.workers < 1:
        raise ValidationError("ensemble.workers", "must be >= 1")
    if cfg.output.format != "csv":
        raise ValidationError("output.format", "only 'csv' is supported")
    return cfg


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(f"{l}:{_format_complex(c)}" for l, c in v)
    return str(v)


def serialize_config(cfg: RunConfig, skip: tuple = ()) -> str:
    """Canonical text form; ``parse_config(serialize_config(c)) == c``.

    ``skip`` names ``section`` or ``section.key`` entries to leave out.
    """
    lines = []
    for section in SECTIONS:
        if section in skip:
            continue
        block = getattr(cfg, section)
        body = []
        for f in fields(block):
            v = getattr(block, f.name)
            if v is None or f"{section}.{f.name}" in skip:
                continue
            if isinstance(v, tuple) and not v:
                continue
            body.append(f"{f.name} = {_format_value(v)}")
        if body:
            lines.append(f"[{section}]")
            lines.extend(body)
            lines.append("")
    return "\n".join(lines)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())
