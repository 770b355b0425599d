"""Run configuration and the single table of numerical tolerances.

Every tolerance used by the library lives in :class:`Tolerances`; modules read
the process-wide instance through :func:`tol`.  The CLI may override entries
(``--tol NAME=VALUE``) via :func:`set_tolerances`.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ValidationError


@dataclass(frozen=True)
class Tolerances:
    # lorentz_core
    hyperboloid: float = 1e-10
    unit_normal: float = 1e-10
    spacelike_input: float = 1e-8
    unimodular: float = 1e-10
    hyperbolic_trace: float = 1e-10
    iso21: float = 1e-9
    crossing_degenerate: float = 1e-12
    ads_unit: float = 1e-9
    ads_disjoint: float = 1e-6
    # surface_curves / enumeration
    leaf_merge: float = 1e-7
    prune_slack: float = 1.0
    max_segment: float = 14.0
    # teichmueller
    relator: float = 1e-9
    min_length: float = 1e-8
    max_length: float = 50.0
    fd_step: float = 1e-5
    # earthquake
    relator_broken: float = 1e-6
    infinitesimal_step: float = 1e-4
    max_quake_time: float = 4.0
    perturb: float = 1e-6
    perturb_retries: int = 5
    # fixed_point
    grad_tol: float = 1e-7
    max_iterations: int = 500
    escape_low: float = 1e-4
    escape_high: float = 30.0
    newton_tol: float = 1e-7
    newton_max_iter: int = 25
    newton_halvings: int = 8
    jacobian_step: float = 1e-5
    direct_tol: float = 1e-6
    # flat_cocycles
    cocycle: float = 1e-8
    max_condition: float = 1e12

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
                raise ValidationError(f"tolerance {f.name} must be a positive finite number, got {value!r}")

    def updated(self, **changes) -> "Tolerances":
        unknown = set(changes) - {f.name for f in fields(self)}
        if unknown:
            raise ValidationError(f"unknown tolerance(s): {sorted(unknown)}")
        coerced = {}
        for f in fields(self):
            if f.name in changes:
                coerced[f.name] = type(getattr(self, f.name))(changes[f.name])
        return replace(self, **coerced)


_ACTIVE = Tolerances()


def tol() -> Tolerances:
    return _ACTIVE


def set_tolerances(new: Tolerances) -> Tolerances:
    """Install ``new`` as the active table and return the previous one."""
    global _ACTIVE
    old, _ACTIVE = _ACTIVE, new
    return old


DEFAULT_BASE_POINT = (0.1, 0.07, math.sqrt(1.0 + 0.1**2 + 0.07**2))


@dataclass(frozen=True)
class Config:
    genus: int = 2
    pants_decomposition: str = "standard"
    depth: int = 8
    max_depth: int = 14
    base_point: tuple = DEFAULT_BASE_POINT
    seed: int = 20100401
    output_dir: str = "out"
    t_steps: int = 32
    multistart: int = 5
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if self.genus < 2:
            raise ValidationError(f"genus must be >= 2, got {self.genus}")
        if self.depth < 1 or self.max_depth < self.depth:
            raise ValidationError("need 1 <= depth <= max_depth")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        x1, x2, x3 = self.base_point
        if abs(x1 * x1 + x2 * x2 - x3 * x3 + 1.0) > 1e-10 or x3 <= 0:
            raise ValidationError("base_point must lie on the upper hyperboloid sheet")


_INT_KEYS = {"genus", "depth", "max_depth", "seed", "t_steps", "multistart"}
_STR_KEYS = {"pants_decomposition", "output_dir"}


def parse_config_text(text: str) -> Config:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Tolerances are given as ``tol.NAME = VALUE``; the base point as three
    comma-separated floats.
    """
    values: dict = {}
    tol_changes: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key.startswith("tol."):
            tol_changes[key[4:]] = float(value)
        elif key in _INT_KEYS:
            values[key] = int(value)
        elif key in _STR_KEYS:
            values[key] = value
        elif key == "base_point":
            pt = tuple(float(v) for v in value.split(","))
            if len(pt) != 3:
                raise ValidationError("base_point needs three components")
            values[key] = pt
        else:
            raise ValidationError(f"config line {lineno}: unknown key {key!r}")
    try:
        values["tolerances"] = Tolerances().updated(**tol_changes)
        return Config(**values)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(str(exc)) from exc


def load_config(path) -> Config:
    return parse_config_text(Path(path).read_text())


def config_to_dict(cfg: Config) -> dict:
    out = dataclasses.asdict(cfg)
    out["base_point"] = list(cfg.base_point)
    return out
