"""Run configuration: a JSON document whose fields can be overridden by dotted names."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path

from .geometry import DEFAULT_K0, DEFAULT_KAPPA
from .kernels import wendland
from .quadrature import QuadConfig

DEFAULT_LEVELS = (6, 9, 12, 18, 24, 36)

# Largest c_r for which every default level keeps (A2) at n = 6, see the notes in the README.
DEFAULT_COUPLING = {0: (0.33, 2.0), 1: (0.6, 2.0), 2: (0.65, 2.0)}


@dataclass(frozen=True)
class Coupling:
    """``r = c_r h^(1-1/tau)``; ``k`` is ``c_k h^(1-1/tau)`` rounded up to ``1/K``."""

    c_r: float
    c_k: float
    k0: float = DEFAULT_K0
    kappa: float = DEFAULT_KAPPA

    def __post_init__(self):
        for name in ("c_r", "c_k", "k0", "kappa"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ValueError(f"coupling.{name} must be a positive number, got {v!r}")


@dataclass(frozen=True)
class LevelParams:
    n: int
    h: float
    r: float
    k: float
    k_clamped: bool


def level_params(n: int, tau, coupling: Coupling) -> LevelParams:
    """Scales ``(h, r, k)`` for a uniform grid with ``n`` intervals per side.

    ``k`` is the smallest ``1/K >= c_k h^(1-1/tau)``, then capped at ``k0``
    (flagged) and shrunk no further than needed to keep ``k > r``.
    """
    h = math.sqrt(2.0) / (2.0 * n)
    scale = h ** (1.0 - 1.0 / float(tau))
    r = coupling.c_r * scale
    K = max(1, math.floor(1.0 / (coupling.c_k * scale) + 1e-12))
    K_min = math.ceil(1.0 / coupling.k0 - 1e-12)
    clamped = K < K_min
    K = max(K, K_min)
    if 1.0 / K <= r:
        raise ValueError(f"no admissible k > r={r:.4g} with k <= k0={coupling.k0} at n={n}")
    return LevelParams(n, h, r, 1.0 / K, clamped)


@dataclass(frozen=True)
class InterpStudy:
    r: float = 0.25
    m: int = 1
    levels: tuple = (16, 32, 64)
    n_quad: int = 6
    center: tuple = (0.4, 0.55)
    width: float = 0.3


@dataclass(frozen=True)
class RunConfig:
    m: int = 1
    levels: tuple = DEFAULT_LEVELS
    coupling: Coupling | None = None
    quad: QuadConfig = field(default_factory=QuadConfig)
    quad_scale: float = 1.0
    fit_levels: int = 4
    load: float = 1.0
    out: str = "results"
    seed: int = 0
    interp: InterpStudy = field(default_factory=InterpStudy)

    def __post_init__(self):
        if self.m not in (0, 1, 2):
            raise ValueError(f"m must be 0, 1 or 2, got {self.m!r}")
        object.__setattr__(self, "levels", tuple(int(n) for n in self.levels))
        if self.coupling is None:
            object.__setattr__(self, "coupling", Coupling(*DEFAULT_COUPLING[self.m]))
        if self.fit_levels < 3:
            raise ValueError("extrapolation needs at least 3 levels")

    @property
    def kernel(self):
        return wendland(self.m)

    @property
    def tau(self) -> Fraction:
        return self.kernel.tau

    @property
    def quadrature(self) -> QuadConfig:
        return self.quad if self.quad_scale == 1.0 else self.quad.scaled(self.quad_scale)

    def level(self, n: int) -> LevelParams:
        return level_params(n, self.tau, self.coupling)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return _build(cls, data)

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def with_overrides(self, overrides: dict) -> "RunConfig":
        """Apply ``{"coupling.c_r": 0.5, ...}``; a new ``m`` resets the default coupling."""
        data = self.to_dict()
        if "m" in overrides and not any(k.startswith("coupling") for k in overrides):
            data["coupling"] = None
        for key, value in overrides.items():
            _set_dotted(data, key, value)
        return RunConfig.from_dict(data)


def _set_dotted(data: dict, key: str, value):
    parts = key.split(".")
    node = data
    for p in parts[:-1]:
        if node.get(p) is None:
            if p != "coupling":
                raise KeyError(f"unknown config field {key!r}")
            node[p] = asdict(Coupling(*DEFAULT_COUPLING[int(data.get("m", 1))]))
        node = node[p]
        if not isinstance(node, dict):
            raise KeyError(f"unknown config field {key!r}")
    if parts[-1] not in node:
        raise KeyError(f"unknown config field {key!r}")
    node[parts[-1]] = value


def _build(cls, data):
    if data is None:
        return None
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise KeyError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        sub = _NESTED.get((cls, name))
        if sub is not None and isinstance(value, dict):
            value = _build(sub, value)
        elif isinstance(value, list):
            value = tuple(value)
        kwargs[name] = value
    return cls(**kwargs)


_NESTED = {
    (RunConfig, "coupling"): Coupling,
    (RunConfig, "quad"): QuadConfig,
    (RunConfig, "interp"): InterpStudy,
}
