"""Shared domain types: couplings, switching schedules and run configuration.

Units are fixed throughout the package: hbar = 1 and the coupling J = 1 is
the energy unit, so time is measured in hbar/J.  Sweeps are parameterised by
the dimensionless coordinate ``x = J T / (pi hbar)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

HBAR = 1.0
J = 1.0


def total_time(x: float) -> float:
    """Protocol duration T (units of hbar/J) for scan coordinate x."""
    return math.pi * x * HBAR / J


def scan_coordinate(t_total: float) -> float:
    """Inverse of :func:`total_time`."""
    return J * t_total / (math.pi * HBAR)


@dataclass(frozen=True)
class CouplingModel:
    """Exchange coupling with anisotropy ``gamma`` on the sigma_z sigma_z term."""

    gamma: float

    def __post_init__(self):
        g = float(self.gamma)
        if not math.isfinite(g) or g < 0:
            raise DomainError(f"gamma must be finite and non-negative, got {self.gamma!r}")
        object.__setattr__(self, "gamma", g)

    @classmethod
    def from_name(cls, name: str) -> "CouplingModel":
        try:
            return PRESETS[name.lower()]
        except KeyError:
            raise DomainError(f"unknown coupling preset {name!r}; expected one of {sorted(PRESETS)}") from None

    @property
    def name(self) -> str:
        for key, preset in PRESETS.items():
            if preset.gamma == self.gamma:
                return key
        return f"gamma={self.gamma:g}"


XX = CouplingModel(0.0)
HEISENBERG = CouplingModel(1.0)
PRESETS = {"xx": XX, "heisenberg": HEISENBERG}


class ScheduleKind(enum.Enum):
    """Switching functions (f, g) of the normalised time s = t/T."""

    LINEAR = "linear"
    HARMONIC = "harmonic"
    QUAD_A = "quad-a"
    QUAD_B = "quad-b"

    def __call__(self, s):
        """Vectorised evaluation without domain checks; returns ``(f, g)``."""
        s = np.asarray(s, dtype=float)
        if self is ScheduleKind.LINEAR:
            return 1.0 - s, s
        if self is ScheduleKind.HARMONIC:
            return np.cos(0.5 * np.pi * s), np.sin(0.5 * np.pi * s)
        if self is ScheduleKind.QUAD_A:
            return 1.0 - s * s, s * (2.0 - s)
        return 1.0 - s * s, s * s

    @classmethod
    def from_name(cls, name: str) -> "ScheduleKind":
        key = name.lower().replace("_", "-")
        aliases = {"quada": "quad-a", "quadb": "quad-b"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise DomainError(
                f"unknown schedule {name!r}; expected one of {[k.value for k in cls]}"
            ) from None


def schedule_eval(kind: ScheduleKind, s: float) -> tuple[float, float]:
    """Return ``(f(s), g(s))`` for ``0 <= s <= 1``."""
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"normalised time s must lie in [0, 1], got {s}")
    f, g = kind(s)
    # Clip last-ulp rounding (cos(pi/2) ~ 6e-17) so boundary values are exact.
    if s == 1.0:
        return 0.0, 1.0
    return float(f), float(g)


def mixing_angle(f, g):
    """theta = atan2(g, f) in [0, pi/2]; well defined at f = 0."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if np.any(f < 0) or np.any(g < 0):
        raise DomainError("switching functions must be non-negative")
    if np.any((f == 0) & (g == 0)):
        raise DomainError("mixing angle undefined for f = g = 0")
    theta = np.arctan2(g, f)
    return float(theta) if theta.ndim == 0 else theta


def reference_steps(x: float) -> int:
    """Default RK4 step count: 1024 per unit of x, never fewer than 1024."""
    return max(1024, math.ceil(1024 * x))


@dataclass(frozen=True)
class SimulationConfig:
    """One teleportation run.

    ``steps=None`` selects :func:`reference_steps`.  ``tolerance`` bounds the
    max-abs difference between the run and the half-step-count rerun.
    """

    coupling: CouplingModel
    schedule: ScheduleKind
    jt_over_pi: float
    steps: int | None = None
    tolerance: float = 1e-6
    amplitudes: tuple[complex, complex] = field(default=(1.0 + 0j, 0j))

    def __post_init__(self):
        x = float(self.jt_over_pi)
        if not (math.isfinite(x) and x > 0):
            raise DomainError(f"jt_over_pi must be positive, got {self.jt_over_pi!r}")
        object.__setattr__(self, "jt_over_pi", x)
        if self.steps is not None and (int(self.steps) != self.steps or self.steps < 16):
            raise DomainError(f"steps must be an integer >= 16, got {self.steps!r}")
        if not self.tolerance > 0:
            raise DomainError("tolerance must be positive")
        a, b = (complex(v) for v in self.amplitudes)
        check_amplitudes(a, b)
        object.__setattr__(self, "amplitudes", (a, b))

    @property
    def t_total(self) -> float:
        return total_time(self.jt_over_pi)

    @property
    def resolved_steps(self) -> int:
        return int(self.steps) if self.steps is not None else reference_steps(self.jt_over_pi)


def check_amplitudes(a: complex, b: complex, tol: float = 1e-12) -> None:
    norm2 = abs(a) ** 2 + abs(b) ** 2
    if abs(norm2 - 1.0) > tol:
        raise DomainError(f"|a|^2 + |b|^2 must equal 1 (got {norm2!r})")
