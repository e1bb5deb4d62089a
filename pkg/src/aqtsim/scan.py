"""Infidelity sweeps over x = JT/(pi hbar), resonance refinement and envelope fit."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .adiabatic_frame import analytic_fidelity, is_exact_case
from .errors import DomainError
from .model import CouplingModel, ScheduleKind, SimulationConfig, reference_steps, total_time
from .propagator import evolve

DEFAULT_TOLERANCE = 1e-6
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ScanSeries:
    coupling: CouplingModel
    schedule: ScheduleKind
    grid: np.ndarray
    infidelity: np.ndarray
    fidelity: np.ndarray
    steps: np.ndarray
    tolerance: float
    analytic_fidelity: np.ndarray | None = None
    steps_override: int | None = None

    def __post_init__(self):
        inf = np.asarray(self.infidelity)
        # Values may sit a few ulps below zero at exact resonances.
        if np.any(inf < -1e-12) or np.any(inf > 1 + 1e-12):
            raise AssertionError("infidelity outside [0, 1]")


@dataclass(frozen=True)
class Dip:
    """A refined local minimum of the infidelity."""

    x: float
    infidelity: float
    local_envelope: float

    @property
    def depth(self) -> float:
        """Orders of magnitude below the smaller neighbouring envelope peak."""
        return math.log10(self.local_envelope / max(self.infidelity, 1e-300))


@dataclass(frozen=True)
class ResonanceReport:
    minima: list[Dip]
    envelope: list[tuple[float, float]]
    power_law_exponent: float | None
    power_law_prefactor: float | None
    threshold: float
    envelope_x_min: float = 5.0
    evaluations: int = field(default=0, compare=False)

    @property
    def resonances(self) -> list[Dip]:
        return [d for d in self.minima if d.infidelity <= self.threshold]


def infidelity_at(coupling, schedule, x, steps=None, tolerance=DEFAULT_TOLERANCE, check=True) -> float:
    """1 - F from one block-space RK4 run."""
    cfg = SimulationConfig(coupling, schedule, x, steps=steps, tolerance=tolerance)
    return 1.0 - evolve(cfg, "block", check=check).fidelity


def _grid_point(coupling, schedule, x, steps, tolerance):
    cfg = SimulationConfig(coupling, schedule, x, steps=steps, tolerance=tolerance)
    traj = evolve(cfg, "block")
    return traj.fidelity, traj.steps


def run_scan(
    coupling: CouplingModel,
    schedule: ScheduleKind,
    x_min: float,
    x_max: float,
    points: int,
    *,
    steps: int | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    workers: int = 1,
) -> ScanSeries:
    """Evaluate 1 - F on ``points`` evenly spaced x in [x_min, x_max].

    Grid points are independent; with ``workers > 1`` they run on a thread
    pool (the integrator releases the GIL) and are reassembled in grid order.
    """
    if not (0 < x_min < x_max) or not (math.isfinite(x_min) and math.isfinite(x_max)):
        raise DomainError(f"need 0 < x_min < x_max, got x_min={x_min}, x_max={x_max}")
    if int(points) != points or points < 2:
        raise DomainError("points must be an integer >= 2")
    grid = np.linspace(x_min, x_max, int(points))

    def task(x):
        return _grid_point(coupling, schedule, float(x), steps, tolerance)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, grid))
    else:
        results = [task(x) for x in grid]
    fid = np.array([r[0] for r in results])
    analytic = None
    if is_exact_case(coupling, schedule):
        analytic = analytic_fidelity(1.0, total_time(1.0) * grid)
    return ScanSeries(
        coupling=coupling,
        schedule=schedule,
        grid=grid,
        infidelity=1.0 - fid,
        fidelity=fid,
        steps=np.array([r[1] for r in results], dtype=np.int64),
        tolerance=tolerance,
        analytic_fidelity=analytic,
        steps_override=steps,
    )


def golden_section_minimize(func, lo, hi, xtol=1e-6, seed=None):
    """Golden-section search for a minimum of ``func`` on [lo, hi].

    Stops when the bracket is narrower than ``xtol``.  ``seed`` is an optional
    ``(x, f(x))`` pair already known; the best point seen overall is returned
    as ``(x, f(x), evaluations)``.
    """
    best = [(math.inf, None)]
    count = 0

    def probe(x):
        nonlocal count
        count += 1
        fx = func(x)
        if fx < best[0][0]:
            best[0] = (fx, x)
        return fx

    if seed is not None:
        best[0] = (seed[1], seed[0])
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = probe(c), probe(d)
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = probe(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = probe(d)
    fbest, xbest = best[0]
    return xbest, fbest, count


def _local_extrema(values):
    v = np.asarray(values)
    interior = np.arange(1, len(v) - 1)
    minima = interior[(v[1:-1] < v[:-2]) & (v[1:-1] <= v[2:])]
    maxima = interior[(v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])]
    return minima, maxima


def fit_power_law(xs, ys):
    """Least-squares fit of log y = p log x + log c; returns ``(p, c)``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    design = np.column_stack([np.log(xs), np.ones_like(xs)])
    (p, logc), *_ = np.linalg.lstsq(design, np.log(ys), rcond=None)
    return float(p), float(math.exp(logc))


def _refine(series, i, xtol):
    grid = series.grid
    lo, hi = float(grid[i - 1]), float(grid[i + 1])
    # One step count across the whole bracket keeps the objective smooth.
    steps = series.steps_override or reference_steps(hi)

    def objective(x):
        return infidelity_at(series.coupling, series.schedule, x, steps=steps, tolerance=series.tolerance)

    seed_x = float(grid[i])
    seed = (seed_x, objective(seed_x))
    x, fx, count = golden_section_minimize(objective, lo, hi, xtol=xtol, seed=seed)
    return x, fx, count + 1


def find_resonances(
    series: ScanSeries,
    threshold: float = 1e-6,
    xtol: float = 1e-6,
    envelope_x_min: float = 5.0,
    workers: int = 1,
) -> ResonanceReport:
    """Refine every grid minimum by golden-section search on fresh RK4 runs.

    Local maxima of the grid form the envelope; the power law is fitted to
    those with x >= ``envelope_x_min``.  Minima with refined infidelity at or
    below ``threshold`` are reported as resonances.
    """
    if len(series.grid) < 16:
        raise DomainError("find_resonances needs a series with at least 16 points")
    minima_idx, maxima_idx = _local_extrema(series.infidelity)

    def task(i):
        return _refine(series, int(i), xtol)

    if workers > 1 and len(minima_idx) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            refined = list(pool.map(task, minima_idx))
    else:
        refined = [task(i) for i in minima_idx]

    envelope = [(float(series.grid[i]), float(series.infidelity[i])) for i in maxima_idx]
    dips = []
    for i, (x, fx, _) in zip(minima_idx, refined):
        left = [v for k, v in zip(maxima_idx, series.infidelity[maxima_idx]) if k < i]
        right = [v for k, v in zip(maxima_idx, series.infidelity[maxima_idx]) if k > i]
        neighbours = ([left[-1]] if left else []) + ([right[0]] if right else [])
        local = min(neighbours) if neighbours else float(series.infidelity.max())
        dips.append(Dip(x=float(x), infidelity=float(fx), local_envelope=float(local)))
    dips.sort(key=lambda d: d.x)

    tail = [(x, y) for x, y in envelope if x >= envelope_x_min and y > 0]
    exponent = prefactor = None
    if len(tail) >= 2:
        exponent, prefactor = fit_power_law(*zip(*tail))
    return ResonanceReport(
        minima=dips,
        envelope=envelope,
        power_law_exponent=exponent,
        power_law_prefactor=prefactor,
        threshold=threshold,
        envelope_x_min=envelope_x_min,
        evaluations=sum(r[2] for r in refined),
    )
