"""Time-dependent Schroedinger propagation, teleportation states and fidelity.

The integrator is the classical fixed-step RK4 applied to
``d psi/dt = -i (f(t) H_i + g(t) H_f) psi`` (hbar = 1).  The state is never
renormalised; the largest norm deviation seen over all steps is reported as
the health metric.  Every run is repeated with half the step count and the
two endpoints compared (step-halving check).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import DomainError, UnconvergedError
from .hamiltonian import (
    SECTOR_INDICES,
    block_generators,
    embed_block,
    final_coupling,
    initial_coupling,
    sz_operator,
)
from .model import SimulationConfig, check_amplitudes

SUDDEN_LIMIT_X = 1e-6

_SQRT2 = math.sqrt(2.0)
# Sector coordinates of the singlet on qubits (2,3) and on qubits (1,2).
BLOCK_INITIAL = np.array([0.0, -1.0, 1.0], dtype=complex) / _SQRT2
BLOCK_TARGET = np.array([-1.0, 1.0, 0.0], dtype=complex) / _SQRT2


@dataclass(frozen=True)
class StateVector:
    """Pure state amplitudes tagged with their basis (``"block"`` or ``"full"``)."""

    amplitudes: np.ndarray
    basis: str

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        expected = {"block": 3, "full": 8}.get(self.basis)
        if expected is None:
            raise DomainError(f"unknown basis {self.basis!r}")
        if amps.shape != (expected,):
            raise DomainError(f"{self.basis} state needs {expected} amplitudes, got shape {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def initial_state_full(a: complex, b: complex) -> StateVector:
    """(a|0> + b|1>)_1 (x) singlet_23."""
    check_amplitudes(a, b)
    psi = a * embed_block(BLOCK_INITIAL, +0.5)
    # b|1>_1 (|01> - |10>)/sqrt2 = b(|101> - |110>)/sqrt2: sector coords (0, 1, -1)/sqrt2.
    psi += b * embed_block(-BLOCK_INITIAL, -0.5)
    return StateVector(psi, "full")


def target_state_full(a: complex, b: complex) -> StateVector:
    """singlet_12 (x) (a|0> + b|1>)_3."""
    check_amplitudes(a, b)
    psi = a * embed_block(BLOCK_TARGET, +0.5) + b * embed_block(-BLOCK_TARGET, -0.5)
    return StateVector(psi, "full")


def initial_state_block() -> StateVector:
    return StateVector(BLOCK_INITIAL.copy(), "block")


def target_state_block() -> StateVector:
    return StateVector(BLOCK_TARGET.copy(), "block")


def fidelity(final: StateVector, target: StateVector) -> float:
    """|<target|final>|^2."""
    if final.basis != target.basis or final.amplitudes.shape != target.amplitudes.shape:
        raise DomainError(f"cannot compare {final.basis} state with {target.basis} state")
    return float(abs(np.vdot(target.amplitudes, final.amplitudes)) ** 2)


_SZ_DIAG = np.diag(sz_operator()).copy()


def sz_expectation(state: StateVector) -> float:
    if state.basis != "full":
        raise DomainError("S_z expectation needs a full 8-dim state")
    return float(np.sum(_SZ_DIAG * np.abs(state.amplitudes) ** 2))


@numba.njit(cache=True, nogil=True)
def _apply(hi, hf, f, g, y, out):
    d = y.shape[0]
    for r in range(d):
        acc = 0j
        for c in range(d):
            acc += (f * hi[r, c] + g * hf[r, c]) * y[c]
        out[r] = -1j * acc


@numba.njit(cache=True, nogil=True)
def _rk4_kernel(hi, hf, fs, gs, h, n_steps, psi0, record, sz_diag):
    d = psi0.shape[0]
    y = psi0.copy()
    k1 = np.empty(d, np.complex128)
    k2 = np.empty(d, np.complex128)
    k3 = np.empty(d, np.complex128)
    k4 = np.empty(d, np.complex128)
    z = np.empty(d, np.complex128)
    states = np.empty((record.shape[0], d), np.complex128)
    sz0 = 0.0
    for r in range(d):
        sz0 += sz_diag[r] * (y[r].real ** 2 + y[r].imag ** 2)
    norm_dev = 0.0
    sz_dev = 0.0
    slot = 0
    while slot < record.shape[0] and record[slot] == 0:
        states[slot] = y
        slot += 1
    for n in range(n_steps):
        f0 = fs[2 * n]
        g0 = gs[2 * n]
        fm = fs[2 * n + 1]
        gm = gs[2 * n + 1]
        _apply(hi, hf, f0, g0, y, k1)
        for r in range(d):
            z[r] = y[r] + 0.5 * h * k1[r]
        _apply(hi, hf, fm, gm, z, k2)
        for r in range(d):
            z[r] = y[r] + 0.5 * h * k2[r]
        _apply(hi, hf, fm, gm, z, k3)
        for r in range(d):
            z[r] = y[r] + h * k3[r]
        _apply(hi, hf, fs[2 * n + 2], gs[2 * n + 2], z, k4)
        nrm = 0.0
        sz = 0.0
        for r in range(d):
            y[r] += h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r])
            p = y[r].real ** 2 + y[r].imag ** 2
            nrm += p
            sz += sz_diag[r] * p
        norm_dev = max(norm_dev, abs(math.sqrt(nrm) - 1.0))
        sz_dev = max(sz_dev, abs(sz - sz0))
        while slot < record.shape[0] and record[slot] == n + 1:
            states[slot] = y
            slot += 1
    return states, norm_dev, sz_dev


def integrate(hi, hf, schedule, t_total, steps, psi0, record=None, sz_diag=None):
    """Run RK4 with ``steps`` equal steps over [0, t_total].

    ``record`` holds step indices (0..steps) whose states are returned.
    Returns ``(states, max_norm_deviation, max_sz_deviation)``.
    """
    steps = int(steps)
    s = np.arange(2 * steps + 1) / (2 * steps)
    fs, gs = schedule(s)
    fs = np.ascontiguousarray(fs, dtype=float)
    gs = np.ascontiguousarray(gs, dtype=float)
    record = np.array([steps] if record is None else record, dtype=np.int64)
    psi0 = np.ascontiguousarray(psi0, dtype=complex)
    if sz_diag is None:
        sz_diag = np.zeros(psi0.shape[0])
    return _rk4_kernel(
        np.ascontiguousarray(hi, dtype=float),
        np.ascontiguousarray(hf, dtype=float),
        fs,
        gs,
        t_total / steps,
        steps,
        psi0,
        record,
        np.ascontiguousarray(sz_diag, dtype=float),
    )


@dataclass(frozen=True)
class Trajectory:
    """Recorded states of one run plus integrator diagnostics.

    ``step_error`` is the max-abs endpoint difference against the half-step
    rerun (``None`` when the check was skipped).  ``sz_drift`` is only
    defined in the full space.
    """

    times: np.ndarray
    states: np.ndarray
    basis: str
    steps: int
    norm_drift: float
    sz_drift: float | None
    step_error: float | None
    fidelity: float

    @property
    def final(self) -> StateVector:
        return StateVector(self.states[-1], self.basis)

    def state(self, k: int) -> StateVector:
        return StateVector(self.states[k], self.basis)


def _problem(config: SimulationConfig, space: str):
    coupling = config.coupling
    if space == "block":
        hi, hf = block_generators(coupling)
        return hi, hf, initial_state_block(), target_state_block(), None
    if space == "full":
        a, b = config.amplitudes
        return (
            initial_coupling(coupling),
            final_coupling(coupling),
            initial_state_full(a, b),
            target_state_full(a, b),
            _SZ_DIAG,
        )
    raise DomainError(f"space must be 'block' or 'full', got {space!r}")


def evolve(config: SimulationConfig, space: str = "block", samples: int = 2, check: bool = True) -> Trajectory:
    """Propagate from t = 0 to T and record ``samples`` evenly spaced states.

    ``space="block"`` evolves the 3-dim S_z = +1/2 sector (both sectors
    evolve identically); ``space="full"`` evolves all 8 amplitudes.
    Raises :class:`UnconvergedError` if the step-halving check fails.
    """
    if samples < 2:
        raise DomainError("samples must be >= 2")
    hi, hf, psi0, target, sz_diag = _problem(config, space)
    t_total = config.t_total

    if config.jt_over_pi < SUDDEN_LIMIT_X:
        # Sudden limit: the state has no time to change.
        states = np.tile(psi0.amplitudes, (samples, 1))
        return Trajectory(
            times=np.linspace(0.0, t_total, samples),
            states=states,
            basis=space,
            steps=0,
            norm_drift=abs(psi0.norm - 1.0),
            sz_drift=0.0 if space == "full" else None,
            step_error=None,
            fidelity=fidelity(psi0, target),
        )

    steps = config.resolved_steps
    record = np.unique(np.round(np.linspace(0, steps, samples)).astype(np.int64))
    states, norm_drift, sz_drift = integrate(
        hi, hf, config.schedule, t_total, steps, psi0.amplitudes, record, sz_diag
    )
    step_error = None
    if check:
        coarse, _, _ = integrate(hi, hf, config.schedule, t_total, steps // 2, psi0.amplitudes)
        step_error = float(np.abs(states[-1] - coarse[-1]).max())
        if step_error > config.tolerance:
            raise UnconvergedError(
                f"RK4 step-halving check failed at x={config.jt_over_pi:g}: "
                f"|psi(N) - psi(N/2)| = {step_error:.3e} > {config.tolerance:.1e}",
                coarse=coarse[-1],
                fine=states[-1],
                difference=step_error,
                tolerance=config.tolerance,
            )
    final = StateVector(states[-1], space)
    return Trajectory(
        times=record * (t_total / steps),
        states=states,
        basis=space,
        steps=steps,
        norm_drift=float(norm_drift),
        sz_drift=float(sz_drift) if space == "full" else None,
        step_error=step_error,
        fidelity=fidelity(final, target),
    )


def sector_amplitudes(state: StateVector, sector: float) -> np.ndarray:
    """Pick the 3 sector coordinates out of a full state."""
    return state.amplitudes[list(SECTOR_INDICES[sector])]
