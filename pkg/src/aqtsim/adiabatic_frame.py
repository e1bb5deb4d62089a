"""Exact solution for XX coupling with the harmonic schedule.

In the frame spanned by the instantaneous XX eigenvectors, the generator
``A^T H A - i A^T dA/dt`` is time independent when f = cos(w1 t) and
g = sin(w1 t):

    H_tr = w0 Z + w1 Y',   w0 = 2J,  w1 = pi / (2T)

with Z = diag(-1, 0, 1) and Y' a spin-1-like generator.  Evolution there is a
uniform precession at Omega = sqrt(w0^2 + w1^2), and the fidelity returns to
one whenever Omega T is a multiple of 2 pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DomainError
from .hamiltonian import build_block, embed_block
from .model import HBAR, J, XX, CouplingModel, ScheduleKind, check_amplitudes
from .propagator import BLOCK_INITIAL, StateVector

Z = np.diag([-1.0, 0.0, 1.0]).astype(complex)
Y_PRIME = np.array([[0, 1j, 0], [-1j, 0, -1j], [0, 1j, 0]]) / math.sqrt(2.0)

_SQRT2 = math.sqrt(2.0)


def require_exact_case(coupling: CouplingModel, schedule: ScheduleKind) -> None:
    """The closed form holds only for XX coupling and the harmonic schedule."""
    if coupling.gamma != 0.0 or schedule is not ScheduleKind.HARMONIC:
        raise DomainError(
            f"exact adiabatic-frame solution needs xx/harmonic, got {coupling.name}/{schedule.value}"
        )


def frame_matrix(theta: float) -> np.ndarray:
    """Columns are the XX eigenvectors ordered (E-, E0, E+)."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array(
        [
            [s / _SQRT2, c, s / _SQRT2],
            [-1.0 / _SQRT2, 0.0, 1.0 / _SQRT2],
            [c / _SQRT2, -s, c / _SQRT2],
        ]
    )


@dataclass(frozen=True)
class TransformedHamiltonian:
    """Time-independent adiabatic-frame generator for one protocol duration."""

    j: float
    t_total: float
    omega0: float
    omega1: float
    alpha: float
    Omega: float
    matrix: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        """(e_-, e_0, e_+) = (-Omega, 0, +Omega) in units of hbar."""
        return HBAR * np.array([-self.Omega, 0.0, self.Omega])

    def eigenvectors(self) -> np.ndarray:
        """Columns |e_->, |e_0>, |e_+> in their explicit alpha form."""
        ca, sa = math.cos(self.alpha), math.sin(self.alpha)
        e0 = np.array([-sa, 1j * _SQRT2 * ca, sa]) / _SQRT2

        def branch(sign):
            return 0.5 * np.array([1 - sign * ca, -sign * 1j * _SQRT2 * sa, 1 + sign * ca])

        return np.column_stack([branch(-1), e0, branch(+1)])

    def propagator(self, t: float) -> np.ndarray:
        """exp(-i H_tr t / hbar) assembled from the three spectral projectors."""
        vecs = self.eigenvectors()
        phases = np.exp(-1j * self.eigenvalues() * t / HBAR)
        return (vecs * phases) @ vecs.conj().T


def transformed_hamiltonian(j: float, t_total: float, verify: bool = True) -> TransformedHamiltonian:
    """Build H_tr for coupling ``j`` and duration ``t_total``.

    With ``verify`` the matrix is checked against a finite-difference
    evaluation of the frame generator at three times; a mismatch above 1e-8
    raises :class:`ConsistencyError`.
    """
    if not (j > 0 and t_total > 0):
        raise DomainError("j and t_total must be positive")
    omega0 = 2.0 * j / HBAR
    omega1 = math.pi / (2.0 * t_total)
    matrix = HBAR * (omega0 * Z + omega1 * Y_PRIME)
    tr = TransformedHamiltonian(
        j=j,
        t_total=t_total,
        omega0=omega0,
        omega1=omega1,
        alpha=math.atan2(omega1, omega0),
        Omega=math.hypot(omega0, omega1),
        matrix=matrix,
    )
    if verify:
        for t in (0.2 * t_total, 0.5 * t_total, 0.8 * t_total):
            dev = np.abs(frame_generator_fd(j, t_total, t) - matrix).max()
            if dev > 1e-8:
                raise ConsistencyError(f"H_tr deviates from frame generator by {dev:.2e} at t={t}")
    return tr


def frame_generator_fd(j: float, t_total: float, t: float, h: float | None = None) -> np.ndarray:
    """A^T H_3 A - i hbar A^T dA/dt at time t, derivative by central differences."""
    if h is None:
        h = 1e-6 * t_total
    w1 = math.pi / (2.0 * t_total)

    def a_of(tt):
        return frame_matrix(w1 * tt)

    a = a_of(t)
    h3 = build_block(XX, math.cos(w1 * t), math.sin(w1 * t), j)
    da = (a_of(t + h) - a_of(t - h)) / (2.0 * h)
    return a.T @ h3 @ a - 1j * HBAR * a.T @ da


def exact_block_state(j: float, t_total: float, t: float | None = None) -> np.ndarray:
    """Sector coordinates A(t) U_tr(t) A^T(0) psi(0) for the singlet start."""
    if t is None:
        t = t_total
    tr = transformed_hamiltonian(j, t_total, verify=False)
    theta = tr.omega1 * t
    return frame_matrix(theta) @ tr.propagator(t) @ frame_matrix(0.0).T @ BLOCK_INITIAL


def exact_evolve(a: complex, b: complex, j: float, t_total: float, t: float | None = None) -> StateVector:
    """Full three-qubit state at time t (default T) from the exact solution."""
    check_amplitudes(a, b)
    block = exact_block_state(j, t_total, t)
    # The S_z = -1/2 sector starts from the negated coordinates and evolves identically.
    return StateVector(a * embed_block(block, +0.5) - b * embed_block(block, -0.5), "full")


def _angles(j, t_total):
    t_total = np.asarray(t_total, dtype=float)
    omega0 = 2.0 * j / HBAR
    omega1 = np.pi / (2.0 * t_total)
    return np.arctan2(omega1, omega0), np.hypot(omega0, omega1)


def analytic_fidelity(j: float, t_total):
    """Closed-form teleportation fidelity at t = T (vectorised over ``t_total``)."""
    alpha, omega = _angles(j, t_total)
    phase = omega * np.asarray(t_total, dtype=float)
    c, s = np.cos(phase), np.sin(phase)
    ca2 = np.cos(alpha) ** 2
    sa2 = np.sin(alpha) ** 2
    value = 0.25 * (c * c * (1 + ca2) ** 2 + 4 * s * s * ca2 + 2 * c * sa2 * (1 + ca2) + sa2 * sa2)
    return float(value) if np.ndim(value) == 0 else value


def worst_case_fidelity(j: float, t_total):
    """cos^4(alpha): the fidelity when Omega T is an odd multiple of pi."""
    alpha, _ = _angles(j, t_total)
    value = np.cos(alpha) ** 4
    return float(value) if np.ndim(value) == 0 else value


def resonance_times(n_max: int) -> list[float]:
    """Scan coordinates x_n = sqrt(n^2 - 1/16), n = 1..n_max, where Omega T = 2 pi n."""
    if int(n_max) != n_max or n_max < 1:
        raise DomainError("n_max must be a positive integer")
    return [math.sqrt(n * n - 1.0 / 16.0) for n in range(1, int(n_max) + 1)]


def is_exact_case(coupling: CouplingModel, schedule: ScheduleKind) -> bool:
    return coupling.gamma == 0.0 and schedule is ScheduleKind.HARMONIC
