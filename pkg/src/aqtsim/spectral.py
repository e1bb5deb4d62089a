"""Instantaneous eigensystems of the 3x3 sector Hamiltonian.

Closed forms exist for the XX (gamma = 0) and Heisenberg (gamma = 1)
couplings; :func:`eig_numeric` handles any real symmetric 3x3 matrix by
cyclic Jacobi rotations and serves as their cross-check.

Phase conventions
-----------------
The closed-form vectors keep the analytic phases, which are continuous in
theta on [0, pi/2]; this is what the adiabatic-frame matrix needs.  The
numeric solver fixes signs by making the first non-negligible component
positive, which is deterministic but can flip where that component passes
through zero (e.g. the XX ground state at theta = 0).  Compare the two up to
sign, or through projectors inside degenerate pairs.

All eigenvectors are real, so the Berry phase of an adiabatically
transported eigenstate vanishes identically (:data:`BERRY_PHASE`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .hamiltonian import build_block
from .model import J, CouplingModel, ScheduleKind, mixing_angle

BERRY_PHASE = 0.0

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenpairs sorted by ascending energy.

    ``vectors[:, k]`` belongs to ``energies[k]``; ``labels[k]`` is the
    adiabatic label (``"-"``, ``"0"`` or ``"+"``) of that pair.
    """

    energies: np.ndarray
    vectors: np.ndarray
    labels: tuple[str, str, str]

    def _index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(label) from None

    def energy(self, label: str) -> float:
        return float(self.energies[self._index(label)])

    def vector(self, label: str) -> np.ndarray:
        return self.vectors[:, self._index(label)]

    def projector(self, *labels: str) -> np.ndarray:
        cols = self.vectors[:, [self._index(lab) for lab in labels]]
        return cols @ cols.conj().T

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.energies) @ self.vectors.conj().T


def _ordered(energies, vectors, labels):
    # Closed forms are ascending by construction; no sorting, so columns never
    # swap at touching levels.
    return EigenSystem(np.asarray(energies, dtype=float), np.asarray(vectors, dtype=float), labels)


def eig_xx(theta: float, j: float = J, radius: float = 1.0) -> EigenSystem:
    """Closed-form eigensystem for gamma = 0.

    ``radius`` is sqrt(f^2 + g^2); it equals 1 along the harmonic schedule.
    """
    if not 0.0 <= theta <= math.pi / 2 + 1e-15:
        raise DomainError(f"theta must lie in [0, pi/2], got {theta}")
    c, s = math.cos(theta), math.sin(theta)
    e = 2.0 * j * radius
    vectors = np.array(
        [
            [s / _SQRT2, c, s / _SQRT2],
            [-1.0 / _SQRT2, 0.0, 1.0 / _SQRT2],
            [c / _SQRT2, -s, c / _SQRT2],
        ]
    )
    return _ordered([-e, 0.0, e], vectors, ("-", "0", "+"))


def heisenberg_branch(theta: float, sign: int) -> np.ndarray:
    """Unnormalised +/- eigenvector of the Heisenberg block, in analytic form."""
    c, s = math.cos(theta), math.sin(theta)
    rq = math.sqrt(1.0 - c * s)
    return np.array([s, -c + sign * rq, c - s - sign * rq])


def heisenberg_branch_norm(theta: float, sign: int) -> float:
    """Squared norm of :func:`heisenberg_branch`: 4q - sign * 2 (2 cos - sin) sqrt(q).

    The two branches have different norms; the lower sign gives the familiar
    2 (2 cos - sin) sqrt(q) + 4q.
    """
    c, s = math.cos(theta), math.sin(theta)
    q = 1.0 - c * s
    return 4.0 * q - sign * 2.0 * (2.0 * c - s) * math.sqrt(q)


def _heisenberg_upper(theta):
    c, s = math.cos(theta), math.sin(theta)
    rq = math.sqrt(1.0 - c * s)
    if theta < math.pi / 4:
        # Branch vector divided by sin(theta), rationalised: it vanishes at
        # theta = 0 where the + level meets the 0 level.
        v = np.array([1.0, (s - c) / (rq + c), -c / (c - s + rq)])
        return v / np.linalg.norm(v)
    return heisenberg_branch(theta, +1) / math.sqrt(heisenberg_branch_norm(theta, +1))


def eig_heisenberg(theta: float, f: float, g: float, j: float = J) -> EigenSystem:
    """Closed-form eigensystem for gamma = 1; ``theta`` must equal atan2(g, f).

    Sorted ascending the labels read ("-", "+", "0"): the 0 level lies on top
    and touches the + level at theta = 0 and theta = pi/2.
    """
    if not 0.0 <= theta <= math.pi / 2 + 1e-15:
        raise DomainError(f"theta must lie in [0, pi/2], got {theta}")
    root = 2.0 * math.sqrt(f * f - f * g + g * g)
    # E+ <= E0 because (f + g)^2 >= f^2 - f g + g^2 for f, g >= 0.
    energies = [j * (-f - g - root), j * (-f - g + root), j * (f + g)]
    minus = heisenberg_branch(theta, -1) / math.sqrt(heisenberg_branch_norm(theta, -1))
    zero = np.full(3, 1.0 / math.sqrt(3.0))
    vectors = np.column_stack([minus, _heisenberg_upper(theta), zero])
    return _ordered(energies, vectors, ("-", "+", "0"))


def _canonical_phase(vectors, tol=1e-10):
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        lead = np.flatnonzero(np.abs(col) > tol)
        if lead.size and col[lead[0]] < 0:
            out[:, k] = -col
    return out


def _jacobi(a, max_sweeps=64):
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.abs(a).max(), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = math.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= 1e-17 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
                v = v @ rot
    return np.diag(a).copy(), v


def eig_numeric(h) -> EigenSystem:
    """Eigensystem of a real symmetric 3x3 matrix by cyclic Jacobi rotations.

    Labels are assigned by rank ("-", "0", "+" from lowest to highest), which
    is not the adiabatic labelling for the Heisenberg coupling.
    """
    h = np.asarray(h)
    if h.shape != (3, 3):
        raise DomainError(f"expected a 3x3 matrix, got shape {h.shape}")
    if np.iscomplexobj(h):
        if np.abs(h.imag).max() > 0:
            raise DomainError("eig_numeric handles real symmetric matrices only")
        h = h.real
    if np.abs(h - h.T).max() > 1e-12 * max(1.0, np.abs(h).max()):
        raise DomainError("matrix is not symmetric")
    energies, vectors = _jacobi(0.5 * (h + h.T))
    order = np.argsort(energies, kind="stable")
    return EigenSystem(energies[order], _canonical_phase(vectors[:, order]), ("-", "0", "+"))


def closed_form(coupling: CouplingModel, f: float, g: float, j: float = J) -> EigenSystem:
    """Dispatch to the closed form for the XX or Heisenberg preset."""
    theta = mixing_angle(f, g)
    if coupling.gamma == 0.0:
        return eig_xx(theta, j, radius=math.hypot(f, g))
    if coupling.gamma == 1.0:
        return eig_heisenberg(theta, f, g, j)
    raise DomainError(f"no closed form for gamma={coupling.gamma}")


def instantaneous_spectrum(coupling: CouplingModel, schedule: ScheduleKind, s_values, j: float = J):
    """Ascending instantaneous energies, shape ``(len(s_values), 3)``."""
    out = np.empty((len(s_values), 3))
    for i, s in enumerate(s_values):
        f, g = schedule(s)
        out[i] = eig_numeric(build_block(coupling, float(f), float(g), j)).energies
    return out
