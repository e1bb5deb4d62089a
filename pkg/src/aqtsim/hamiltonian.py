"""Three-qubit Hamiltonian H(t) = f H_i + g H_f and its S_z block structure.

Computational basis |q1 q2 q3>, qubit 1 most significant, |0> = spin up.
Basis index of |q1 q2 q3> is 4*q1 + 2*q2 + q3.
"""
from __future__ import annotations

from functools import reduce

import numpy as np

from .errors import DomainError
from .model import J, CouplingModel

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

# Ordered bases of the S_z = +1/2 and S_z = -1/2 sectors.
SECTOR_INDICES = {
    +0.5: (0b100, 0b010, 0b001),
    -0.5: (0b011, 0b101, 0b110),
}


def _site_operator(op, site):
    """``op`` acting on qubit ``site`` (1-based) of three."""
    factors = [IDENTITY] * 3
    factors[site - 1] = op
    return reduce(np.kron, factors)


def _exchange(i, k, gamma):
    """sigma_ix sigma_kx + sigma_iy sigma_ky + gamma sigma_iz sigma_kz."""
    out = np.zeros((8, 8), dtype=complex)
    for op, weight in ((SIGMA_X, 1.0), (SIGMA_Y, 1.0), (SIGMA_Z, gamma)):
        out += weight * _site_operator(op, i) @ _site_operator(op, k)
    # All entries are real for this family.
    return out.real.copy()


def initial_coupling(coupling: CouplingModel, j: float = J) -> np.ndarray:
    """H_i: qubits 2 and 3 coupled."""
    return j * _exchange(2, 3, coupling.gamma)


def final_coupling(coupling: CouplingModel, j: float = J) -> np.ndarray:
    """H_f: qubits 1 and 2 coupled."""
    return j * _exchange(1, 2, coupling.gamma)


def sz_operator() -> np.ndarray:
    """Total S_z = (sigma_1z + sigma_2z + sigma_3z) / 2 as an 8x8 real diagonal matrix."""
    return 0.5 * sum(_site_operator(SIGMA_Z, s) for s in (1, 2, 3)).real


def build_full(coupling: CouplingModel, f: float, g: float, j: float = J) -> np.ndarray:
    """Full 8x8 Hamiltonian ``f H_i + g H_f`` (real symmetric)."""
    return f * initial_coupling(coupling, j) + g * final_coupling(coupling, j)


def build_block(coupling: CouplingModel, f: float, g: float, j: float = J) -> np.ndarray:
    """3x3 sector Hamiltonian, identical for S_z = +1/2 and -1/2.

    Basis (|100>, |010>, |001>) or (|011>, |101>, |110>).
    """
    gam = coupling.gamma
    return j * np.array(
        [
            [(f - g) * gam, 2.0 * g, 0.0],
            [2.0 * g, -(f + g) * gam, 2.0 * f],
            [0.0, 2.0 * f, -(f - g) * gam],
        ]
    )


def block_generators(coupling: CouplingModel, j: float = J) -> tuple[np.ndarray, np.ndarray]:
    """The f- and g-coefficient matrices of the 3x3 block."""
    return build_block(coupling, 1.0, 0.0, j), build_block(coupling, 0.0, 1.0, j)


def project_block(full: np.ndarray, sector: float) -> np.ndarray:
    """Restrict an 8x8 operator to the ordered basis of the given S_z sector."""
    try:
        idx = SECTOR_INDICES[sector]
    except KeyError:
        raise DomainError(f"sector must be +0.5 or -0.5, got {sector!r}") from None
    return np.asarray(full)[np.ix_(idx, idx)]


def scalar_blocks(coupling: CouplingModel, f: float, g: float, j: float = J) -> tuple[float, float]:
    """Energies of the inert one-dimensional blocks on |000> and |111>."""
    e = (f + g) * coupling.gamma * j
    return e, e


def embed_block(vector, sector: float) -> np.ndarray:
    """Place a 3-vector of sector coordinates into the 8-dim space."""
    out = np.zeros(8, dtype=complex)
    out[list(SECTOR_INDICES[sector])] = vector
    return out
