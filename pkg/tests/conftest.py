import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from aqtsim.hamiltonian import build_block
from aqtsim.model import total_time


def reference_block_state(coupling, schedule, x, t=None):
    """Independent oracle: adaptive DOP853 on the 3x3 block at tight tolerance."""
    t_total = total_time(x)
    t_end = t_total if t is None else t

    def rhs(tt, y):
        f, g = schedule(tt / t_total)
        return -1j * (build_block(coupling, float(f), float(g)) @ y)

    psi0 = np.array([0, -1, 1], dtype=complex) / math.sqrt(2)
    sol = solve_ivp(rhs, (0.0, t_end), psi0, method="DOP853", rtol=1e-13, atol=1e-14)
    return sol.y[:, -1]


@pytest.fixture
def oracle():
    return reference_block_state
