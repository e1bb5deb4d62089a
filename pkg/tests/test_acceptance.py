"""Acceptance criteria, one test each, at their stated tolerances.

Each test records a PASS/FAIL line; the lines are printed together at the end
of the module (visible in plain ``pytest`` output) and individually with -s.

Run: ``pytest tests/test_acceptance.py -v``
"""
import math
import time

import numpy as np
import pytest

from aqtsim import adiabatic_frame as af
from aqtsim.hamiltonian import SECTOR_INDICES, build_block, build_full, project_block, sz_operator
from aqtsim.model import HEISENBERG, XX, CouplingModel, ScheduleKind, SimulationConfig, total_time
from aqtsim.propagator import evolve
from aqtsim.scan import find_resonances, run_scan
from aqtsim.spectral import closed_form, eig_numeric

pytestmark = pytest.mark.acceptance

H = ScheduleKind.HARMONIC
L = ScheduleKind.LINEAR
WORKERS = 4

# 1 - F never drops below this on x in [0.25, 20] for QuadB/XX: brute-force
# DOP853 scan (rtol 1e-12) finds its smallest value 1.2637e-4 at x = 20.
QUAD_B_FLOOR = 1e-4

RESULTS = []


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    lines = ["", "acceptance summary:"] + RESULTS
    for line in lines:
        if reporter is not None:
            reporter.write_line(line)
        else:
            print(line)


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_resonance_positions():
    start = time.perf_counter()
    series = run_scan(XX, H, 0.25, 10.0, 400, workers=WORKERS)
    report = find_resonances(series, threshold=1e-6, workers=WORKERS)
    elapsed = time.perf_counter() - start
    found = report.resonances
    expected = [math.sqrt(n * n - 1 / 16) for n in range(1, 10)]
    ok = len(found) == 9
    worst_dx = worst_inf = math.nan
    if ok:
        worst_dx = max(abs(d.x - e) for d, e in zip(found, expected))
        worst_inf = max(d.infidelity for d in found)
        ok = worst_dx <= 1e-5 and worst_inf <= 1e-10 and elapsed < 120
    record(
        1,
        "resonance positions XX/harmonic",
        ok,
        f"{len(found)} found, max |dx| = {worst_dx:.2e}, max 1-F = {worst_inf:.2e}, {elapsed:.1f} s",
    )


def test_analytic_numeric_agreement():
    start = time.perf_counter()
    series = run_scan(XX, H, 0.25, 20.0, 200, workers=WORKERS)
    exact = af.analytic_fidelity(1.0, total_time(series.grid))
    elapsed = time.perf_counter() - start
    diff = float(np.abs(series.fidelity - exact).max())
    record(2, "analytic vs RK4 fidelity", diff <= 1e-7 and elapsed < 60, f"max |dF| = {diff:.2e}, {elapsed:.1f} s")


@pytest.mark.parametrize(
    "coupling,schedule,tol",
    [(XX, H, 0.10), (XX, L, 0.15), (HEISENBERG, H, 0.15), (HEISENBERG, L, 0.15)],
    ids=["xx-harmonic", "xx-linear", "heisenberg-harmonic", "heisenberg-linear"],
)
def test_envelope_exponent(coupling, schedule, tol):
    series = run_scan(coupling, schedule, 5.0, 50.0, 901, workers=WORKERS)
    report = find_resonances(series, envelope_x_min=5.0, workers=WORKERS)
    p = report.power_law_exponent
    ok = p is not None and abs(p + 2.0) <= tol
    record(
        3,
        f"envelope exponent {coupling.name}/{schedule.value}",
        ok,
        f"p = {p:.4f} from {len(report.envelope)} peaks, target -2 +/- {tol}",
    )


@pytest.mark.parametrize(
    "coupling,schedule",
    [(XX, L), (XX, H), (HEISENBERG, L), (HEISENBERG, H)],
    ids=["xx-linear", "xx-harmonic", "heisenberg-linear", "heisenberg-harmonic"],
)
def test_dips(coupling, schedule):
    series = run_scan(coupling, schedule, 0.25, 10.0, 400, workers=WORKERS)
    report = find_resonances(series, workers=WORKERS)
    deep = [d for d in report.minima if d.depth >= 2.0]
    record(
        4,
        f"dips {coupling.name}/{schedule.value}",
        len(deep) >= 3,
        f"{len(deep)} dips with depth >= 2 decades at x = {[round(d.x, 4) for d in deep]}",
    )


def test_quadratic_dichotomy():
    qa = find_resonances(run_scan(XX, ScheduleKind.QUAD_A, 0.25, 20.0, 400, workers=WORKERS), workers=WORKERS)
    qb_series = run_scan(XX, ScheduleKind.QUAD_B, 0.25, 20.0, 400, workers=WORKERS)
    qb = find_resonances(qb_series, workers=WORKERS)
    qa_best = min(d.infidelity for d in qa.minima)
    qb_grid = float(qb_series.infidelity.min())
    qb_refined = min((d.infidelity for d in qb.minima), default=math.inf)
    ok = (
        qa_best < 1e-6
        and qb_grid > QUAD_B_FLOOR
        and qb_refined > QUAD_B_FLOOR
        and QUAD_B_FLOOR >= 1e3 * qa_best
    )
    record(
        5,
        "QuadA resonates, QuadB does not",
        ok,
        f"QuadA min 1-F = {qa_best:.2e}; QuadB grid min {qb_grid:.3e}, refined min {qb_refined:.3e}, "
        f"floor {QUAD_B_FLOOR:g}",
    )


def _structural_checks():
    rng = np.random.default_rng(2024)
    worst = {}

    def note(key, value):
        worst[key] = max(worst.get(key, 0.0), float(value))

    sz = np.diag(sz_operator()).real
    for _ in range(4):
        z = rng.normal(size=4)
        a, b = complex(z[0], z[1]), complex(z[2], z[3])
        n = math.hypot(abs(a), abs(b))
        a, b = a / n, b / n
        coupling = CouplingModel(float(rng.choice([0.0, 1.0, rng.uniform(0, 2)])))
        schedule = list(ScheduleKind)[rng.integers(4)]
        x = float(rng.uniform(0.3, 4.0))
        full = evolve(SimulationConfig(coupling, schedule, x, amplitudes=(a, b)), "full")
        block = evolve(SimulationConfig(coupling, schedule, x), "block")
        ref = evolve(SimulationConfig(coupling, schedule, x, amplitudes=(1.0, 0.0)), "full")
        note("block vs full", abs(full.fidelity - block.fidelity))
        note("(a,b) independence", abs(full.fidelity - ref.fidelity))
        note("norm", full.norm_drift)
        sz0 = (abs(a) ** 2 - abs(b) ** 2) / 2
        note("S_z", max(full.sz_drift, abs(float(np.real(np.vdot(full.final.amplitudes, sz * full.final.amplitudes))) - sz0)))

    for _ in range(50):
        coupling = CouplingModel(float(rng.uniform(0, 2)))
        f, g = rng.uniform(0, 2, size=2)
        full = build_full(coupling, f, g)
        for sector in SECTOR_INDICES:
            note("project_block", np.abs(project_block(full, sector) - build_block(coupling, f, g)).max())

    for _ in range(100):
        coupling = [XX, HEISENBERG][rng.integers(2)]
        f, g = rng.uniform(0, 1.5, size=2)
        exact = closed_form(coupling, f, g)
        numeric = eig_numeric(build_block(coupling, f, g))
        note("closed vs numeric energies", np.abs(exact.energies - numeric.energies).max())
        # Projector comparison is insensitive to sign and to rotations in degenerate pairs.
        p_exact = [np.outer(v, v) for v in exact.vectors.T]
        p_num = [np.outer(v, v) for v in numeric.vectors.T]
        note("closed vs numeric projectors", max(np.abs(p - q).max() for p, q in zip(p_exact, p_num)))

    x = 1.6
    exact = af.exact_block_state(1.0, total_time(x))
    errors = [
        np.abs(evolve(SimulationConfig(XX, H, x, steps=n), "block", check=False).final.amplitudes - exact).max()
        for n in (128, 256, 512)
    ]
    ratios = [e1 / e2 for e1, e2 in zip(errors, errors[1:])]
    limits = {
        "block vs full": 1e-10,
        "(a,b) independence": 1e-10,
        "norm": 1e-10,
        "S_z": 1e-10,
        "project_block": 1e-14,
        "closed vs numeric energies": 1e-10,
        "closed vs numeric projectors": 1e-10,
    }
    return worst, limits, ratios


def test_structural_invariants():
    start = time.perf_counter()
    worst, limits, ratios = _structural_checks()
    elapsed = time.perf_counter() - start
    failed = [k for k, lim in limits.items() if not worst[k] <= lim]
    order_ok = all(12 <= r <= 20 for r in ratios)
    detail = ", ".join(f"{k} {worst[k]:.1e}" for k in limits)
    detail += f", RK4 ratios {[round(float(r), 2) for r in ratios]}, {elapsed:.1f} s"
    record(6, "structural invariants", not failed and order_ok and elapsed < 60, detail)


def test_exact_solution_consistency():
    fd_dev = 0.0
    for x in (0.5, 2.0, 10.0):
        t_total = total_time(x)
        tr = af.transformed_hamiltonian(1.0, t_total, verify=False)
        for frac in (0.2, 0.5, 0.8):
            fd_dev = max(fd_dev, np.abs(af.frame_generator_fd(1.0, t_total, frac * t_total) - tr.matrix).max())
    zeros = max(1 - af.analytic_fidelity(1.0, total_time(x)) for x in af.resonance_times(10))
    cos4 = 0.0
    for n in range(0, 10):
        # Omega T = (2n + 1) pi, halfway between neighbouring resonances.
        t_total = math.sqrt(((2 * n + 1) * math.pi) ** 2 - math.pi**2 / 4) / 2
        tr = af.transformed_hamiltonian(1.0, t_total, verify=False)
        cos4 = max(cos4, abs(af.analytic_fidelity(1.0, t_total) - math.cos(tr.alpha) ** 4))
    ok = fd_dev <= 1e-8 and zeros <= 1e-12 and cos4 <= 1e-12
    record(
        7,
        "exact-solution consistency",
        ok,
        f"H_tr finite-difference dev {fd_dev:.1e}, max 1-F(x_n) {zeros:.1e}, |F - cos^4 alpha| {cos4:.1e}",
    )
