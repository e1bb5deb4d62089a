"""``aqt`` command line: simulate, scan, resonances, spectrum.

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import decimal
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .adiabatic_frame import analytic_fidelity, is_exact_case, resonance_times
from .errors import ConsistencyError, DomainError, UnconvergedError
from .model import PRESETS, CouplingModel, ScheduleKind, SimulationConfig, mixing_angle, total_time
from .propagator import evolve
from .scan import DEFAULT_TOLERANCE, ResonanceReport, ScanSeries, find_resonances, run_scan
from .spectral import instantaneous_spectrum

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2
AMPLITUDE_SLACK = 1e-6


class UsageError(Exception):
    pass


def fmt_float(value) -> str:
    """17 significant digits in positional notation (round-trips a double)."""
    value = float(value)
    if not math.isfinite(value):
        return repr(value)
    return format(decimal.Decimal(f"{value:.16e}"), "f")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def _check_writable(path):
    if path is None:
        return
    if os.path.isdir(path):
        raise UsageError(f"output path {path!r} is a directory")
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise UsageError(f"output directory {parent!r} does not exist")
    if not os.access(parent, os.W_OK):
        raise UsageError(f"output directory {parent!r} is not writable")


def write_text(text: str, path) -> None:
    """Write atomically (temp file in the target directory, then rename); ``None`` means stdout."""
    if path is None:
        sys.stdout.write(text)
        return
    parent = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=parent, prefix=".aqt-", suffix=".tmp")
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path!r}: {exc}") from exc


def series_to_dict(series: ScanSeries) -> dict:
    return {
        "coupling": series.coupling.name,
        "gamma": series.coupling.gamma,
        "schedule": series.schedule.value,
        "x": [float(v) for v in series.grid],
        "infidelity": [float(v) for v in series.infidelity],
        "fidelity": [float(v) for v in series.fidelity],
        "analytic_fidelity": None
        if series.analytic_fidelity is None
        else [float(v) for v in series.analytic_fidelity],
        "metadata": {
            "steps": [int(v) for v in series.steps],
            "steps_override": series.steps_override,
            "tolerance": series.tolerance,
            "x_unit": "J T / (pi hbar)",
        },
    }


def series_from_dict(data: dict) -> ScanSeries:
    analytic = data.get("analytic_fidelity")
    meta = data["metadata"]
    return ScanSeries(
        coupling=CouplingModel(data["gamma"]),
        schedule=ScheduleKind(data["schedule"]),
        grid=np.array(data["x"], dtype=float),
        infidelity=np.array(data["infidelity"], dtype=float),
        fidelity=np.array(data["fidelity"], dtype=float),
        steps=np.array(meta["steps"], dtype=np.int64),
        tolerance=meta["tolerance"],
        analytic_fidelity=None if analytic is None else np.array(analytic, dtype=float),
        steps_override=meta.get("steps_override"),
    )


def render_series(series: ScanSeries, fmt: str) -> str:
    if fmt == "csv":
        rows = zip(series.grid.tolist(), series.infidelity.tolist(), series.fidelity.tolist())
        return _csv_text(["x", "infidelity", "fidelity"], rows)
    return _json_text(series_to_dict(series))


def write_series(series: ScanSeries, fmt: str, path) -> None:
    """Serialise a scan as CSV (``x,infidelity,fidelity``) or JSON."""
    if fmt not in ("csv", "json"):
        raise DomainError(f"unknown format {fmt!r}")
    write_text(render_series(series, fmt), path)


def read_series(path) -> ScanSeries:
    with open(path) as fh:
        return series_from_dict(json.load(fh))


def report_to_dict(report: ResonanceReport, series: ScanSeries) -> dict:
    payload = {
        "coupling": series.coupling.name,
        "gamma": series.coupling.gamma,
        "schedule": series.schedule.value,
        "x_min": float(series.grid[0]),
        "x_max": float(series.grid[-1]),
        "points": len(series.grid),
        "threshold": report.threshold,
        "minima": [
            {
                "x": d.x,
                "infidelity": d.infidelity,
                "local_envelope": d.local_envelope,
                "resonance": d.infidelity <= report.threshold,
            }
            for d in report.minima
        ],
        "resonances": [d.x for d in report.resonances],
        "envelope": [[x, y] for x, y in report.envelope],
        "envelope_x_min": report.envelope_x_min,
        "power_law_exponent": report.power_law_exponent,
        "power_law_prefactor": report.power_law_prefactor,
    }
    if is_exact_case(series.coupling, series.schedule):
        n_max = int(math.floor(math.sqrt(float(series.grid[-1]) ** 2 + 1.0 / 16.0)))
        payload["predicted_resonances"] = resonance_times(n_max) if n_max >= 1 else []
    return payload


def render_report(report: ResonanceReport, series: ScanSeries, fmt: str) -> str:
    if fmt == "csv":
        rows = [(d.x, d.infidelity, d.local_envelope, int(d.infidelity <= report.threshold)) for d in report.minima]
        return _csv_text(["x", "infidelity", "local_envelope", "resonance"], rows)
    return _json_text(report_to_dict(report, series))


# -- argument handling -------------------------------------------------------


def _coupling(args) -> CouplingModel:
    if args.gamma is not None:
        return CouplingModel(args.gamma)
    return CouplingModel.from_name(args.coupling or "xx")


def _amplitudes(args) -> tuple[complex, complex]:
    a = complex(args.a_re, args.a_im)
    b = complex(args.b_re, args.b_im)
    norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    if abs(norm - 1.0) > AMPLITUDE_SLACK:
        raise UsageError(f"amplitudes must satisfy |a|^2 + |b|^2 = 1 (norm is {norm:.9g})")
    if abs(norm - 1.0) > 1e-12:
        print(f"aqt: warning: renormalising amplitudes (norm was {norm:.12g})", file=sys.stderr)
        a, b = a / norm, b / norm
    return a, b


def _add_model_flags(p, default_format):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--coupling", choices=sorted(PRESETS), help="coupling preset (default: xx)")
    group.add_argument("--gamma", type=float, help="numeric anisotropy gamma >= 0")
    p.add_argument(
        "--schedule",
        default="harmonic",
        choices=[k.value for k in ScheduleKind],
        help="switching functions f, g (default: harmonic)",
    )
    p.add_argument("--steps", type=int, help="RK4 step count override (>= 16)")
    p.add_argument(
        "--tolerance",
        type=float,
        default=DEFAULT_TOLERANCE,
        help="step-halving tolerance on final amplitudes (default: %(default)g)",
    )
    p.add_argument("--format", choices=["csv", "json"], default=default_format, help="output format")
    p.add_argument("--out", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aqt",
        description="Three-qubit adiabatic quantum teleportation simulator. "
        "Durations are given as x = J T / (pi hbar).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one run; reports fidelity and integrator diagnostics")
    _add_model_flags(p, "json")
    p.add_argument("--x", type=float, required=True, help="duration x = JT/(pi hbar)")
    p.add_argument("--a-re", type=float, default=1.0)
    p.add_argument("--a-im", type=float, default=0.0)
    p.add_argument("--b-re", type=float, default=0.0)
    p.add_argument("--b-im", type=float, default=0.0)
    p.add_argument("--space", choices=["full", "block"], default="full", help="propagation space (default: full)")

    p = sub.add_parser("scan", help="infidelity versus x")
    _add_model_flags(p, "csv")
    p.add_argument("--x-min", type=float, default=0.25)
    p.add_argument("--x-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--threads", type=int, default=1, help="worker threads for grid points")

    p = sub.add_parser("resonances", help="refined infidelity minima and envelope power law")
    _add_model_flags(p, "json")
    p.add_argument("--x-min", type=float, default=0.25)
    p.add_argument("--x-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--threshold", type=float, default=1e-6, help="resonance cut on refined 1-F")
    p.add_argument("--xtol", type=float, default=1e-6, help="golden-section bracket width")
    p.add_argument("--envelope-x-min", type=float, default=5.0, help="smallest x used in the power-law fit")
    p.add_argument("--threads", type=int, default=1, help="worker threads")

    p = sub.add_parser("spectrum", help="instantaneous block energies along s = t/T")
    _add_model_flags(p, "csv")
    p.add_argument("--points", type=int, default=101)
    return parser


def _cmd_simulate(args) -> str:
    a, b = _amplitudes(args)
    cfg = SimulationConfig(
        _coupling(args), ScheduleKind(args.schedule), args.x, steps=args.steps, tolerance=args.tolerance, amplitudes=(a, b)
    )
    traj = evolve(cfg, args.space)
    record = {
        "coupling": cfg.coupling.name,
        "gamma": cfg.coupling.gamma,
        "schedule": cfg.schedule.value,
        "space": args.space,
        "x": cfg.jt_over_pi,
        "jt": cfg.t_total,
        "steps": traj.steps,
        "a": [a.real, a.imag],
        "b": [b.real, b.imag],
        "fidelity": traj.fidelity,
        "infidelity": 1.0 - traj.fidelity,
        "norm_drift": traj.norm_drift,
        "sz_drift": traj.sz_drift,
        "step_error": traj.step_error,
        "analytic_fidelity": analytic_fidelity(1.0, total_time(cfg.jt_over_pi))
        if is_exact_case(cfg.coupling, cfg.schedule)
        else None,
    }
    if args.format == "json":
        return _json_text(record)
    flat = {k: v for k, v in record.items() if not isinstance(v, list)}
    flat.update(a_re=a.real, a_im=a.imag, b_re=b.real, b_im=b.imag)
    return _csv_text(list(flat), [["" if v is None else v for v in flat.values()]])


def _scan(args):
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    return run_scan(
        _coupling(args),
        ScheduleKind(args.schedule),
        args.x_min,
        args.x_max,
        args.points,
        steps=args.steps,
        tolerance=args.tolerance,
        workers=args.threads,
    )


def _cmd_scan(args) -> str:
    return render_series(_scan(args), args.format)


def _cmd_resonances(args) -> str:
    series = _scan(args)
    report = find_resonances(
        series, threshold=args.threshold, xtol=args.xtol, envelope_x_min=args.envelope_x_min, workers=args.threads
    )
    return render_report(report, series, args.format)


def _cmd_spectrum(args) -> str:
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    coupling, schedule = _coupling(args), ScheduleKind(args.schedule)
    s = np.linspace(0.0, 1.0, args.points)
    energies = instantaneous_spectrum(coupling, schedule, s)
    f, g = schedule(s)
    theta = mixing_angle(np.clip(f, 0.0, None), g)
    gap = energies[:, 1] - energies[:, 0]
    if args.format == "csv":
        rows = [
            (float(s[i]), float(theta[i]), *map(float, energies[i]), float(gap[i])) for i in range(len(s))
        ]
        return _csv_text(["s", "theta", "e_low", "e_mid", "e_high", "gap"], rows)
    return _json_text(
        {
            "coupling": coupling.name,
            "gamma": coupling.gamma,
            "schedule": schedule.value,
            "s": s.tolist(),
            "theta": theta.tolist(),
            "energies": energies.tolist(),
            "gap": gap.tolist(),
        }
    )


COMMANDS = {
    "simulate": _cmd_simulate,
    "scan": _cmd_scan,
    "resonances": _cmd_resonances,
    "spectrum": _cmd_spectrum,
}


def main(argv=None) -> int:
    """Parse ``argv``, run the subcommand and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _check_writable(args.out)
        text = COMMANDS[args.command](args)
        write_text(text, args.out)
    except (UsageError, DomainError) as exc:
        print(f"aqt {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"aqt {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UnconvergedError, ConsistencyError) as exc:
        print(f"aqt {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


parse_and_dispatch = main


def run():
    sys.exit(main())
