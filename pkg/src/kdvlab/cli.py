"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 solver failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .errors import ConfigurationError, KdVLabError
from .grid import make_grid
from .io import RunReport, load_config, write_report_json, write_trace_csv
from .manifold import build_report, fit_decay, residual_at
from .operator import Scheme, assemble_operator
from .solver import InitialCondition, empirical_constants, kato_check, simulate
from .spectrum import (
    critical_lengths,
    find_eigenvalues_determinant,
    kernel_similarity,
    matrix_spectrum,
    nearest_to_zero,
    spectral_gap,
)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kdvlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("critical-lengths", help="tabulate critical interval lengths")
    p.add_argument("--max-index", type=int, required=True)
    p.add_argument("--json")

    p = sub.add_parser("spectrum", help="eigenvalues of the linear operator")
    p.add_argument("--length", type=float, required=True)
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--method", choices=("matrix", "determinant"), required=True)
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default=Scheme.DISSIPATIVE_BIASED.value)
    p.add_argument("--re-min", type=float, default=-1.0)
    p.add_argument("--re-max", type=float, default=0.1)
    p.add_argument("--im-min", type=float, default=-5.0)
    p.add_argument("--im-max", type=float, default=5.0)
    p.add_argument("--density", type=int, default=8)
    p.add_argument("--json", required=True)

    p = sub.add_parser("simulate", help="run one simulation and write its trace")
    p.add_argument("--config", required=True)
    p.add_argument("--trace-csv", required=True)
    p.add_argument("--report-json")

    p = sub.add_parser("manifold-check", help="fit the cubic decay law for several amplitudes")
    p.add_argument("--deltas", required=True, help="comma-separated amplitudes")
    p.add_argument("--config", required=True)
    p.add_argument("--report-json", required=True)
    p.add_argument("--window", type=float, nargs=2, metavar=("T_A", "T_B"))
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("kato-check", help="time-integrated H1 bound for a linearized run")
    p.add_argument("--config", required=True)
    p.add_argument("--report-json", required=True)
    return parser


def _critical_lengths(args):
    table = critical_lengths(args.max_index)
    for j, l, value in table.entries:
        print(f"{value:.15g}\t(j={j}, l={l})")
    payload = {"max_index": table.max_index, "entries": [{"j": j, "l": l, "value": v} for j, l, v in table.entries]}
    return {"max_index": args.max_index}, payload


def _spectrum(args):
    config = {k: getattr(args, k) for k in ("length", "n", "method", "scheme", "re_min", "re_max", "im_min", "im_max", "density")}
    if args.method == "matrix":
        grid = make_grid(args.length, args.n)
        result = matrix_spectrum(assemble_operator(grid, args.scheme))
        top = nearest_to_zero(result)
        payload = {
            "method": "matrix",
            "length": args.length,
            "n": args.n,
            "h": grid.h,
            "growth_bound": result.growth_bound,
            "eigenvalues": result.eigenvalues,
            "nearest_to_zero": top.value,
            "kernel_similarity": kernel_similarity(top),
            "gap": spectral_gap(result, kernel_tol=10 * grid.h),
        }
    else:
        result = find_eigenvalues_determinant(
            args.length, (args.re_min, args.re_max), (args.im_min, args.im_max), args.density
        )
        payload = {
            "method": "determinant",
            "length": args.length,
            "growth_bound": result.growth_bound if result.pairs else None,
            "eigenvalues": result.eigenvalues,
            "gap": spectral_gap(result, kernel_tol=1e-8),
        }
    return config, payload


def _simulate(args):
    config = load_config(args.config)
    trace = simulate(config)
    write_trace_csv(trace, args.trace_csv)
    payload = {"trace": trace.summary(), "diagnostics": empirical_constants(trace)}
    return config.to_dict(), payload


def _one_decay_run(config, delta, window):
    cfg = dataclasses.replace(config, initial=dataclasses.replace(config.initial, amplitude=delta))
    trace = simulate(cfg)
    fit = fit_decay(trace, None, window)
    fit.delta = delta
    p_end = float(trace.p[-1])
    table = []
    for p_value in np.geomspace(delta, max(p_end, 1e-12), 5):
        if trace.p.min() <= p_value:
            table.append({"p": float(p_value), "residual_over_p2": residual_at(trace, float(p_value))})
    fit.residual_table = table
    return fit


def _manifold_check(args):
    config = load_config(args.config)
    if config.mode != "nonlinear" or config.initial.kind not in ("phi_scaled", "kernel_scaled"):
        raise ConfigurationError("manifold-check needs mode 'nonlinear' and initial.kind phi_scaled or kernel_scaled")
    try:
        deltas = [float(d) for d in args.deltas.split(",") if d.strip()]
    except ValueError:
        raise ConfigurationError(f"--deltas must be a comma-separated list of numbers, got {args.deltas!r}") from None
    if not deltas:
        raise ConfigurationError("--deltas is empty")
    window = tuple(args.window) if args.window else None
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            fits = list(pool.map(_one_decay_run, [config] * len(deltas), deltas, [window] * len(deltas)))
    else:
        fits = [_one_decay_run(config, d, window) for d in deltas]
    report = build_report(fits)
    return dict(config.to_dict(), deltas=deltas, window=window), report.to_dict()


def _kato_check(args):
    config = load_config(args.config)
    if config.mode != "linearized":
        raise ConfigurationError("kato-check needs config key 'mode' = 'linearized'")
    trace = simulate(config)
    result = kato_check(trace, config.t_end)
    payload = {"lhs": result.lhs, "rhs": result.rhs, "pass": result.passed, "diagnostics": empirical_constants(trace)}
    return config.to_dict(), payload


_COMMANDS = {
    "critical-lengths": _critical_lengths,
    "spectrum": _spectrum,
    "simulate": _simulate,
    "manifold-check": _manifold_check,
    "kato-check": _kato_check,
}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    start = time.perf_counter()
    try:
        config, payload = _COMMANDS[args.command](args)
        out = getattr(args, "report_json", None) or getattr(args, "json", None)
        if out:
            report = RunReport(args.command, config, payload, time.perf_counter() - start)
            write_report_json(report, out)
    except KdVLabError as exc:
        print(f"kdvlab {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"kdvlab {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
