"""
Command-line interface

    spectrum     eigenvalues of the (loaded) line, closed form / analytic / numeric
    sweep        damping of selected modes with the load at every node
    locus        eigenvalue paths as the load conductance grows
    sensitivity  first-order eigenvalue sensitivity profile and optimal node
    simulate     time-domain energization plus spectral peaks
    validate     seeded invariant suite

Exit codes: 0 success, 1 invariant failure, 2 usage/config error,
3 numerical failure, 4 completed with warnings.
"""
import argparse
import logging
import math
from pathlib import Path
from typing import Callable, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from exceptions import (
    CardinalityMismatchError,
    ConfigError,
    ConvergenceError,
    InsufficientSamplesError,
    InvalidParameterError,
    ScaledOverflowError,
    UnstableModelError,
)
from exports import (
    locus_frame,
    peaks_frame,
    sensitivity_frame,
    spectrum_frame,
    sweep_frame,
    trajectory_frame,
    write_frame,
)
from line_model import build_state_space, section_params, voltage_index
from schemas import LoadSpec, RunConfig
from sensitivity import (
    eigenvalue_sensitivity,
    finite_difference_sensitivity,
    operating_point,
    optimal_location,
    sensitivity_profile,
    uncontrollable_modes,
)
from settings import Settings, get_settings
from spectra import (
    identify_resonances,
    loaded_spectrum_analytic,
    matched_distances,
    numeric_spectrum,
    unloaded_spectrum,
)
from sweeps import (
    asymptotic_spectrum_large_load,
    conjecture_report,
    default_load_grid,
    empirical_optimal_locations,
    placement_sweep,
    root_locus,
    stationary_traces,
)
from timesim import simulate_energization, spectral_peaks
from validation import printed_recurrence, run_invariant_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_WARNINGS = 4


# -----------------------------------------------------------------------------
# Helpers
# -----------------------------------------------------------------------------


def report(message: str) -> None:
    print(f"[gridres] {message}")


def load_run_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        return RunConfig.model_validate_json(path.read_text())
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def output_path(args: argparse.Namespace, settings: Settings, default_name: str) -> Path:
    return Path(args.out) if args.out else settings.output_dir / default_name


def _workers(args: argparse.Namespace, settings: Settings) -> int:
    return args.workers or settings.workers


# -----------------------------------------------------------------------------
# Commands
# -----------------------------------------------------------------------------


def cmd_spectrum(config: RunConfig, args: argparse.Namespace, settings: Settings) -> int:
    section = section_params(config.line)
    load = config.load

    if args.method == "closed-form":
        if load is not None and load.g_load > 0:
            raise InvalidParameterError(
                "closed-form covers the unloaded line only; use --method analytic or numeric"
            )
        spectrum = unloaded_spectrum(section)
    elif args.method == "analytic":
        spectrum = loaded_spectrum_analytic(section, load or LoadSpec(z=1, g_load=0.0))
    else:
        spectrum = numeric_spectrum(build_state_space(section, load))

    path = write_frame(spectrum_frame(spectrum), output_path(args, settings, "spectrum.csv"))
    modes = identify_resonances(spectrum)
    report(
        f"{len(spectrum)} eigenvalues, {len(modes)} resonance modes "
        f"({spectrum.method}, {spectrum.source}) -> {path}"
    )
    if modes:
        first = modes[0]
        report(
            f"first resonance: {first.f_damped:.6g} Hz, omega_n={first.omega_n:.6g} rad/s, "
            f"sigma={first.sigma:.6g}"
        )

    if args.compare:
        oracle = numeric_spectrum(build_state_space(section, load))
        worst = float(matched_distances(spectrum, oracle).max())
        report(f"max matched distance to oracle: {worst:.3e} ({worst / oracle.scale:.3e} of ||A||)")
        if worst > 1e-6 * oracle.scale:
            logger.error("spectrum disagrees with the numeric oracle")
            return EXIT_INVARIANT
    return EXIT_OK


def cmd_sweep(config: RunConfig, args: argparse.Namespace, settings: Settings) -> int:
    section = section_params(config.line)
    g_load = config.sweep.g_load if args.g_load is None else args.g_load
    modes = args.modes or config.sweep.modes

    result = placement_sweep(section, g_load, modes, workers=_workers(args, settings))
    path = write_frame(sweep_frame(result), output_path(args, settings, "sweep.csv"))
    report(f"{len(result.rows)} rows -> {path}")

    for k, z in empirical_optimal_locations(result).items():
        gain = result.sigma(z, k) - result.baseline_sigma(k)
        report(f"mode {k}: best node z={z}, damping gain {gain:.6g}")
    for row in conjecture_report(result):
        tag = "agrees with" if row["agrees"] else "differs from"
        report(f"mode {row['mode_k']}: z={row['z_empirical']} {tag} n/2k={row['z_heuristic']:.1f} (conjecture)")

    if g_load == 0:
        report("degenerate sweep: g_load = 0")
        return EXIT_WARNINGS
    return EXIT_OK


def cmd_locus(config: RunConfig, args: argparse.Namespace, settings: Settings) -> int:
    section = section_params(config.line)
    n = section.n
    z = args.z or config.locus.z or (config.load.z if config.load else (n + 1) // 2)
    grid = config.locus.g_grid or default_load_grid(
        settings.locus_points, settings.locus_min_s, settings.locus_max_s
    )

    result = root_locus(section, z, grid, workers=_workers(args, settings))
    path = write_frame(locus_frame(result), output_path(args, settings, "locus.csv"))
    report(f"{len(result.traces)} traces over {len(grid)} loads at z={z} -> {path}")

    scale = build_state_space(section, LoadSpec(z=z, g_load=grid[-1])).frobenius_norm()
    still = stationary_traces(result, tol=1e-7 * scale)
    report(f"{len(still)} stationary traces, uncontrollable modes at z={z}: {uncontrollable_modes(n, z)}")

    targets = np.append(
        asymptotic_spectrum_large_load(section, z).eigenvalues,
        -(section.G + grid[-1]) / section.C,
    )
    still_ids = {t.trace_id for t in still}
    moving = [t for t in result.traces if t.trace_id not in still_ids and len(t.points) > 1]
    if moving:
        gaps = [float(np.min(np.abs(targets - t.end))) for t in moving]
        report(f"moving traces end within {max(gaps):.3e} of the large-load spectrum")

    if result.breaks:
        for b in result.breaks:
            logger.warning("trace %d split at grid index %d", b.trace_id, b.grid_index)
        return EXIT_WARNINGS
    return EXIT_OK


def cmd_sensitivity(config: RunConfig, args: argparse.Namespace, settings: Settings) -> int:
    section = section_params(config.line)
    n = section.n
    k = args.mode or config.sensitivity.k
    approximate = args.approximate or config.sensitivity.approximate

    profile = sensitivity_profile(section, k, approximate=approximate)
    path = write_frame(sensitivity_frame(profile), output_path(args, settings, "sensitivity.csv"))
    z_star = optimal_location(section, k, approximate=approximate)
    flag = "" if k == 1 else " (conjecture)"
    report(f"mode {k}: optimal node z*={z_star} of {n}{flag} -> {path}")

    op = operating_point(section, k)
    if k == 1:
        centre = n if n % 2 else n - 1
        exact = eigenvalue_sensitivity(op, centre, section)
        approx = eigenvalue_sensitivity(op, centre, section, approximate=True)
        report(
            f"centre row j={centre}: exact {exact.real:.6g}{exact.imag:+.6g}j, "
            f"closed form {approx.real:.6g}, -1/(C(n+2)) = {-1.0 / (section.C * (n + 2)):.6g}"
        )

    exact = eigenvalue_sensitivity(op, 2 * z_star - 1, section)
    fd = finite_difference_sensitivity(section, z_star, k, config.sensitivity.fd_step)
    rel = abs(fd - exact) / abs(exact) if exact else math.inf
    report(f"finite-difference check at z*={z_star}: relative error {rel:.3e}")
    if rel > 0.05:
        logger.warning("finite-difference check exceeds 5%% (%.3g)", rel)
        return EXIT_WARNINGS
    return EXIT_OK


def cmd_simulate(config: RunConfig, args: argparse.Namespace, settings: Settings) -> int:
    section = section_params(config.line)
    sim = config.simulate
    dt = sim.dt or settings.sim_dt_s
    horizon = sim.horizon or settings.sim_horizon_s

    model = build_state_space(section, config.load)
    trajectory = simulate_energization(
        model, sim.waveform, dt, horizon, allow_unstable=sim.allow_unstable or args.allow_unstable
    )
    probe = voltage_index((section.n + 1) // 2) if sim.probe is None else sim.probe
    if probe >= model.dim:
        raise InvalidParameterError(f"probe index {probe} outside 0..{model.dim - 1}")

    path = write_frame(trajectory_frame(trajectory, sim.stride), output_path(args, settings, "trajectory.csv"))
    peaks = spectral_peaks(trajectory, probe, settings.window_alpha)
    peaks_path = Path(args.peaks_out) if args.peaks_out else path.with_name(path.stem + "_peaks.csv")
    write_frame(peaks_frame(peaks), peaks_path)

    report(f"{trajectory.n_samples} samples -> {path}, {len(peaks)} peaks on {model.labels[probe]} -> {peaks_path}")
    modes = identify_resonances(numeric_spectrum(model))
    if peaks and modes:
        report(f"dominant peak {peaks[0].frequency_hz:.6g} Hz, first resonance {modes[0].f_damped:.6g} Hz")

    if not trajectory.stable:
        return EXIT_WARNINGS
    return EXIT_OK


def cmd_validate(config: Optional[RunConfig], args: argparse.Namespace, settings: Settings) -> int:
    seed = args.seed if args.seed is not None else (config.seed if config and config.seed is not None else settings.seed)
    results = run_invariant_suite(
        seed, draws=args.draws, chebyshev=printed_recurrence if args.corrupt_recurrence else None
    )
    frame = pd.DataFrame([r.model_dump() for r in results])
    frame.insert(1, "status", np.where(frame["passed"], "PASS", "FAIL"))
    frame = frame.drop(columns="passed")
    print(frame.to_csv(index=False, float_format="%.3e", lineterminator="\n"), end="")
    if args.out:
        write_frame(frame, args.out)

    failed = int((frame["status"] == "FAIL").sum())
    report(f"seed {seed}: {len(results) - failed}/{len(results)} invariants hold")
    return EXIT_INVARIANT if failed else EXIT_OK


COMMANDS: Dict[str, Callable[..., int]] = {
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "locus": cmd_locus,
    "sensitivity": cmd_sensitivity,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


# -----------------------------------------------------------------------------
# Argument parsing
# -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Path to the JSON run configuration.")
    common.add_argument("--out", help="Output CSV path (default: <output_dir>/<command>.csv).")
    common.add_argument("--seed", type=int, help="Seed for randomized steps.")
    common.add_argument("--workers", type=int, help="Thread pool size for sweeps.")
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR.")

    parser = argparse.ArgumentParser(prog="gridres", description="Resonance analysis of pi-section line models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="Eigenvalues of the line model.")
    p.add_argument("--method", choices=["closed-form", "analytic", "numeric"], default="numeric")
    p.add_argument("--compare", action="store_true", help="Also report the distance to the numeric oracle.")

    p = sub.add_parser("sweep", parents=[common], help="Damping versus load position.")
    p.add_argument("--g-load", type=float, help="Load conductance in siemens.")
    p.add_argument("--modes", type=int, nargs="+", help="Mode indices to track.")

    p = sub.add_parser("locus", parents=[common], help="Root locus versus load conductance.")
    p.add_argument("--z", type=int, help="Load node (1-based).")

    p = sub.add_parser("sensitivity", parents=[common], help="Eigenvalue sensitivity profile.")
    p.add_argument("--mode", type=int, help="Mode index k.")
    p.add_argument("--approximate", action="store_true", help="Use the real closed form (mode 1 only).")

    p = sub.add_parser("simulate", parents=[common], help="Time-domain energization.")
    p.add_argument("--peaks-out", help="CSV path for spectral peaks.")
    p.add_argument("--allow-unstable", action="store_true")

    p = sub.add_parser("validate", parents=[common], help="Seeded invariant suite.")
    p.add_argument("--draws", type=int, default=8, help="Random lines per check.")
    p.add_argument("--corrupt-recurrence", action="store_true", help="Swap in a wrong Chebyshev recurrence.")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    level = (args.log_level or settings.log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO))

    try:
        config = load_run_config(args.config) if args.config else None
        if config is None and args.command != "validate":
            raise ConfigError(f"{args.command} needs --config")
        return COMMANDS[args.command](config, args, settings)
    except (ConfigError, InvalidParameterError, InsufficientSamplesError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except (ConvergenceError, CardinalityMismatchError, UnstableModelError, ScaledOverflowError) as exc:
        logger.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
