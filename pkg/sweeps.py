"""
Parameter sweeps over load position and load conductance
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Sequence, TypeVar

import numpy as np

from exceptions import ConvergenceError, InvalidParameterError, TraceBreakError, UnsupportedModeError
from line_model import build_state_space, check_position, voltage_index
from schemas import (
    LoadSpec,
    PlacementSweepResult,
    RootLocusResult,
    RootLocusTrace,
    SectionParams,
    Spectrum,
    SweepRow,
    TraceBreak,
)
from spectra import damping_factor, eigenvalues_of, identify_resonances, match_modes, numeric_spectrum

logger = logging.getLogger(__name__)

T = TypeVar("T")


def _map(fn: Callable[..., T], items: Sequence, workers: int) -> List[T]:
    """Ordered map, threaded when workers > 1."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def default_load_grid(points: int = 60, g_min: float = 1e-4, g_max: float = 1e4) -> List[float]:
    """Zero followed by a log-spaced grid from g_min to g_max (siemens)."""
    if points < 2 or not 0 < g_min < g_max:
        raise InvalidParameterError("need points >= 2 and 0 < g_min < g_max")
    return [0.0] + list(np.logspace(np.log10(g_min), np.log10(g_max), points - 1))


# ==================== Placement ====================
def placement_sweep(
    section: SectionParams, g_load: float, modes: Iterable[int], workers: int = 1
) -> PlacementSweepResult:
    """
    Damping of each requested mode with the load at every node z = 1..n.
    Mode identity at each z follows the minimum-distance pairing against the
    unloaded spectrum. Rows with z = 0 hold the unloaded baseline.
    """
    n = section.n
    modes = tuple(sorted(set(modes)))
    if not modes:
        raise InvalidParameterError("at least one mode is required")
    for k in modes:
        if not 1 <= k <= n:
            raise UnsupportedModeError(f"mode k={k} outside 1..{n}")
    if g_load < 0:
        raise InvalidParameterError("g_load must be non-negative")
    if g_load == 0:
        logger.warning("g_load = 0: every row equals the unloaded baseline")

    baseline = numeric_spectrum(build_state_space(section))
    resonances = identify_resonances(baseline)
    if len(resonances) < max(modes):
        raise UnsupportedModeError(
            f"only {len(resonances)} underdamped modes, mode {max(modes)} requested"
        )
    index_of = {
        k: int(np.argmin(np.abs(baseline.eigenvalues - resonances[k - 1].lam))) for k in modes
    }

    rows = [
        SweepRow(z=0, mode_k=k, sigma=m.sigma, re=m.lam.real, im=m.lam.imag)
        for k, m in ((k, resonances[k - 1]) for k in modes)
    ]

    def at_position(z: int) -> List[SweepRow]:
        try:
            loaded = numeric_spectrum(build_state_space(section, LoadSpec(z=z, g_load=g_load)))
        except ConvergenceError as exc:
            raise ConvergenceError(f"eigensolver failed at z={z}", {**exc.diagnostics, "z": z}) from exc
        pairing = dict(match_modes(baseline, loaded))
        out = []
        for k in modes:
            lam = complex(loaded.eigenvalues[pairing[index_of[k]]])
            out.append(SweepRow(z=z, mode_k=k, sigma=damping_factor(lam), re=lam.real, im=lam.imag))
        return out

    for chunk in _map(at_position, list(range(1, n + 1)), workers):
        rows.extend(chunk)
    logger.info("placement sweep: n=%d g_load=%.6g modes=%s", n, g_load, list(modes))
    return PlacementSweepResult(n=n, g_load=g_load, modes=modes, rows=rows)


def empirical_optimal_locations(result: PlacementSweepResult) -> Dict[int, int]:
    """argmax_z sigma(z, k) per mode, smallest z on ties."""
    return {k: int(np.argmax(result.sigma_profile(k))) + 1 for k in result.modes}


def conjecture_report(result: PlacementSweepResult) -> List[Dict]:
    """
    Compare each empirical optimum for k >= 2 with the heuristic n/(2k).
    Purely observational; a mismatch is reported, never raised.
    """
    report = []
    for k, z in empirical_optimal_locations(result).items():
        if k < 2:
            continue
        guess = result.n / (2 * k)
        agrees = abs(z - guess) <= 1 or abs((result.n + 1 - z) - guess) <= 1
        if not agrees:
            logger.warning("mode %d: empirical optimum z=%d, heuristic n/2k=%.1f", k, z, guess)
        report.append({"mode_k": k, "z_empirical": z, "z_heuristic": guess, "agrees": agrees})
    return report


# ==================== Root locus ====================
def _local_spacing(values: np.ndarray, i: int) -> float:
    others = np.delete(values, i)
    if others.size == 0:
        return np.inf
    return float(np.min(np.abs(others - values[i])))


def root_locus(
    section: SectionParams, z: int, g_grid: Sequence[float], workers: int = 1
) -> RootLocusResult:
    """
    Follow every eigenvalue as the load at node z grows along g_grid.

    Consecutive spectra are chained by minimum-distance pairing. A step longer
    than half the local inter-mode spacing is logged as a trace break and the
    trace is split.
    """
    check_position(z, section.n)
    grid = [float(g) for g in g_grid]
    if not grid:
        raise InvalidParameterError("g_grid must not be empty")
    if any(g < 0 for g in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidParameterError("g_grid must be non-negative and strictly increasing")

    spectra: List[Spectrum] = _map(
        lambda g: numeric_spectrum(build_state_space(section, LoadSpec(z=z, g_load=g))), grid, workers
    )

    traces = [
        RootLocusTrace(trace_id=i, z=z, start_index=0, g_load=[grid[0]], points=[complex(v)])
        for i, v in enumerate(spectra[0].eigenvalues)
    ]
    # slot -> trace currently fed by eigenvalue `slot` of the previous spectrum
    active = list(range(len(traces)))
    breaks: List[TraceBreak] = []

    for step in range(1, len(grid)):
        prev, cur = spectra[step - 1].eigenvalues, spectra[step].eigenvalues
        next_active = [0] * len(cur)
        for i, jj in match_modes(spectra[step - 1], spectra[step]):
            trace = traces[active[i]]
            distance = abs(cur[jj] - prev[i])
            limit = 0.5 * _local_spacing(prev, i)
            if distance > limit:
                new = RootLocusTrace(
                    trace_id=len(traces),
                    z=z,
                    start_index=step,
                    continues=trace.trace_id,
                    g_load=[grid[step]],
                    points=[complex(cur[jj])],
                )
                traces.append(new)
                err = TraceBreakError(trace.trace_id, step, distance, limit)
                logger.warning("%s", err)
                breaks.append(
                    TraceBreak(
                        trace_id=trace.trace_id,
                        new_trace_id=new.trace_id,
                        grid_index=step,
                        distance=distance,
                        limit=limit,
                    )
                )
                next_active[jj] = new.trace_id
            else:
                trace.g_load.append(grid[step])
                trace.points.append(complex(cur[jj]))
                next_active[jj] = trace.trace_id
        active = next_active

    logger.info("root locus: z=%d, %d grid points, %d traces, %d breaks", z, len(grid), len(traces), len(breaks))
    return RootLocusResult(z=z, g_grid=grid, traces=traces, breaks=breaks)


def stationary_traces(result: RootLocusResult, tol: float) -> List[RootLocusTrace]:
    """Traces spanning the whole grid that never move more than tol from their start."""
    return [
        t
        for t in result.traces
        if len(t.points) == len(result.g_grid) and np.max(np.abs(t.values() - t.start)) <= tol
    ]


def asymptotic_spectrum_large_load(section: SectionParams, z: int) -> Spectrum:
    """
    Limit of the loaded spectrum as g_load grows without bound.

    The loaded row decouples: what remains is the union of the leading block
    (rows before the load) and the trailing block (rows after it), plus one
    eigenvalue near -G_L/C that runs off to -infinity.
    """
    check_position(z, section.n)
    A = build_state_space(section).matrix()
    row = voltage_index(z)
    leading = eigenvalues_of(A[:row, :row])
    trailing = eigenvalues_of(A[row + 1:, row + 1:])
    return Spectrum(
        eigenvalues=np.concatenate([leading, trailing]),
        method="asymptotic",
        source=f"n={section.n} z={z} g_load->inf",
        scale=float(np.linalg.norm(A)),
        load_dependent="-G_L/C",
    )
