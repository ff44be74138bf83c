"""
Sweep tests.

 Group 1 — Placement sweep on the reference line
 Group 2 — Root locus and the large-load limit
 Group 3 — Argument validation and helpers
"""
import numpy as np
import pytest

from exceptions import InvalidParameterError, PositionOutOfRangeError, UnsupportedModeError
from line_model import build_state_space, section_params
from polynomials import char_poly_odd, theta_from_lambda
from schemas import LineParams, LoadSpec, SectionParams
from spectra import identify_resonances, unloaded_spectrum
from sweeps import (
    asymptotic_spectrum_large_load,
    conjecture_report,
    default_load_grid,
    empirical_optimal_locations,
    placement_sweep,
    root_locus,
    stationary_traces,
)


@pytest.fixture(scope="module")
def reference_sweep():
    line = LineParams(r_per_km=0.02, l_per_km=5e-4, c_per_km=4e-7, length_km=100.0, n_sections=60)
    return placement_sweep(section_params(line), 0.01, [1, 2, 3, 4, 5])


# ── Group 1 ──────────────────────────────────────────────────────────────────
def test_sweep_row_count(reference_sweep):
    assert len(reference_sweep.rows) == 60 * 5 + 5
    assert reference_sweep.modes == (1, 2, 3, 4, 5)


def test_mode_one_peaks_at_centre(reference_sweep):
    sigma = reference_sweep.sigma_profile(1)
    assert int(np.argmax(sigma)) + 1 in (30, 31)
    assert np.all(np.diff(sigma[:30]) >= 0)
    np.testing.assert_allclose(sigma, sigma[::-1], rtol=1e-9)


def test_mode_one_always_gains_damping(reference_sweep):
    baseline = reference_sweep.baseline_sigma(1)
    assert np.all(reference_sweep.sigma_profile(1) > baseline)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_endpoint_load_is_weak(reference_sweep, k):
    sigma = reference_sweep.sigma_profile(k)
    baseline = reference_sweep.baseline_sigma(k)
    assert sigma[0] - baseline <= 0.1 * (sigma.max() - baseline)


def test_centre_load_barely_touches_mode_two(reference_sweep):
    gain_one = reference_sweep.sigma(30, 1) - reference_sweep.baseline_sigma(1)
    change_two = abs(reference_sweep.sigma(30, 2) - reference_sweep.baseline_sigma(2))
    assert change_two <= 0.05 * reference_sweep.baseline_sigma(2)
    assert change_two <= 0.01 * gain_one


def test_centre_load_leaves_even_modes_exactly_on_odd_line(sections9):
    result = placement_sweep(sections9, 0.01, [1, 2, 3, 4])
    for k in (2, 4):
        assert result.sigma(5, k) == pytest.approx(result.baseline_sigma(k), rel=1e-9)
    assert result.sigma(5, 1) > result.baseline_sigma(1)


def test_empirical_optima(reference_sweep):
    optima = empirical_optimal_locations(reference_sweep)
    assert optima[1] in (30, 31)
    assert abs(optima[2] - 15) <= 1 or abs(optima[2] - 46) <= 1
    report = conjecture_report(reference_sweep)
    assert [row["mode_k"] for row in report] == [2, 3, 4, 5]
    assert report[0]["agrees"]


def test_sweep_workers_give_identical_rows(sections9):
    serial = placement_sweep(sections9, 0.02, [1, 3])
    threaded = placement_sweep(sections9, 0.02, [1, 3], workers=4)
    assert [(r.z, r.mode_k) for r in serial.rows] == [(r.z, r.mode_k) for r in threaded.rows]
    np.testing.assert_allclose(
        [r.sigma for r in serial.rows], [r.sigma for r in threaded.rows], rtol=1e-12
    )


def test_zero_load_sweep_is_flat(sections9):
    result = placement_sweep(sections9, 0.0, [1])
    np.testing.assert_allclose(result.sigma_profile(1), result.baseline_sigma(1), rtol=1e-9)


# ── Group 2 ──────────────────────────────────────────────────────────────────
@pytest.fixture(scope="module")
def centre_locus():
    section = SectionParams(R=100.0 / 9 * 0.02, L=100.0 / 9 * 5e-4, C=100.0 / 9 * 4e-7, G=0.0, n=9)
    grid = default_load_grid(60, 1e-4, 1e4)
    return section, grid, root_locus(section, 5, grid)


def test_locus_starts_at_unloaded_spectrum(centre_locus):
    section, grid, result = centre_locus
    starts = np.array([t.start for t in result.traces if t.start_index == 0])
    assert len(starts) == 19
    closed = unloaded_spectrum(section).eigenvalues
    for value in closed:
        assert np.min(np.abs(starts - value)) <= 1e-6 * np.abs(closed.imag).max()


def test_even_mode_traces_are_stationary(centre_locus):
    section, grid, result = centre_locus
    scale = build_state_space(section, LoadSpec(z=5, g_load=grid[-1])).frobenius_norm()
    still = stationary_traces(result, tol=1e-7 * scale)
    even = [m.lam for m in identify_resonances(unloaded_spectrum(section)) if m.k % 2 == 0]
    for lam in even:
        for value in (lam, lam.conjugate()):
            assert any(abs(t.start - value) <= 1e-6 * abs(value) for t in still)


def test_locus_ends_on_large_load_spectrum(centre_locus):
    section, grid, result = centre_locus
    targets = np.append(
        asymptotic_spectrum_large_load(section, 5).eigenvalues, -(section.G + grid[-1]) / section.C
    )
    ends = [t.end for t in result.traces if t.start_index + len(t.points) == len(grid)]
    assert len(ends) == 19
    for value in ends:
        assert np.min(np.abs(targets - value)) <= 1e-3 * abs(value) + 1.0


def test_one_trace_follows_the_load_pole(centre_locus):
    section, grid, result = centre_locus
    pole = -(section.G + grid[-1]) / section.C
    ends = np.array([t.end for t in result.traces])
    nearest = ends[np.argmin(np.abs(ends - pole))]
    assert abs(nearest - pole) <= 0.01 * abs(pole)


def test_single_point_grid_gives_single_point_traces(sections9):
    result = root_locus(sections9, 3, [0.0])
    assert len(result.traces) == 19
    assert all(len(t.points) == 1 for t in result.traces)
    assert result.breaks == []


def test_asymptotic_block_sizes(sections60):
    spectrum = asymptotic_spectrum_large_load(sections60, 30)
    assert len(spectrum) == 59 + 61
    assert spectrum.load_dependent == "-G_L/C"


def test_asymptotic_blocks_are_shorter_lines(sections9):
    spectrum = asymptotic_spectrum_large_load(sections9, 5)
    for lam in spectrum.eigenvalues:
        # each block is a 4-section line: sin(5 theta) vanishes at its roots
        if abs(lam + sections9.r_over_l) < 1e-6 * abs(lam):
            continue
        theta = theta_from_lambda(lam, sections9)
        assert abs(np.sin(5 * theta)) <= 1e-8
        residual = char_poly_odd(4, lam, sections9)
        assert residual.log2_abs() - 9 * np.log2(abs(lam)) <= np.log2(1e-8)


# ── Group 3 ──────────────────────────────────────────────────────────────────
def test_sweep_rejects_bad_modes(sections9):
    with pytest.raises(UnsupportedModeError):
        placement_sweep(sections9, 0.01, [10])
    with pytest.raises(InvalidParameterError):
        placement_sweep(sections9, 0.01, [])


def test_locus_rejects_bad_grid(sections9):
    with pytest.raises(InvalidParameterError):
        root_locus(sections9, 3, [0.1, 0.05])
    with pytest.raises(PositionOutOfRangeError):
        root_locus(sections9, 10, [0.0, 1.0])


def test_default_load_grid():
    grid = default_load_grid(60, 1e-4, 1e4)
    assert len(grid) == 60
    assert grid[0] == 0.0
    assert grid[1] == pytest.approx(1e-4)
    assert grid[-1] == pytest.approx(1e4)
    assert all(b > a for a, b in zip(grid, grid[1:]))
