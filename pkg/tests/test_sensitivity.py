"""
Sensitivity tests.

 Group 1 — Operating point and partial derivatives
 Group 2 — Exact and approximate sensitivity values
 Group 3 — Profile shape and optimal placement
 Group 4 — Agreement with finite differences and first-order prediction
"""
import math

import numpy as np
import pytest

from exceptions import InvalidParameterError, UnsupportedModeError
from line_model import build_state_space, section_params
from polynomials import f1, f2
from schemas import LoadSpec
from sensitivity import (
    eigenvalue_sensitivity,
    finite_difference_sensitivity,
    first_order_prediction,
    operating_point,
    optimal_location,
    partial_derivatives,
    sensitivity_profile,
    uncontrollable_modes,
)
from spectra import eigenvalues_of


def _closed_form(section, k, j):
    """Exact sensitivity at theta* = k pi/(n+1), reduced by hand."""
    n, a, b, C = section.n, section.r_over_l, section.g_over_c, section.C
    theta = k * math.pi / (n + 1)
    lam = operating_point(section, k).lambda_star
    ratio = (lam + a) / (lam + 0.5 * (a + b))
    return ratio * ((-1) ** k * math.cos((n - j) * theta) - 1) / (2 * C * (n + 1))


# ── Group 1 ──────────────────────────────────────────────────────────────────
def test_operating_point_lies_on_f2(sections60):
    op = operating_point(sections60, 1)
    assert op.theta_star == pytest.approx(math.pi / 61)
    assert abs(f2(op.theta_star, op.lambda_star, sections60)) <= 1e-12
    assert op.lambda_star.imag > 0
    assert op.lambda_star.real == pytest.approx(-20.0)


def test_operating_point_rejects_bad_mode(sections9):
    with pytest.raises(UnsupportedModeError):
        operating_point(sections9, 0)
    with pytest.raises(UnsupportedModeError):
        operating_point(sections9, 10)


def test_partials_at_operating_point(sections9):
    op = operating_point(sections9, 1)
    p = partial_derivatives(op, 9, sections9)
    assert p.dF2_dtheta == pytest.approx(-math.sin(math.pi / 10))
    assert p.dF1_dGL == pytest.approx(sections9.L * (op.lambda_star + sections9.r_over_l), rel=1e-12)


@pytest.mark.parametrize("j", [1, 7, 9, 15])
def test_partials_match_central_differences(sections9, j):
    op = operating_point(sections9, 2)
    p = partial_derivatives(op, j, sections9)
    theta, lam, g = op.theta_star, op.lambda_star, op.g_total

    h = 1e-6
    d_theta = (f1(theta + h, g, lam, j, sections9) - f1(theta - h, g, lam, j, sections9)) / (2 * h)
    h_lam = 1e-6 * abs(lam)
    d_lam = (f1(theta, g, lam + h_lam, j, sections9) - f1(theta, g, lam - h_lam, j, sections9)) / (2 * h_lam)
    d_gl = (f1(theta, g + h, lam, j, sections9) - f1(theta, g - h, lam, j, sections9)) / (2 * h)

    assert p.dF1_dtheta == pytest.approx(d_theta, rel=1e-5)
    assert p.dF1_dlambda == pytest.approx(d_lam, rel=1e-5, abs=1e-12)
    assert p.dF1_dGL == pytest.approx(d_gl, rel=1e-5, abs=1e-12)


def test_even_row_rejected(sections9):
    op = operating_point(sections9, 1)
    with pytest.raises(InvalidParameterError):
        eigenvalue_sensitivity(op, 4, sections9)


# ── Group 2 ──────────────────────────────────────────────────────────────────
def test_approximate_centre_value(sections9):
    op = operating_point(sections9, 1)
    value = eigenvalue_sensitivity(op, 9, sections9, approximate=True)
    assert value.imag == 0
    assert value.real == pytest.approx(-1 / (sections9.C * 11), rel=1e-12)


def test_approximate_form_is_mode_one_only(sections9):
    with pytest.raises(UnsupportedModeError):
        eigenvalue_sensitivity(operating_point(sections9, 2), 9, sections9, approximate=True)


def test_exact_centre_value(sections9):
    value = eigenvalue_sensitivity(operating_point(sections9, 1), 9, sections9)
    assert value.real == pytest.approx(-1 / (sections9.C * 10), rel=1e-9)
    # mostly real: |Im/Re| = (R/L) / (2 Im lam*)
    assert abs(value.imag / value.real) < 0.02


@pytest.mark.parametrize("k", [1, 2, 3])
def test_exact_matches_hand_reduction(sections60, k):
    op = operating_point(sections60, k)
    for j in range(1, 120, 2):
        assert eigenvalue_sensitivity(op, j, sections60) == pytest.approx(
            _closed_form(sections60, k, j), rel=1e-8
        )


def test_closed_form_reference_within_two_percent(sections60):
    exact = eigenvalue_sensitivity(operating_point(sections60, 1), 59, sections60)
    reference = -1 / (sections60.C * 62)
    assert abs(exact.real - reference) <= 0.02 * abs(reference)


# ── Group 3 ──────────────────────────────────────────────────────────────────
@pytest.mark.parametrize("n", [5, 9, 21, 60, 121])
def test_mode_one_profile_is_monotone_toward_centre(reference_line, n):
    section = section_params(reference_line.model_copy(update={"n_sections": n}))
    profile = sensitivity_profile(section, 1)
    re = profile.dlambda.real
    half = [i for i, j in enumerate(profile.j) if j <= n]
    assert np.all(np.diff(re[half]) < 0)
    assert np.all(re < 0)
    np.testing.assert_allclose(re, re[::-1], rtol=1e-9)


def test_profile_covers_every_odd_row(sections9):
    profile = sensitivity_profile(sections9, 1)
    assert profile.j == (1, 3, 5, 7, 9, 11, 13, 15, 17)
    assert profile.z == (1, 2, 3, 4, 5, 6, 7, 8, 9)
    assert profile.at(9) == pytest.approx(eigenvalue_sensitivity(operating_point(sections9, 1), 9, sections9))


def test_optimal_location_mode_one(sections9, sections60):
    assert optimal_location(sections9, 1) == 5
    assert optimal_location(sections60, 1) == 30


def test_optimal_location_mode_two(sections60):
    assert optimal_location(sections60, 2) == 15


@pytest.mark.parametrize("factor", [0.5, 2.0])
def test_optimum_ignores_series_parameters(reference_line, factor):
    scaled = reference_line.model_copy(
        update={"r_per_km": reference_line.r_per_km * factor, "l_per_km": reference_line.l_per_km * factor}
    )
    assert optimal_location(section_params(scaled), 1) == 30


def test_even_modes_insensitive_at_centre(sections9):
    for k in (2, 4):
        assert abs(eigenvalue_sensitivity(operating_point(sections9, k), 9, sections9)) <= 1e-9 / sections9.C


def test_uncontrollable_modes():
    assert uncontrollable_modes(9, 5) == [2, 4, 6, 8]
    assert uncontrollable_modes(60, 30) == []
    assert uncontrollable_modes(5, 2) == [3]


# ── Group 4 ──────────────────────────────────────────────────────────────────
@pytest.mark.parametrize("z", [1, 15, 30])
def test_exact_sensitivity_matches_finite_difference(sections60, z):
    exact = eigenvalue_sensitivity(operating_point(sections60, 1), 2 * z - 1, sections60)
    fd = finite_difference_sensitivity(sections60, z, 1)
    assert abs(fd - exact) <= 0.05 * abs(exact)


def test_small_load_prediction_at_quarter_point(sections60):
    g, z = 1e-5, 15
    op = operating_point(sections60, 1)
    predicted = eigenvalue_sensitivity(op, 2 * z - 1, sections60) * g
    values = eigenvalues_of(build_state_space(sections60, LoadSpec(z=z, g_load=g)).A)
    actual = values[np.argmin(np.abs(values - op.lambda_star))] - op.lambda_star
    assert abs(actual - predicted) <= 0.05 * abs(predicted)


@pytest.mark.parametrize("section_fixture", ["sections9", "sections60"])
def test_first_order_prediction(request, section_fixture):
    section = request.getfixturevalue(section_fixture)
    load = LoadSpec(z=(section.n + 1) // 2, g_load=1e-4)
    op = operating_point(section, 1)
    predicted = first_order_prediction(section, load, 1)
    values = eigenvalues_of(build_state_space(section, load).A)
    actual = values[np.argmin(np.abs(values - op.lambda_star))]
    assert abs(actual - predicted) <= 0.1 * abs(predicted - op.lambda_star)


def test_finite_difference_rejects_bad_step(sections9):
    with pytest.raises(InvalidParameterError):
        finite_difference_sensitivity(sections9, 3, 1, step=0.0)
