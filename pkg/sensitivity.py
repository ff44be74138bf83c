"""
First-order sensitivity of resonant eigenvalues to a shunt load

Linearising F1 = F2 = 0 about the unloaded root (theta*, lam*) of mode k
gives, by implicit differentiation,

    dlam/dG_L = F1_G / (F1_theta * F2_lam / F2_theta - F1_lam)

Placing the load where Re(dlam/dG_L) is most negative damps mode k fastest.
"""
import logging
import math
from typing import List

import numpy as np

from exceptions import InvalidParameterError, UnsupportedModeError
from line_model import build_state_space, check_position, voltage_index
from polynomials import f1_partials, f2, f2_partials
from schemas import LoadSpec, OperatingPoint, SectionParams, SensitivityPartials, SensitivityProfile
from spectra import eigenvalues_of

logger = logging.getLogger(__name__)


def _check_mode(k: int, n: int) -> None:
    if not 1 <= k <= n:
        raise UnsupportedModeError(f"mode k={k} outside 1..{n}")


def operating_point(section: SectionParams, k: int) -> OperatingPoint:
    """theta* = k pi / (n+1) and the upper (larger-imaginary) root lam* of F2."""
    n = section.n
    _check_mode(k, n)
    a, b, m = section.r_over_l, section.g_over_c, section.lc
    theta = k * math.pi / (n + 1)
    disc = 0.25 * (a - b) ** 2 - 4.0 * math.sin(0.5 * theta) ** 2 / m
    root = complex(0.0, math.sqrt(-disc)) if disc < 0 else complex(math.sqrt(disc), 0.0)
    lam = complex(-0.5 * (a + b), 0.0) + root

    residual = abs(f2(theta, lam, section))
    if residual > 1e-10:
        logger.warning("operating point k=%d: |F2| = %.3g", k, residual)
    return OperatingPoint(k=k, theta_star=theta, lambda_star=lam, g_total=section.G, n=n)


def _check_row(j: int, n: int) -> None:
    if j % 2 == 0 or not 1 <= j <= 2 * n - 1:
        raise InvalidParameterError(f"j must be odd in 1..{2 * n - 1}, got {j}")


def partial_derivatives(op: OperatingPoint, j: int, section: SectionParams) -> SensitivityPartials:
    _check_row(j, section.n)
    theta, lam = op.theta_star, op.lambda_star
    p = f1_partials(theta, op.g_total, lam, j, section)
    d2_theta, d2_lambda = f2_partials(theta, lam, section)
    return SensitivityPartials(
        dF1_dGL=complex(p.d_gl),
        dF1_dlambda=complex(p.d_lambda),
        dF1_dtheta=complex(p.d_theta),
        dF2_dtheta=complex(d2_theta),
        dF2_dlambda=complex(d2_lambda),
    )


def _approximate_sensitivity(op: OperatingPoint, j: int, section: SectionParams) -> complex:
    """Real closed form for mode 1 from the lossless simplification (real part only)."""
    n, theta = section.n, op.theta_star
    N = n - j
    numerator = math.cos(N * theta) + 1.0
    denominator = (
        (-N * math.cos(theta) * math.sin(N * theta) - n * math.sin(n * theta)) / math.sin(theta)
        - math.cos(N * theta)
        - 1.0
    )
    return complex(numerator / (2.0 * section.C * denominator), 0.0)


def eigenvalue_sensitivity(
    op: OperatingPoint, j: int, section: SectionParams, approximate: bool = False
) -> complex:
    """dlam/dG_L for mode op.k with the load on odd row j (node z = (j+1)/2)."""
    _check_row(j, section.n)
    if approximate:
        if op.k != 1:
            raise UnsupportedModeError("the closed-form approximation covers mode 1 only")
        return _approximate_sensitivity(op, j, section)

    p = partial_derivatives(op, j, section)
    denominator = p.dF1_dtheta * p.dF2_dlambda / p.dF2_dtheta - p.dF1_dlambda
    if denominator == 0:
        raise InvalidParameterError(f"degenerate operating point for k={op.k}, j={j}")
    return p.dF1_dGL / denominator


def sensitivity_profile(
    section: SectionParams, k: int, approximate: bool = False
) -> SensitivityProfile:
    op = operating_point(section, k)
    rows = tuple(range(1, 2 * section.n, 2))
    values = [eigenvalue_sensitivity(op, j, section, approximate) for j in rows]
    return SensitivityProfile(n=section.n, k=k, j=rows, dlambda=values, approximate=approximate)


def optimal_location(section: SectionParams, k: int, approximate: bool = False) -> int:
    """
    Node z* with the most negative Re(dlam/dG_L). Ties go to the smaller z.
    Only k = 1 is backed by a closed-form argument; higher modes are empirical.
    """
    profile = sensitivity_profile(section, k, approximate)
    score = -profile.dlambda.real
    best = score.max()
    # within rounding of the maximum counts as a tie
    ties = np.flatnonzero(score >= best - 1e-12 * abs(best))
    z = profile.z[int(ties[0])]
    logger.info("mode %d: optimal load node z*=%d of %d", k, z, section.n)
    return z


def uncontrollable_modes(n: int, z: int) -> List[int]:
    """Modes whose loaded-row factor sin(k z pi/(n+1)) vanishes: k z = 0 mod (n+1)."""
    check_position(z, n)
    return [k for k in range(1, n + 1) if (k * z) % (n + 1) == 0]


def finite_difference_sensitivity(
    section: SectionParams, z: int, k: int, step: float = 1e-6
) -> complex:
    """Central difference of the numeric eigenvalue nearest lam*_k in the load conductance."""
    if step <= 0:
        raise InvalidParameterError("step must be positive")
    check_position(z, section.n)
    target = operating_point(section, k).lambda_star
    base = build_state_space(section).matrix()
    row = voltage_index(z)

    def nearest(delta: float) -> complex:
        A = base.copy()
        A[row, row] -= delta / section.C
        values = eigenvalues_of(A)
        return complex(values[np.argmin(np.abs(values - target))])

    return (nearest(step) - nearest(-step)) / (2.0 * step)


def first_order_prediction(section: SectionParams, load: LoadSpec, k: int) -> complex:
    """lam*_k + dlam/dG_L * g_load."""
    check_position(load.z, section.n)
    op = operating_point(section, k)
    return op.lambda_star + eigenvalue_sensitivity(op, load.j, section) * load.g_load
