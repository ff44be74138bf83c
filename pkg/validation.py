"""
Invariant suite

Each check draws seeded random small lines and compares two independent
routes to the same quantity. Results come back as a list of InvariantResult;
nothing here raises on a failed check.
"""
import logging
import math
from typing import Callable, List, Optional

import numpy as np
from pydantic import BaseModel

from line_model import build_state_space, mirrored_position
from polynomials import (
    chebyshev_u,
    char_poly_loaded,
    char_poly_odd,
    f1,
    tridiagonal_char_poly,
)
from schemas import LoadSpec, SectionParams
from sensitivity import (
    eigenvalue_sensitivity,
    finite_difference_sensitivity,
    operating_point,
    sensitivity_profile,
)
from spectra import matched_distances, numeric_spectrum, unloaded_spectrum
from timesim import discretize_zoh

logger = logging.getLogger(__name__)

ChebyshevEvaluator = Callable[[int, complex], complex]


class InvariantResult(BaseModel):
    name: str
    passed: bool
    residual: float
    tolerance: float


def printed_recurrence(n: int, x: complex) -> complex:
    """U_{k+1} = x U_k - U_{k-1}: the wrong recurrence, kept as a negative control."""
    u_prev, u = 0 * x, 1 + 0 * x
    for _ in range(n):
        u_prev, u = u, x * u - u_prev
    return u


def random_section(
    rng: np.random.Generator, n: Optional[int] = None, max_sections: int = 8
) -> SectionParams:
    """Random lossy section; n is drawn from 1..max_sections unless given."""
    return SectionParams(
        R=float(rng.uniform(0.01, 1.0)),
        L=float(rng.uniform(0.1, 2.0)),
        C=float(rng.uniform(0.1, 2.0)),
        G=float(rng.uniform(0.0, 0.5)),
        n=int(rng.integers(1, max_sections + 1)) if n is None else n,
    )


def _result(name: str, residual: float, tolerance: float) -> InvariantResult:
    passed = bool(np.isfinite(residual) and residual <= tolerance)
    level = logging.INFO if passed else logging.ERROR
    logger.log(level, "%s: residual %.3e (tol %.1e)", name, residual, tolerance)
    return InvariantResult(name=name, passed=passed, residual=float(residual), tolerance=tolerance)


# ==================== Checks ====================
def check_chebyshev(evaluator: ChebyshevEvaluator = chebyshev_u) -> InvariantResult:
    worst = 0.0
    for n in (0, 1, 2, 5, 17, 60, 200):
        for theta in np.linspace(0.05, math.pi - 0.05, 37):
            expected = math.sin((n + 1) * theta) / math.sin(theta)
            got = complex(evaluator(n, complex(math.cos(theta))))
            worst = max(worst, abs(got - expected) / max(1.0, abs(expected)))
    return _result("chebyshev_sine_identity", worst, 1e-10)


def check_determinant(rng: np.random.Generator, draws: int) -> InvariantResult:
    worst = 0.0
    for _ in range(draws):
        section = random_section(rng)
        A = build_state_space(section).A
        for _ in range(20):
            lam = complex(rng.normal(0, 2), rng.normal(0, 2))
            closed = char_poly_odd(section.n, lam, section)
            worst = max(worst, closed.relative_difference(tridiagonal_char_poly(A, lam)))
    return _result("char_poly_matches_determinant", worst, 1e-8)


def check_cofactor(rng: np.random.Generator, draws: int) -> InvariantResult:
    worst = 0.0
    for _ in range(draws):
        section = random_section(rng)
        z = int(rng.integers(1, section.n + 1))
        load = LoadSpec(z=z, g_load=float(rng.uniform(0.0, 3.0)))
        A = build_state_space(section, load).A
        for _ in range(10):
            lam = complex(rng.normal(0, 2), rng.normal(0, 2))
            expanded = char_poly_loaded(load.j, lam, section, load.g_total(section))
            worst = max(worst, expanded.relative_difference(tridiagonal_char_poly(A, lam)))
    return _result("loaded_cofactor_expansion", worst, 1e-8)


def check_unloaded_f1(rng: np.random.Generator, draws: int) -> InvariantResult:
    worst = 0.0
    for _ in range(draws):
        section = random_section(rng)
        a, b, m = section.r_over_l, section.g_over_c, section.lc
        for theta in rng.uniform(-math.pi, math.pi, 10):
            disc = complex(0.25 * (a - b) ** 2 - 2 * (1 - math.cos(theta)) / m)
            lam = -0.5 * (a + b) + np.sqrt(disc)
            for j in range(1, 2 * section.n, 2):
                value = f1(theta, section.G, lam, j, section)
                worst = max(worst, abs(value - math.sin(theta) * math.sin((section.n + 1) * theta)))
    return _result("unloaded_f1_factorisation", worst, 1e-10)


def check_closed_form(rng: np.random.Generator, draws: int) -> InvariantResult:
    worst = 0.0
    for _ in range(draws):
        section = random_section(rng)
        closed = unloaded_spectrum(section)
        numeric = numeric_spectrum(build_state_space(section))
        worst = max(worst, float(matched_distances(closed, numeric).max()) / closed.scale)
    return _result("closed_form_matches_oracle", worst, 1e-7)


def check_persistent_root(rng: np.random.Generator, draws: int) -> InvariantResult:
    worst = 0.0
    for _ in range(draws):
        section = random_section(rng)
        load = LoadSpec(z=int(rng.integers(1, section.n + 1)), g_load=float(rng.uniform(0, 5)))
        spectrum = numeric_spectrum(build_state_space(section, load))
        gap = float(np.min(np.abs(spectrum.eigenvalues + section.r_over_l)))
        worst = max(worst, gap / spectrum.scale)
    return _result("minus_r_over_l_persists", worst, 1e-7)


def check_conjugate_closure(rng: np.random.Generator, draws: int) -> InvariantResult:
    worst = 0.0
    for _ in range(draws):
        section = random_section(rng)
        load = LoadSpec(z=int(rng.integers(1, section.n + 1)), g_load=float(rng.uniform(0, 5)))
        spectrum = numeric_spectrum(build_state_space(section, load))
        values = spectrum.eigenvalues
        mirror = np.min(np.abs(values[:, None] - np.conj(values)[None, :]), axis=1)
        worst = max(worst, float(mirror.max()) / spectrum.scale)
    return _result("conjugate_closure", worst, 1e-12)


def check_reversal(rng: np.random.Generator, draws: int) -> InvariantResult:
    worst = 0.0
    for _ in range(draws):
        section = random_section(rng)
        z = int(rng.integers(1, section.n + 1))
        g = float(rng.uniform(0, 5))
        here = numeric_spectrum(build_state_space(section, LoadSpec(z=z, g_load=g)))
        there = numeric_spectrum(
            build_state_space(section, LoadSpec(z=mirrored_position(z, section.n), g_load=g))
        )
        worst = max(worst, float(matched_distances(here, there).max()) / here.scale)
    return _result("reversal_symmetry", worst, 1e-7)


def check_sensitivity(rng: np.random.Generator, draws: int) -> InvariantResult:
    worst = 0.0
    for _ in range(draws):
        section = random_section(rng).model_copy(update={"n": int(rng.integers(3, 9))})
        k = int(rng.integers(1, section.n + 1))
        op = operating_point(section, k)
        # near-critical damping: the eigenvalue is nearly defective
        if op.lambda_star.imag < 0.05 * abs(op.lambda_star):
            continue
        for z in range(1, section.n + 1):
            exact = eigenvalue_sensitivity(op, 2 * z - 1, section)
            if abs(exact) < 1e-3 / section.C:
                continue
            fd = finite_difference_sensitivity(section, z, k)
            worst = max(worst, abs(fd - exact) / abs(exact))
    return _result("sensitivity_matches_finite_difference", worst, 1e-3)


def check_sensitivity_symmetry(rng: np.random.Generator, draws: int) -> InvariantResult:
    worst = 0.0
    for _ in range(draws):
        section = random_section(rng)
        profile = sensitivity_profile(section, int(rng.integers(1, section.n + 1)))
        values = profile.dlambda
        floor = 1e-12 * float(np.max(np.abs(values))) + 1e-300
        worst = max(worst, float(np.max(np.abs(values - values[::-1]) / np.maximum(np.abs(values), floor))))
    return _result("sensitivity_reversal_symmetry", worst, 1e-9)


def check_zoh() -> InvariantResult:
    Ad, Bd = discretize_zoh(np.array([[-1.0]]), np.array([[1.0]]), 0.1)
    residual = max(abs(Ad[0, 0] - math.exp(-0.1)), abs(Bd[0, 0] - (1 - math.exp(-0.1))))
    return _result("zoh_scalar_exactness", residual, 1e-12)


def run_invariant_suite(
    seed: int, draws: int = 8, chebyshev: Optional[ChebyshevEvaluator] = None
) -> List[InvariantResult]:
    """Run every check with one seeded generator. `chebyshev` swaps the U_n evaluator."""
    rng = np.random.default_rng(seed)
    logger.info("invariant suite: seed=%d draws=%d", seed, draws)
    return [
        check_chebyshev(chebyshev or chebyshev_u),
        check_determinant(rng, draws),
        check_cofactor(rng, draws),
        check_unloaded_f1(rng, draws),
        check_closed_form(rng, draws),
        check_persistent_root(rng, draws),
        check_conjugate_closure(rng, draws),
        check_reversal(rng, draws),
        check_sensitivity(rng, draws),
        check_sensitivity_symmetry(rng, draws),
        check_zoh(),
    ]
