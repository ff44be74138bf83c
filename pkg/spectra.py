"""
Eigenvalue spectra of the pi-section line

Three independent routes:
  - closed form for the unloaded line (one real root plus n quadratics)
  - numeric oracle (LAPACK balance + Hessenberg + shifted QR via scipy)
  - analytic roots of the loaded (F1, F2) system, refined by Newton from
    oracle seeds
"""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import linalg
from scipy.optimize import linear_sum_assignment

from exceptions import (
    CardinalityMismatchError,
    ConvergenceError,
    InvalidParameterError,
    SeedDivergenceError,
    ZeroEigenvalueError,
)
from line_model import build_state_space
from polynomials import f1, f1_partials, f1_scale, f2, f2_partials, theta_from_lambda
from schemas import LoadSpec, ResonanceMode, SectionParams, Spectrum, StateSpaceModel

logger = logging.getLogger(__name__)

NEWTON_MAX_ITER = 60
NEWTON_POLISH_STEPS = 2
F1_RTOL = 1e-9
F2_RTOL = 1e-10


# ==================== Closed form ====================
def unloaded_spectrum(section: SectionParams) -> Spectrum:
    """-R/L, then for k = 1..n the roots of lam^2 + (a+b) lam + ab + 2(1 - cos(k pi/(n+1)))/LC."""
    n = section.n
    a, b, m = section.r_over_l, section.g_over_c, section.lc
    centre = -0.5 * (a + b)
    half_gap_sq = 0.25 * (a - b) ** 2

    values = [complex(-a, 0.0)]
    for k in range(1, n + 1):
        theta = k * math.pi / (n + 1)
        # 1 - cos(theta) = 2 sin^2(theta/2)
        disc = half_gap_sq - 4.0 * math.sin(0.5 * theta) ** 2 / m
        if disc < 0:
            root = math.sqrt(-disc)
            values += [complex(centre, root), complex(centre, -root)]
        else:
            root = math.sqrt(disc)
            values += [complex(centre + root, 0.0), complex(centre - root, 0.0)]

    scale = build_state_space(section).frobenius_norm()
    return Spectrum(
        eigenvalues=np.array(values),
        method="closed-form",
        source=f"n={n} unloaded",
        scale=scale,
    )


# ==================== Numeric oracle ====================
def eigenvalues_of(A: np.ndarray) -> np.ndarray:
    """LAPACK geev with balancing; raises ConvergenceError on QR failure."""
    A = np.asarray(A, dtype=float)
    if not np.isfinite(A).all():
        raise InvalidParameterError("matrix has non-finite entries")
    try:
        return linalg.eigvals(A, check_finite=False)
    except linalg.LinAlgError as exc:
        raise ConvergenceError(
            "QR iteration did not converge",
            diagnostics={"dim": A.shape[0], "fro_norm": float(np.linalg.norm(A))},
        ) from exc


def numeric_spectrum(model: StateSpaceModel) -> Spectrum:
    values = eigenvalues_of(model.A)
    return Spectrum(
        eigenvalues=values,
        method="numeric-oracle",
        source=_describe(model),
        scale=model.frobenius_norm() or 1.0,
    )


def _describe(model: StateSpaceModel) -> str:
    if model.section is None:
        return f"dim={model.dim}"
    if model.load is None:
        return f"n={model.section.n} unloaded"
    return f"n={model.section.n} z={model.load.z} g_load={model.load.g_load:.6g}"


# ==================== Analytic loaded roots ====================
def _newton_refine(
    theta: complex, lam: complex, g_total: float, j: int, section: SectionParams
) -> Tuple[complex, complex, bool, int]:
    """Damped Newton on (theta, lam) for F1 = F2 = 0."""

    def residuals(th, la):
        r1, r2 = f1(th, g_total, la, j, section), f2(th, la, section)
        s1 = max(f1_scale(th, g_total, la, j, section), 1e-300)
        s2 = max(1.0, abs(np.cos(th)))
        return r1, r2, abs(r1) / s1, abs(r2) / s2

    def newton_step(th, la, r1, r2):
        p = f1_partials(th, g_total, la, j, section)
        d2_theta, d2_lambda = f2_partials(th, la, section)
        jac = np.array([[p.d_theta, p.d_lambda], [d2_theta, d2_lambda]], dtype=complex)
        try:
            step = np.linalg.solve(jac, np.array([r1, r2], dtype=complex))
        except np.linalg.LinAlgError:
            return None
        return step if np.isfinite(step).all() else None

    r1, r2, e1, e2 = residuals(theta, lam)
    converged, iters = False, 0
    for iters in range(NEWTON_MAX_ITER):
        if e1 <= F1_RTOL and e2 <= F2_RTOL:
            converged = True
            break
        step = newton_step(theta, lam, r1, r2)
        if step is None:
            break

        merit = math.hypot(e1, e2)
        t = 1.0
        while t >= 1.0 / 64:
            trial_theta, trial_lam = theta - t * step[0], lam - t * step[1]
            t1, t2, te1, te2 = residuals(trial_theta, trial_lam)
            if math.isfinite(te1) and math.hypot(te1, te2) < merit:
                break
            t *= 0.5
        else:
            break
        theta, lam, r1, r2, e1, e2 = trial_theta, trial_lam, t1, t2, te1, te2
    else:
        converged = e1 <= F1_RTOL and e2 <= F2_RTOL

    if converged:
        # full steps down to the rounding floor
        for _ in range(NEWTON_POLISH_STEPS):
            step = newton_step(theta, lam, r1, r2)
            if step is None:
                break
            t1, t2, te1, te2 = residuals(theta - step[0], lam - step[1])
            if not math.hypot(te1, te2) < math.hypot(e1, e2):
                break
            theta, lam, r1, r2, e1, e2 = theta - step[0], lam - step[1], t1, t2, te1, te2

    return theta, lam, converged, iters


def loaded_spectrum_analytic(section: SectionParams, load: LoadSpec) -> Spectrum:
    """
    Roots of the loaded characteristic polynomial through the theta system.

    -R/L is always a root and is emitted exactly. The remaining 2n roots are
    refined from oracle seeds in the closed upper half plane; the lower half
    follows by conjugation.
    """
    model = build_state_space(section, load)
    n, a = section.n, section.r_over_l
    g_total = load.g_total(section)
    j = load.j

    seeds = list(eigenvalues_of(model.A))
    seeds.pop(int(np.argmin([abs(s + a) for s in seeds])))

    scale = model.frobenius_norm()
    imag_tol = 1e-9 * scale
    upper = [s for s in seeds if s.imag > imag_tol]
    real = [complex(s.real, 0.0) for s in seeds if abs(s.imag) <= imag_tol]

    refined_upper: List[complex] = []
    refined_real: List[float] = []
    unconverged: List[complex] = []
    for seed in upper + real:
        theta0 = complex(theta_from_lambda(seed, section))
        theta, lam, ok, iters = _newton_refine(theta0, seed, g_total, j, section)
        if ok and abs(np.sin(theta)) < 1e-12:
            ok = False
        if ok and seed.imag <= imag_tol and abs(lam.imag) > imag_tol:
            ok = False
        if not ok:
            unconverged.append(seed)
            continue
        logger.debug("seed %s -> %s in %d steps", seed, lam, iters)
        if seed.imag > imag_tol:
            refined_upper.append(complex(lam))
        else:
            refined_real.append(float(lam.real))

    if unconverged:
        raise SeedDivergenceError(unconverged, diagnostics={"n": n, "z": load.z, "g_load": load.g_load})

    roots = np.array(refined_upper + refined_real, dtype=complex)
    if len(roots) > 1:
        seed_arr = np.array(upper + real, dtype=complex)
        gaps = np.abs(roots[:, None] - roots[None, :])
        seed_gaps = np.abs(seed_arr[:, None] - seed_arr[None, :])
        np.fill_diagonal(gaps, np.inf)
        np.fill_diagonal(seed_gaps, np.inf)
        collapsed = np.argwhere((gaps < 1e-8 * scale) & (seed_gaps > 1e-6 * scale))
        if collapsed.size:
            raise SeedDivergenceError(
                [seed_arr[i] for i in sorted({int(p[0]) for p in collapsed})],
                diagnostics={"reason": "distinct seeds converged to one root"},
            )

    values = np.concatenate(
        [[complex(-a, 0.0)], refined_upper, np.conj(refined_upper), refined_real]
    )
    if len(values) != 2 * n + 1:
        raise ConvergenceError(
            f"expected {2 * n + 1} roots, recovered {len(values)}", diagnostics={"z": load.z}
        )
    return Spectrum(
        eigenvalues=values,
        method="analytic-roots",
        source=_describe(model),
        scale=scale,
    )


# ==================== Resonances ====================
def damping_factor(lam: complex) -> float:
    """sigma = -Re(lam) / |lam|."""
    magnitude = abs(lam)
    if magnitude == 0:
        raise ZeroEigenvalueError("damping is undefined for lam = 0")
    return -lam.real / magnitude


def identify_resonances(spectrum: Spectrum, tol: Optional[float] = None) -> List[ResonanceMode]:
    """Upper-half-plane eigenvalues ordered by increasing imaginary part, numbered k = 1.."""
    tol = 1e-9 * spectrum.scale if tol is None else tol
    upper = sorted((complex(v) for v in spectrum.eigenvalues if v.imag > tol), key=lambda v: v.imag)
    return [
        ResonanceMode(
            k=k,
            lam=v,
            omega_n=abs(v),
            f_damped=v.imag / (2 * math.pi),
            sigma=damping_factor(v),
        )
        for k, v in enumerate(upper, start=1)
    ]


def match_modes(reference: Spectrum, perturbed: Spectrum) -> List[Tuple[int, int]]:
    """
    One-to-one pairing (i, j) of reference[i] with perturbed[j] minimising the
    total distance. Returned in reference order.
    """
    a, b = reference.eigenvalues, perturbed.eigenvalues
    if len(a) != len(b):
        raise CardinalityMismatchError(f"cannot match {len(a)} eigenvalues against {len(b)}")
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return [(int(i), int(j)) for i, j in zip(rows, cols)]


def matched_distances(reference: Spectrum, perturbed: Spectrum) -> np.ndarray:
    pairs = match_modes(reference, perturbed)
    return np.array([abs(reference.eigenvalues[i] - perturbed.eigenvalues[j]) for i, j in pairs])


def contains_eigenvalue(spectrum: Spectrum, value: complex, tol: float) -> bool:
    return bool(np.min(np.abs(spectrum.eigenvalues - value)) <= tol)


def mode_table(spectrum: Spectrum, tol: Optional[float] = None) -> pd.DataFrame:
    """One row per eigenvalue with natural frequency, damped frequency, damping and mode index."""
    tol = 1e-9 * spectrum.scale if tol is None else tol
    modes = identify_resonances(spectrum, tol)
    rank = {m.lam: m.k for m in modes}

    rows = []
    for v in spectrum.eigenvalues:
        v = complex(v)
        key = v if v.imag > tol else v.conjugate()
        k = rank.get(key) if abs(v.imag) > tol else None
        magnitude = abs(v)
        rows.append(
            {
                "re": v.real,
                "im": v.imag,
                "omega_n": magnitude,
                "f_damped_hz": abs(v.imag) / (2 * math.pi),
                "sigma": -v.real / magnitude if magnitude else math.nan,
                "mode_k": k,
            }
        )
    frame = pd.DataFrame(rows, columns=["re", "im", "omega_n", "f_damped_hz", "sigma", "mode_k"])
    frame["mode_k"] = frame["mode_k"].astype("Int64")
    im = frame["im"].to_numpy()
    # real roots first, then by |Im| with the upper member of each pair first
    order = np.lexsort((im < 0, np.abs(im)))
    return frame.iloc[order].reset_index(drop=True)
