"""
Characteristic polynomials of the pi-section cascade in Chebyshev form

With m = LC, a = R/L, b = G/C and g(lam) = (lam + a)(lam + b):

    P_n(x)       = U_n(m*x/2 + 1) / m**n
    Delta_{2n+1} = (lam + a) * P_n(g(lam))
    Delta_{2n}   = P_n(g(lam)) - P_{n-1}(g(lam)) / m

For large n the raw values leave the double range, so the evaluators return
ScaledComplex (significand, base-2 exponent) pairs.
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from exceptions import InvalidParameterError, ScaledOverflowError
from schemas import SectionParams

logger = logging.getLogger(__name__)

Number = Union[complex, float, np.ndarray]

# Renormalise the Chebyshev recurrence once magnitudes pass 2**500
_RESCALE_ABOVE = 2.0 ** 500


def _ldexp(z: complex, e: int) -> complex:
    return complex(math.ldexp(z.real, e), math.ldexp(z.imag, e))


# ==================== Scaled arithmetic ====================
@dataclass(frozen=True)
class ScaledComplex:
    """value = significand * 2**exponent, with 0.5 <= |significand| < 1 unless zero."""

    significand: complex
    exponent: int = 0

    @classmethod
    def of(cls, value: complex, exponent: int = 0) -> "ScaledComplex":
        return cls(complex(value), int(exponent)).normalized()

    @property
    def is_zero(self) -> bool:
        return self.significand == 0

    def normalized(self) -> "ScaledComplex":
        mag = abs(self.significand)
        if mag == 0.0:
            return ScaledComplex(0j, 0)
        if not math.isfinite(mag):
            raise ScaledOverflowError(f"non-finite significand {self.significand!r}")
        _, shift = math.frexp(mag)
        return ScaledComplex(_ldexp(self.significand, -shift), self.exponent + shift)

    def __mul__(self, other) -> "ScaledComplex":
        if isinstance(other, ScaledComplex):
            return ScaledComplex(
                self.significand * other.significand, self.exponent + other.exponent
            ).normalized()
        return ScaledComplex(self.significand * complex(other), self.exponent).normalized()

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ScaledComplex":
        other = other if isinstance(other, ScaledComplex) else ScaledComplex.of(other)
        if other.is_zero:
            raise ZeroDivisionError("division by a zero ScaledComplex")
        return ScaledComplex(
            self.significand / other.significand, self.exponent - other.exponent
        ).normalized()

    def __add__(self, other) -> "ScaledComplex":
        other = other if isinstance(other, ScaledComplex) else ScaledComplex.of(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        e = max(self.exponent, other.exponent)
        total = _ldexp(self.significand, self.exponent - e) + _ldexp(
            other.significand, other.exponent - e
        )
        return ScaledComplex(total, e).normalized()

    __radd__ = __add__

    def __neg__(self) -> "ScaledComplex":
        return ScaledComplex(-self.significand, self.exponent)

    def __sub__(self, other) -> "ScaledComplex":
        other = other if isinstance(other, ScaledComplex) else ScaledComplex.of(other)
        return self + (-other)

    def power(self, n: int) -> "ScaledComplex":
        if n < 0:
            return ScaledComplex.of(1.0) / self.power(-n)
        result, base = ScaledComplex.of(1.0), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def log2_abs(self) -> float:
        if self.is_zero:
            return -math.inf
        return math.log2(abs(self.significand)) + self.exponent

    def value(self) -> complex:
        """Unscaled value; raises ScaledOverflowError when it does not fit a double."""
        try:
            return _ldexp(self.significand, self.exponent)
        except OverflowError as exc:
            raise ScaledOverflowError(
                f"|value| ~ 2**{self.log2_abs():.1f} exceeds the double range"
            ) from exc

    def relative_difference(self, other: "ScaledComplex") -> float:
        """|self - other| / max(|self|, |other|)."""
        if self.is_zero and other.is_zero:
            return 0.0
        diff = self - other
        if diff.is_zero:
            return 0.0
        return 2.0 ** (diff.log2_abs() - max(self.log2_abs(), other.log2_abs()))


# ==================== Chebyshev polynomials ====================
def chebyshev_u(n: int, x: Number) -> Number:
    """U_n(x) by U_{k+1} = 2x U_k - U_{k-1}, U_{-1} = 0, U_0 = 1."""
    if n < -1:
        raise InvalidParameterError(f"chebyshev_u needs n >= -1, got {n}")
    if n == -1:
        return 0 * x
    u_prev, u = 0 * x, 1 + 0 * x
    for _ in range(n):
        u_prev, u = u, 2 * x * u - u_prev
    return u


def scaled_chebyshev_u(n: int, x: complex) -> ScaledComplex:
    """Same recurrence with a running power-of-two exponent."""
    if n < -1:
        raise InvalidParameterError(f"scaled_chebyshev_u needs n >= -1, got {n}")
    if n == -1:
        return ScaledComplex(0j, 0)
    x = complex(x)
    u_prev, u, exponent = 0j, 1 + 0j, 0
    for _ in range(n):
        u_prev, u = u, 2 * x * u - u_prev
        mag = abs(u)
        if mag > _RESCALE_ABOVE:
            _, shift = math.frexp(mag)
            u, u_prev = _ldexp(u, -shift), _ldexp(u_prev, -shift)
            exponent += shift
    return ScaledComplex(u, exponent).normalized()


# ==================== Characteristic polynomials ====================
def g_poly(lam: Number, section: SectionParams) -> Number:
    return (lam + section.r_over_l) * (lam + section.g_over_c)


def p_n(n: int, x: complex, section: SectionParams) -> ScaledComplex:
    """P_n(x) = U_n(LC*x/2 + 1) / (LC)**n, with P_{-1} = 0."""
    if n < -1:
        raise InvalidParameterError(f"p_n needs n >= -1, got {n}")
    if n == -1:
        return ScaledComplex(0j, 0)
    m = section.lc
    u = scaled_chebyshev_u(n, 0.5 * m * complex(x) + 1.0)
    return u * ScaledComplex.of(1.0 / m).power(n)


def char_poly_odd(n: int, lam: complex, section: SectionParams) -> ScaledComplex:
    """det(lam I - A) for a (2n+1)-row block that starts and ends on a current row."""
    if n < 0:
        raise InvalidParameterError(f"char_poly_odd needs n >= 0, got {n}")
    lam = complex(lam)
    return ScaledComplex.of(lam + section.r_over_l) * p_n(n, g_poly(lam, section), section)


def char_poly_even(n: int, lam: complex, section: SectionParams) -> ScaledComplex:
    """det(lam I - A) for a 2n-row block that starts on a current row and ends on a voltage row."""
    if n < 0:
        raise InvalidParameterError(f"char_poly_even needs n >= 0, got {n}")
    lam = complex(lam)
    x = g_poly(lam, section)
    return p_n(n, x, section) - p_n(n - 1, x, section) * (1.0 / section.lc)


def _check_load_row(j: int, n: int) -> None:
    if j % 2 == 0 or not 1 <= j <= 2 * n - 1:
        raise InvalidParameterError(f"j must be odd in 1..{2 * n - 1}, got {j}")


def char_poly_loaded(
    j: int, lam: complex, section: SectionParams, g_total: float
) -> ScaledComplex:
    """
    det(lam I - A_loaded) by cofactor expansion along the loaded voltage row.

    The row splits the matrix into a leading block of j rows and a trailing
    block of 2n - j rows; both start and end on a current row.
    """
    n = section.n
    _check_load_row(j, n)
    lead, trail = (j - 1) // 2, (2 * n - j - 1) // 2
    d_lead = char_poly_odd(lead, lam, section)
    d_trail = char_poly_odd(trail, lam, section)
    d_lead_short = char_poly_even(lead, lam, section)
    d_trail_short = char_poly_even(trail, lam, section)
    inv_m = 1.0 / section.lc
    return (
        d_lead * d_trail * (complex(lam) + g_total / section.C)
        + (d_lead_short * d_trail + d_lead * d_trail_short) * inv_m
    )


def tridiagonal_char_poly(A: np.ndarray, lam: complex) -> ScaledComplex:
    """det(lam I - A) of a tridiagonal matrix by the three-term recurrence."""
    A = np.asarray(A)
    dim = A.shape[0]
    lam = complex(lam)
    d_prev2, d_prev, exponent = 1 + 0j, lam - A[0, 0], 0
    for k in range(1, dim):
        coupling = A[k - 1, k] * A[k, k - 1]
        d_prev2, d_prev = d_prev, (lam - A[k, k]) * d_prev - coupling * d_prev2
        mag = max(abs(d_prev), abs(d_prev2))
        if mag > _RESCALE_ABOVE:
            _, shift = math.frexp(mag)
            d_prev, d_prev2 = _ldexp(d_prev, -shift), _ldexp(d_prev2, -shift)
            exponent += shift
    return ScaledComplex(d_prev, exponent).normalized()


# ==================== Trigonometric root system ====================
class F1Partials(NamedTuple):
    d_theta: Number
    d_lambda: Number
    d_gl: Number


def _h(lam: Number, g_total: float, section: SectionParams) -> Number:
    return section.lc * (lam + g_total / section.C) * (lam + section.r_over_l) + 2.0


def f1(theta: Number, g_total: float, lam: Number, j: int, section: SectionParams) -> Number:
    """Loaded determinant in theta form; zero at every loaded eigenvalue."""
    n = section.n
    _check_load_row(j, n)
    p1, q1 = (j + 1) // 2, (2 * n - j + 1) // 2
    h = _h(lam, g_total, section)
    return (
        h * np.sin(p1 * theta) * np.sin(q1 * theta)
        - np.sin((p1 - 1) * theta) * np.sin(q1 * theta)
        - np.sin(p1 * theta) * np.sin((q1 - 1) * theta)
    )


def f1_scale(theta: Number, g_total: float, lam: Number, j: int, section: SectionParams) -> Number:
    """
    Rounding scale of f1: (|h| + 2) * max(1, |sin|)**2, with h bounded by the
    magnitudes of its factors since lam + G_L/C cancels near the load root.
    """
    n = section.n
    p1, q1 = (j + 1) // 2, (2 * n - j + 1) // 2
    h_bound = (
        section.lc
        * (np.abs(lam) + g_total / section.C)
        * (np.abs(lam) + section.r_over_l)
        + 2.0
    )
    sines = [np.abs(np.sin(k * theta)) for k in (p1 - 1, p1, q1 - 1, q1)]
    bound = np.maximum.reduce([np.ones_like(sines[0])] + sines)
    return (h_bound + 2.0) * bound**2


def f1_partials(
    theta: Number, g_total: float, lam: Number, j: int, section: SectionParams
) -> F1Partials:
    """Partial derivatives of f1 in product-to-sum form, valid at any point."""
    n = section.n
    _check_load_row(j, n)
    N = n - j
    a = section.r_over_l
    h = _h(lam, g_total, section)
    bracket = 0.5 * (np.cos(N * theta) - np.cos((n + 1) * theta))
    d_gl = section.L * (lam + a) * bracket
    d_lambda = section.lc * (2 * lam + g_total / section.C + a) * bracket
    d_theta = (
        h * 0.5 * (-N * np.sin(N * theta) + (n + 1) * np.sin((n + 1) * theta))
        - n * np.sin(n * theta)
        + 0.5 * ((N + 1) * np.sin((N + 1) * theta) + (N - 1) * np.sin((N - 1) * theta))
    )
    return F1Partials(d_theta=d_theta, d_lambda=d_lambda, d_gl=d_gl)


def f2(theta: Number, lam: Number, section: SectionParams) -> Number:
    """Coupling cos(theta) = LC g(lam)/2 + 1 written as a residual."""
    return np.cos(theta) - 0.5 * section.lc * g_poly(lam, section) - 1.0


def f2_partials(theta: Number, lam: Number, section: SectionParams):
    """(dF2/dtheta, dF2/dlambda)."""
    mean_rate = 0.5 * (section.r_over_l + section.g_over_c)
    return -np.sin(theta), -section.lc * (lam + mean_rate)


def theta_from_lambda(lam: Number, section: SectionParams) -> Number:
    """Principal complex arccos of LC g(lam)/2 + 1."""
    return np.arccos(np.asarray(0.5 * section.lc * g_poly(lam, section) + 1.0, dtype=complex))
