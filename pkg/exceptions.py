"""
Error hierarchy for the line resonance toolkit.
The CLI maps these onto its exit-code contract (see cli.py).
"""
from typing import Any, Dict, List, Optional


class GridResonanceError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(GridResonanceError, ValueError):
    """A numeric argument violates its documented range."""


class PositionOutOfRangeError(InvalidParameterError):
    """A load node index z lies outside 1..n."""

    def __init__(self, z: int, n: int):
        super().__init__(f"load position z={z} outside 1..{n}")
        self.z = z
        self.n = n


class ZeroEigenvalueError(InvalidParameterError):
    """Damping is undefined for a zero eigenvalue."""


class UnsupportedModeError(InvalidParameterError):
    """A mode index is outside 1..n or not supported by the requested form."""


class ConfigError(GridResonanceError):
    """The run configuration file is missing or malformed."""


class ConvergenceError(GridResonanceError):
    """An iterative numerical routine failed to converge."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SeedDivergenceError(ConvergenceError):
    """Newton refinement of analytic roots left some seeds unconverged."""

    def __init__(self, unconverged: List[complex], diagnostics: Optional[Dict[str, Any]] = None):
        listing = ", ".join(f"{s.real:.6g}{s.imag:+.6g}j" for s in unconverged[:8])
        more = "" if len(unconverged) <= 8 else f" (+{len(unconverged) - 8} more)"
        super().__init__(
            f"{len(unconverged)} seed(s) did not converge: {listing}{more}", diagnostics
        )
        self.unconverged = list(unconverged)


class CardinalityMismatchError(GridResonanceError):
    """Two spectra to be matched have different sizes."""


class TraceBreakError(GridResonanceError):
    """
    A root-locus trace jumped further than half the local mode spacing.
    Used as a diagnostic record: sweeps log it and split the trace.
    """

    def __init__(self, trace_id: int, grid_index: int, distance: float, limit: float):
        super().__init__(
            f"trace {trace_id} broke at grid index {grid_index}: "
            f"step {distance:.6g} > limit {limit:.6g}"
        )
        self.trace_id = trace_id
        self.grid_index = grid_index
        self.distance = distance
        self.limit = limit


class UnstableModelError(GridResonanceError):
    """The discretised system has a pole on or outside the unit circle."""


class InsufficientSamplesError(GridResonanceError):
    """Too few samples for a spectral estimate."""


class ScaledOverflowError(GridResonanceError, OverflowError):
    """A scaled value cannot be represented as an ordinary float."""
