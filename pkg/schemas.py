"""
Pydantic schemas for line parameters, state-space models, spectra and run results
"""
import math
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _frozen_array(value, dtype) -> np.ndarray:
    arr = np.array(value, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


# ==================== Line Schemas ====================
class LineParams(BaseModel):
    """Per-unit-length description of a homogeneous overhead line"""
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    r_per_km: float = Field(..., ge=0, description="Series resistance (ohm/km)")
    l_per_km: float = Field(..., gt=0, description="Series inductance (H/km)")
    c_per_km: float = Field(..., gt=0, description="Shunt capacitance (F/km)")
    g_per_km: float = Field(0.0, ge=0, description="Shunt conductance (S/km)")
    length_km: float = Field(..., gt=0)
    n_sections: int = Field(..., ge=1, description="Number of pi-sections")


class SectionParams(BaseModel):
    """Lumped values of one pi-section"""
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    R: float = Field(..., ge=0)
    L: float = Field(..., gt=0)
    C: float = Field(..., gt=0)
    G: float = Field(0.0, ge=0)
    n: int = Field(..., ge=1)

    @property
    def r_over_l(self) -> float:
        return self.R / self.L

    @property
    def g_over_c(self) -> float:
        return self.G / self.C

    @property
    def lc(self) -> float:
        return self.L * self.C


class LoadSpec(BaseModel):
    """A purely resistive shunt load at intermediate node z (1-based)"""
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    z: int = Field(..., description="Load node, checked against 1..n when the model is built")
    g_load: float = Field(..., ge=0, description="Load conductance (S)")

    @property
    def j(self) -> int:
        """Odd row index of the loaded node voltage in the 1-based state ordering."""
        return 2 * self.z - 1

    def g_total(self, section: SectionParams) -> float:
        return section.G + self.g_load


# ==================== Model Schemas ====================
class StateSpaceModel(BaseModel):
    """x' = A x + B u, with u = (v_a, v_b)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    A: np.ndarray
    B: np.ndarray
    labels: Tuple[str, ...] = ()
    section: Optional[SectionParams] = None
    load: Optional[LoadSpec] = None

    @field_validator("A", "B", mode="before")
    @classmethod
    def as_read_only(cls, v):
        return _frozen_array(v, float)

    @model_validator(mode="after")
    def check_shapes(self):
        rows, cols = self.A.shape if self.A.ndim == 2 else (0, -1)
        if rows != cols or rows == 0:
            raise ValueError(f"A must be square and non-empty, got shape {self.A.shape}")
        if self.B.ndim != 2 or self.B.shape[0] != rows:
            raise ValueError(f"B must have {rows} rows, got shape {self.B.shape}")
        if not np.isfinite(self.A).all() or not np.isfinite(self.B).all():
            raise ValueError("A and B must be finite")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"x{i + 1}" for i in range(rows)))
        elif len(self.labels) != rows:
            raise ValueError("one label per state is required")
        return self

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def matrix(self) -> np.ndarray:
        """Dense copy of A, safe to mutate."""
        return np.array(self.A)

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.A, "fro"))


# ==================== Spectrum Schemas ====================
class Spectrum(BaseModel):
    """A multiset of eigenvalues and how it was obtained"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    eigenvalues: np.ndarray
    method: Literal["closed-form", "analytic-roots", "numeric-oracle", "asymptotic"]
    source: str = ""
    scale: float = Field(1.0, gt=0, description="Frobenius norm of the generating matrix")
    load_dependent: Optional[str] = Field(
        None, description="Symbolic eigenvalue omitted from the numeric list, if any"
    )

    @field_validator("eigenvalues", mode="before")
    @classmethod
    def as_read_only(cls, v):
        return _frozen_array(np.ravel(v), complex)

    def __len__(self) -> int:
        return self.eigenvalues.shape[0]


class ResonanceMode(BaseModel):
    """One underdamped eigenvalue in the upper half plane"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: int = Field(..., ge=1)
    lam: complex
    omega_n: float = Field(..., ge=0, description="Natural frequency |lambda| (rad/s)")
    f_damped: float = Field(..., ge=0, description="Damped frequency Im/2pi (Hz)")
    sigma: float


class OperatingPoint(BaseModel):
    """Unloaded root (theta*, lambda*) of mode k, about which loads are linearised"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: int = Field(..., ge=1)
    theta_star: float
    lambda_star: complex
    g_total: float = Field(..., ge=0)
    n: int = Field(..., ge=1)


class SensitivityPartials(BaseModel):
    """Partial derivatives of F1 and F2 at an operating point"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dF1_dGL: complex
    dF1_dlambda: complex
    dF1_dtheta: complex
    dF2_dtheta: complex
    dF2_dlambda: complex


class SensitivityProfile(BaseModel):
    """dlambda/dG_L of mode k over every odd node row j"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    k: int
    j: Tuple[int, ...]
    dlambda: np.ndarray
    approximate: bool = False

    @field_validator("dlambda", mode="before")
    @classmethod
    def as_read_only(cls, v):
        return _frozen_array(v, complex)

    @property
    def z(self) -> Tuple[int, ...]:
        return tuple((j + 1) // 2 for j in self.j)

    def at(self, j: int) -> complex:
        return complex(self.dlambda[self.j.index(j)])


# ==================== Sweep Schemas ====================
class SweepRow(BaseModel):
    """Damping of one mode with the load at node z (z = 0 is the unloaded baseline)"""
    model_config = ConfigDict(frozen=True)

    z: int = Field(..., ge=0)
    mode_k: int = Field(..., ge=1)
    sigma: float
    re: float
    im: float


class PlacementSweepResult(BaseModel):
    n: int
    g_load: float
    modes: Tuple[int, ...]
    rows: List[SweepRow]

    def sigma(self, z: int, k: int) -> float:
        for row in self.rows:
            if row.z == z and row.mode_k == k:
                return row.sigma
        raise KeyError((z, k))

    def baseline_sigma(self, k: int) -> float:
        return self.sigma(0, k)

    def sigma_profile(self, k: int) -> np.ndarray:
        """sigma(z, k) for z = 1..n."""
        return np.array([self.sigma(z, k) for z in range(1, self.n + 1)])


class RootLocusTrace(BaseModel):
    """Path of one eigenvalue as the load conductance grows"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    trace_id: int
    z: int
    start_index: int = Field(0, ge=0, description="Grid index of the first point")
    continues: Optional[int] = Field(None, description="Trace this one was split from")
    g_load: List[float] = Field(default_factory=list)
    points: List[complex] = Field(default_factory=list)

    def values(self) -> np.ndarray:
        return np.asarray(self.points, dtype=complex)

    @property
    def start(self) -> complex:
        return self.points[0]

    @property
    def end(self) -> complex:
        return self.points[-1]


class TraceBreak(BaseModel):
    model_config = ConfigDict(frozen=True)

    trace_id: int
    new_trace_id: int
    grid_index: int
    distance: float
    limit: float


class RootLocusResult(BaseModel):
    z: int
    g_grid: List[float]
    traces: List[RootLocusTrace]
    breaks: List[TraceBreak] = Field(default_factory=list)


# ==================== Time-Domain Schemas ====================
class SourceWaveform(BaseModel):
    """Voltage applied at the sending end (and the far end when mirrored)"""
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    kind: Literal["step", "ramp"] = "step"
    amplitude: float = Field(1.0, description="Per-unit or volts")
    ramp_s: float = Field(0.0, ge=0, description="Ramp duration (s), 0 for a step")
    mirrored: bool = Field(False, description="Drive the far end with the same voltage")

    @model_validator(mode="after")
    def check_ramp(self):
        if self.kind == "ramp" and self.ramp_s <= 0:
            raise ValueError("a ramp needs ramp_s > 0")
        return self

    def value(self, t: float) -> float:
        if t < 0:
            return 0.0
        if self.kind == "step" or self.ramp_s == 0:
            return self.amplitude
        return self.amplitude * min(t / self.ramp_s, 1.0)

    def inputs(self, t: float) -> np.ndarray:
        v = self.value(t)
        return np.array([v, v if self.mirrored else 0.0])


class Trajectory(BaseModel):
    """Sampled state history. states has one row per sample."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dt: float = Field(..., gt=0)
    times: np.ndarray
    states: np.ndarray
    labels: Tuple[str, ...]
    steady_state: Optional[np.ndarray] = None
    stable: bool = True

    @field_validator("times", "states", mode="before")
    @classmethod
    def as_read_only(cls, v):
        return _frozen_array(v, float)

    @model_validator(mode="after")
    def check_shapes(self):
        if self.states.ndim != 2 or self.states.shape[0] != self.times.shape[0]:
            raise ValueError("states must be (samples, dim) with one row per time")
        if len(self.labels) != self.states.shape[1]:
            raise ValueError("one label per state is required")
        return self

    @property
    def n_samples(self) -> int:
        return self.times.shape[0]

    def deviation(self, index: int) -> np.ndarray:
        """Signal at `index` minus its steady-state value when known."""
        x = np.array(self.states[:, index])
        if self.steady_state is not None:
            x -= self.steady_state[index]
        return x


class SpectralPeak(BaseModel):
    model_config = ConfigDict(frozen=True)

    frequency_hz: float
    magnitude: float
    relative_magnitude: float = Field(..., ge=0, le=1)


# ==================== Run Configuration ====================
class SweepOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    g_load: float = Field(0.01, ge=0)
    modes: List[int] = Field(default_factory=lambda: [1, 2, 3, 4, 5])

    @field_validator("modes")
    @classmethod
    def validate_modes(cls, v):
        if not v or any(k < 1 for k in v):
            raise ValueError("modes must be a non-empty list of positive integers")
        return sorted(set(v))


class LocusOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    z: Optional[int] = Field(None, ge=1)
    g_grid: Optional[List[float]] = None

    @field_validator("g_grid")
    @classmethod
    def validate_grid(cls, v):
        if v is None:
            return v
        if len(v) < 1 or any(g < 0 or not math.isfinite(g) for g in v):
            raise ValueError("g_grid must hold finite non-negative conductances")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("g_grid must be strictly increasing")
        return v


class SensitivityOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k: int = Field(1, ge=1)
    approximate: bool = False
    fd_step: float = Field(1e-6, gt=0)


class SimulateOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dt: Optional[float] = Field(None, gt=0)
    horizon: Optional[float] = Field(None, gt=0)
    waveform: SourceWaveform = Field(default_factory=SourceWaveform)
    probe: Optional[int] = Field(None, ge=0, description="0-based state index for the spectrum")
    stride: int = Field(1, ge=1)
    allow_unstable: bool = False


class RunConfig(BaseModel):
    """Top-level JSON run configuration consumed by the CLI"""
    model_config = ConfigDict(extra="forbid")

    line: LineParams
    load: Optional[LoadSpec] = None
    seed: Optional[int] = Field(None, ge=0)
    sweep: SweepOptions = Field(default_factory=SweepOptions)
    locus: LocusOptions = Field(default_factory=LocusOptions)
    sensitivity: SensitivityOptions = Field(default_factory=SensitivityOptions)
    simulate: SimulateOptions = Field(default_factory=SimulateOptions)
