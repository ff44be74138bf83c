"""
CSV export of spectra, sweeps, loci, sensitivity profiles and trajectories
All floats are written with 17 significant digits so values survive a read back exactly.
"""
import logging
import os
import tempfile
from pathlib import Path
from typing import Iterable, Union

import numpy as np
import pandas as pd

from schemas import (
    PlacementSweepResult,
    RootLocusResult,
    SensitivityProfile,
    SpectralPeak,
    Spectrum,
    Trajectory,
)
from spectra import mode_table

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
PathLike = Union[str, Path]


def write_frame(frame: pd.DataFrame, path: PathLike) -> Path:
    """Write via a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.info("wrote %d rows to %s", len(frame), path)
    return path


def read_frame(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


# ==================== Frames ====================
def spectrum_frame(spectrum: Spectrum) -> pd.DataFrame:
    return mode_table(spectrum)


def sensitivity_frame(profile: SensitivityProfile) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "j": list(profile.j),
            "z": list(profile.z),
            "mode_k": profile.k,
            "dlambda_re": profile.dlambda.real,
            "dlambda_im": profile.dlambda.imag,
        }
    )


def sweep_frame(result: PlacementSweepResult) -> pd.DataFrame:
    frame = pd.DataFrame([row.model_dump() for row in result.rows])
    return frame[["z", "mode_k", "sigma", "re", "im"]].sort_values(["mode_k", "z"], kind="stable").reset_index(drop=True)


def locus_frame(result: RootLocusResult) -> pd.DataFrame:
    records = []
    for trace in result.traces:
        for g, value in zip(trace.g_load, trace.points):
            records.append(
                {"trace_id": trace.trace_id, "g_load": g, "re": value.real, "im": value.imag}
            )
    return pd.DataFrame(records, columns=["trace_id", "g_load", "re", "im"])


def trajectory_frame(trajectory: Trajectory, stride: int = 1) -> pd.DataFrame:
    picked = slice(None, None, max(stride, 1))
    frame = pd.DataFrame(trajectory.states[picked], columns=list(trajectory.labels))
    frame.insert(0, "t", trajectory.times[picked])
    return frame


def peaks_frame(peaks: Iterable[SpectralPeak]) -> pd.DataFrame:
    return pd.DataFrame(
        [{"f_hz": p.frequency_hz, "rel_mag": p.relative_magnitude} for p in peaks],
        columns=["f_hz", "rel_mag"],
    )


def recomputed_sigma(frame: pd.DataFrame) -> np.ndarray:
    """Damping recomputed from the stored re/im columns."""
    re, im = frame["re"].to_numpy(), frame["im"].to_numpy()
    return -re / np.hypot(re, im)
