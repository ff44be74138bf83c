"""
CSV export tests.

 Group 1 — Atomic, deterministic writes
 Group 2 — Frame layouts
"""
import math
import os

import numpy as np
import pandas as pd
import pytest

from exports import (
    locus_frame,
    peaks_frame,
    read_frame,
    recomputed_sigma,
    sensitivity_frame,
    spectrum_frame,
    sweep_frame,
    trajectory_frame,
    write_frame,
)
from line_model import build_state_space
from schemas import SourceWaveform, SpectralPeak
from sensitivity import sensitivity_profile
from spectra import unloaded_spectrum
from sweeps import placement_sweep, root_locus
from timesim import simulate_energization


# ── Group 1 ──────────────────────────────────────────────────────────────────
def test_two_writes_are_byte_identical(tmp_path, sections9):
    frame = spectrum_frame(unloaded_spectrum(sections9))
    first = write_frame(frame, tmp_path / "a.csv").read_bytes()
    second = write_frame(spectrum_frame(unloaded_spectrum(sections9)), tmp_path / "b.csv").read_bytes()
    assert first == second
    assert b"\r\n" not in first


def test_floats_survive_a_read_back(tmp_path):
    values = [1 / 3, math.pi * 1e-17, -2.5e300, 0.1 + 0.2]
    write_frame(pd.DataFrame({"x": values}), tmp_path / "floats.csv")
    assert read_frame(tmp_path / "floats.csv")["x"].tolist() == values


def test_write_creates_parents_and_leaves_no_temporaries(tmp_path):
    target = tmp_path / "nested" / "deeper" / "out.csv"
    write_frame(pd.DataFrame({"x": [1.0]}), target)
    assert target.exists()
    assert os.listdir(target.parent) == ["out.csv"]


def test_failed_write_keeps_previous_file(tmp_path, monkeypatch):
    target = tmp_path / "out.csv"
    write_frame(pd.DataFrame({"x": [1.0]}), target)
    before = target.read_bytes()

    def explode(*args, **kwargs):
        raise OSError("disk full")

    monkeypatch.setattr(pd.DataFrame, "to_csv", explode)
    with pytest.raises(OSError):
        write_frame(pd.DataFrame({"x": [2.0]}), target)
    assert target.read_bytes() == before
    assert os.listdir(tmp_path) == ["out.csv"]


# ── Group 2 ──────────────────────────────────────────────────────────────────
def test_spectrum_frame_leaves_real_modes_unnumbered(tmp_path, sections9):
    path = write_frame(spectrum_frame(unloaded_spectrum(sections9)), tmp_path / "spectrum.csv")
    frame = read_frame(path)
    assert list(frame.columns) == ["re", "im", "omega_n", "f_damped_hz", "sigma", "mode_k"]
    assert frame["mode_k"].isna().sum() == 1
    assert path.read_text().splitlines()[1].endswith(",")


def test_sweep_frame_order_and_sigma(sections9):
    frame = sweep_frame(placement_sweep(sections9, 0.01, [2, 1]))
    assert list(frame.columns) == ["z", "mode_k", "sigma", "re", "im"]
    assert frame["mode_k"].tolist() == [1] * 10 + [2] * 10
    assert frame["z"].tolist() == list(range(10)) * 2
    np.testing.assert_allclose(recomputed_sigma(frame), frame["sigma"], rtol=1e-12)


def test_sensitivity_frame(sections9):
    frame = sensitivity_frame(sensitivity_profile(sections9, 1))
    assert list(frame.columns) == ["j", "z", "mode_k", "dlambda_re", "dlambda_im"]
    assert frame["j"].tolist() == list(range(1, 18, 2))
    assert (frame["mode_k"] == 1).all()


def test_locus_frame(sections9):
    result = root_locus(sections9, 2, [0.0, 0.01, 0.02])
    frame = locus_frame(result)
    assert list(frame.columns) == ["trace_id", "g_load", "re", "im"]
    assert len(frame) == sum(len(t.points) for t in result.traces)


def test_trajectory_frame_stride(sections9):
    trajectory = simulate_energization(build_state_space(sections9), SourceWaveform(), dt=1e-5, horizon=1e-3)
    frame = trajectory_frame(trajectory, stride=10)
    assert frame.columns[0] == "t"
    assert list(frame.columns[1:]) == list(trajectory.labels)
    assert len(frame) == 11
    assert frame["t"].iloc[1] == pytest.approx(1e-4)


def test_peaks_frame_empty_and_full():
    assert list(peaks_frame([]).columns) == ["f_hz", "rel_mag"]
    frame = peaks_frame([SpectralPeak(frequency_hz=347.7, magnitude=0.4, relative_magnitude=1.0)])
    assert frame.iloc[0].tolist() == [347.7, 1.0]
