"""
Cascade pi-section model of a transmission line

State ordering (1-based): i_1, v_1, i_2, v_2, ..., v_n, i_{n+1}.
Currents sit on odd rows and node voltages on even rows, so node z is row 2z.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from exceptions import PositionOutOfRangeError
from schemas import LineParams, LoadSpec, SectionParams, StateSpaceModel

logger = logging.getLogger(__name__)


def section_params(params: LineParams) -> SectionParams:
    """Split a line into n identical pi-sections."""
    n = params.n_sections
    return SectionParams(
        R=params.r_per_km * params.length_km / n,
        L=params.l_per_km * params.length_km / n,
        C=params.c_per_km * params.length_km / n,
        G=params.g_per_km * params.length_km / n,
        n=n,
    )


def state_labels(n: int) -> Tuple[str, ...]:
    labels = []
    for k in range(1, n + 1):
        labels += [f"i_{k}", f"v_{k}"]
    labels.append(f"i_{n + 1}")
    return tuple(labels)


def voltage_index(z: int) -> int:
    """0-based state index of node voltage v_z."""
    return 2 * z - 1


def check_position(z: int, n: int) -> None:
    if not 1 <= z <= n:
        raise PositionOutOfRangeError(z, n)


def build_state_space(section: SectionParams, load: Optional[LoadSpec] = None) -> StateSpaceModel:
    """
    Assemble the (2n+1)x(2n+1) tridiagonal A and the two-column input matrix B.

    Diagonal alternates -R/L (current rows) and -G/C (voltage rows); the
    superdiagonal alternates -1/L, -1/C and the subdiagonal 1/C, 1/L.
    A load at node z replaces A[2z, 2z] (1-based) with -(G + g_load)/C.
    """
    n = section.n
    R, L, C, G = section.R, section.L, section.C, section.G
    dim = 2 * n + 1

    A = np.zeros((dim, dim))
    for p in range(dim):
        A[p, p] = -R / L if p % 2 == 0 else -G / C
    for p in range(dim - 1):
        if p % 2 == 0:
            A[p, p + 1] = -1.0 / L
            A[p + 1, p] = 1.0 / C
        else:
            A[p, p + 1] = -1.0 / C
            A[p + 1, p] = 1.0 / L

    if load is not None:
        check_position(load.z, n)
        row = voltage_index(load.z)
        A[row, row] = -(G + load.g_load) / C
        logger.debug("load %.6g S placed at node %d (row %d)", load.g_load, load.z, row)

    B = np.zeros((dim, 2))
    B[0, 0] = 1.0 / L
    B[-1, 1] = -1.0 / L

    return StateSpaceModel(A=A, B=B, labels=state_labels(n), section=section, load=load)


def mirrored_position(z: int, n: int) -> int:
    """Node seen from the other end of the line."""
    check_position(z, n)
    return n + 1 - z
