"""Cell-averaged solution differences between the three systems.

A fine field (values at many points) is compared against a coarse field
(one value per cell of a partition): for each occupied cell the mean
modulus difference between the fine values inside it and the cell value is
taken, and the metric is the largest such mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import GridPartition, ParticleCloud, locate_cells
from .kernel import FieldVector


class EmptyComparisonError(ValueError):
    pass


@dataclass(frozen=True)
class CellDetail:
    cell: int
    count: int
    mean_abs_difference: float


@dataclass(frozen=True)
class SupMeanResult:
    value: float
    occupied_cells: int
    excluded_points: int
    cells: tuple[CellDetail, ...] = ()


@dataclass(frozen=True)
class ComparisonReport:
    e_ori_red: float
    e_ie_ori: float
    e_ie_red: float
    error_sum: float
    e_ori_red_normalized: float = float("nan")
    excluded_particles: int = 0
    per_cell_detail: tuple[CellDetail, ...] | None = None

    def __post_init__(self) -> None:
        for name in ("e_ori_red", "e_ie_ori", "e_ie_red"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")


def sup_mean_details(
    fine_values: np.ndarray,
    fine_points: np.ndarray,
    coarse_values: np.ndarray,
    partition: GridPartition,
    with_cells: bool = False,
) -> SupMeanResult:
    """Sup over occupied cells of the mean ``|fine - coarse|``.

    Fine points outside the partition's domain are skipped and counted in
    ``excluded_points``; empty cells do not contribute.
    """
    fine_values = np.asarray(fine_values, dtype=complex).ravel()
    coarse_values = np.asarray(coarse_values, dtype=complex).ravel()
    if coarse_values.shape[0] != partition.total_cells:
        raise ValueError("coarse field must have one value per cell")
    idx = locate_cells(partition, fine_points)
    if idx.shape[0] != fine_values.shape[0]:
        raise ValueError("one fine value per fine point required")
    keep = idx >= 0
    if not np.any(keep):
        raise EmptyComparisonError("no fine point falls inside any cell")
    idx_in = idx[keep]
    diffs = np.abs(fine_values[keep] - coarse_values[idx_in])
    counts = np.bincount(idx_in, minlength=partition.total_cells)
    sums = np.bincount(idx_in, weights=diffs, minlength=partition.total_cells)
    occupied = np.flatnonzero(counts)
    means = sums[occupied] / counts[occupied]
    cells: tuple[CellDetail, ...] = ()
    if with_cells:
        cells = tuple(
            CellDetail(int(c), int(counts[c]), float(mu)) for c, mu in zip(occupied, means)
        )
    return SupMeanResult(
        value=float(means.max()),
        occupied_cells=int(occupied.size),
        excluded_points=int((~keep).sum()),
        cells=cells,
    )


def sup_mean_difference(fine: FieldVector, coarse: FieldVector, partition: GridPartition) -> float:
    if coarse.nodes.shape[0] != partition.total_cells:
        raise ValueError("coarse field does not live on the given partition")
    return sup_mean_details(fine.values, fine.nodes, coarse.values, partition).value


def compare_all(
    u_ori: FieldVector,
    u_red: FieldVector,
    u_ie: FieldVector,
    cloud: ParticleCloud,
    red_grid: GridPartition,
    ie_grid: GridPartition,
    with_cells: bool = False,
) -> ComparisonReport:
    """Pairwise differences: particles vs RED cells, particles vs IE cells,
    IE cell centers vs RED cells."""
    if len(u_ori) != cloud.M:
        raise ValueError("ori field does not match the particle cloud")
    ori_red = sup_mean_details(u_ori.values, cloud.centers, u_red.values, red_grid, with_cells)
    ie_ori = sup_mean_details(u_ori.values, cloud.centers, u_ie.values, ie_grid)
    ie_red = sup_mean_details(u_ie.values, ie_grid.centers, u_red.values, red_grid)
    e1, e2, e3 = ori_red.value, ie_ori.value, ie_red.value
    scale = float(np.max(np.abs(u_red.values)))
    return ComparisonReport(
        e_ori_red=e1,
        e_ie_ori=e2,
        e_ie_red=e3,
        error_sum=e1 + e2 + e3,
        e_ori_red_normalized=e1 / scale if scale > 0 else float("nan"),
        excluded_particles=ori_red.excluded_points,
        per_cell_detail=ori_red.cells if with_cells else None,
    )
