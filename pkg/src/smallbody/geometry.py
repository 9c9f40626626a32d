"""Particle placement, cube partitions and point-to-cell lookup.

Every point set (particle lattice, cell centers) is enumerated in
lexicographic ``(z, y, x)`` order, so flat index ``(iz * n + iy) * n + ix``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class ParticleCloud:
    """Particle centers ``(M, 3)`` [cm] with radius and nominal spacing.

    ``overflow`` is set when some centers do not lie strictly inside the
    domain cube; such particles still scatter but cannot be binned.
    """

    centers: np.ndarray
    radius_a: float
    spacing_d: float
    overflow: bool = False

    def __post_init__(self) -> None:
        centers = np.ascontiguousarray(self.centers, dtype=float)
        if centers.ndim != 2 or centers.shape[1] != 3 or centers.shape[0] < 1:
            raise ValueError(f"centers must have shape (M, 3), got {centers.shape}")
        centers.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        if self.radius_a < 0.0 or not self.spacing_d > 0.0:
            raise ValueError("radius must be >= 0 and spacing > 0")
        if self.radius_a >= self.spacing_d:
            raise ValueError(
                f"radius {self.radius_a} must be smaller than spacing {self.spacing_d}"
            )

    @property
    def M(self) -> int:
        return self.centers.shape[0]


@dataclass(frozen=True, eq=False)
class GridPartition:
    """Uniform tiling of ``[0, side]^3`` into ``cells_per_side^3`` cubes."""

    side: float
    cells_per_side: int

    def __post_init__(self) -> None:
        if self.cells_per_side < 1:
            raise ValueError(f"cells_per_side must be >= 1, got {self.cells_per_side}")
        if not self.side > 0.0:
            raise ValueError(f"side must be positive, got {self.side}")
        n = self.cells_per_side
        h = self.side / n
        ticks = (np.arange(n) + 0.5) * h
        z, y, x = np.meshgrid(ticks, ticks, ticks, indexing="ij")
        centers = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)
        centers.setflags(write=False)
        volumes = np.full(n**3, h**3)
        volumes.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "volumes", volumes)

    @property
    def cell_size(self) -> float:
        return self.side / self.cells_per_side

    @property
    def total_cells(self) -> int:
        return self.cells_per_side**3


def _lattice_sites_per_side(M: int) -> int:
    n = max(1, int(round(M ** (1.0 / 3.0))))
    while n**3 < M:
        n += 1
    while n > 1 and (n - 1) ** 3 >= M:
        n -= 1
    return n


def place_uniform_lattice(
    M: int, d: float, side: float = 1.0, radius: float = 0.0
) -> ParticleCloud:
    """First ``M`` sites of a pitch-``d`` cubic lattice centered in the domain.

    The lattice has ``ceil(M^(1/3))`` sites per side. Placement never fails:
    when the occupied sites reach the domain boundary or beyond, the cloud is
    returned with ``overflow=True``.
    """
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if not d > 0.0:
        raise ValueError(f"spacing must be positive, got {d}")
    n = _lattice_sites_per_side(M)
    ticks = 0.5 * side + (np.arange(n) - 0.5 * (n - 1)) * d
    z, y, x = np.meshgrid(ticks, ticks, ticks, indexing="ij")
    centers = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)[:M]
    overflow = bool(np.any(centers <= 0.0) or np.any(centers >= side))
    return ParticleCloud(centers=centers, radius_a=radius, spacing_d=d, overflow=overflow)


def partition_cube(side: float, cells_per_side: int) -> GridPartition:
    return GridPartition(side=side, cells_per_side=cells_per_side)


def locate_cells(partition: GridPartition, points: np.ndarray) -> np.ndarray:
    """Vectorized cell lookup; returns -1 for points outside the domain.

    Cells are closed at their lower face only for the first cell along each
    axis: a point on an internal face belongs to the lower-index cell.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    n = partition.cells_per_side
    scaled = points * (n / partition.side)
    idx = np.ceil(scaled).astype(np.int64) - 1
    idx = np.maximum(idx, 0)
    inside = np.all((points >= 0.0) & (points <= partition.side), axis=1)
    flat = (idx[:, 2] * n + idx[:, 1]) * n + idx[:, 0]
    return np.where(inside, flat, -1)


def locate_cell(partition: GridPartition, point) -> int:
    """Index of the cell containing ``point``; raises for outside points."""
    idx = int(locate_cells(partition, np.asarray(point, dtype=float))[0])
    if idx < 0:
        raise ValueError(f"point {tuple(point)} lies outside the domain")
    return idx


def min_pairwise_distance(points: np.ndarray) -> float:
    """Brute-force minimum distance; intended for small point sets."""
    points = np.asarray(points, dtype=float)
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(dist, np.inf)
    return float(dist.min())


def save_points(path: str | Path, points: np.ndarray) -> None:
    """Write one point per line with 17 significant digits per coordinate."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    with open(path, "w") as fh:
        for x, y, z in points:
            fh.write(f"{x:.16e} {y:.16e} {z:.16e}\n")


def load_points(path: str | Path) -> np.ndarray:
    return np.loadtxt(path, dtype=float, ndmin=2).reshape(-1, 3)


def regime_ratio(d: float, a: float, kappa: float) -> float:
    """``d / a^((2-kappa)/3)``; O(1) inside the asymptotic regime."""
    return d / a ** ((2.0 - kappa) / 3.0)

