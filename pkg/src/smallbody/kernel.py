"""Free-space Helmholtz kernel and matrix-free system operators.

All three systems are written as ``(I + K) u = u0`` with

    (K v)_j = sum_{m != j} G(x_j, x_m) * coupling_m * v_m,
    G(x, y) = exp(ik|x - y|) / (4 pi |x - y|).

The couplings differ by system:

    ORI  c * h(x_m) * a^(2 - kappa)            (particle centers)
    RED  4 pi * h(x_p) * N(x_p) * |Delta_p|     (subcube centers)
    IE   p(y_c) * |Delta_c|                      (collocation cell centers)

The self term is excluded in every case, so RED is exactly the IE
Riemann sum evaluated on the coarse grid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numba
import numpy as np

from .geometry import GridPartition, ParticleCloud
from .model import MaterialRecipe, PhysicalConfig

FOUR_PI = 4.0 * math.pi


class SystemKind(str, enum.Enum):
    ORI = "ori"
    RED = "red"
    IE = "ie"


@dataclass(frozen=True, eq=False)
class FieldVector:
    """Complex field values at the nodes of one geometry."""

    values: np.ndarray
    nodes: np.ndarray
    kind: SystemKind

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex)
        if values.ndim != 1 or values.shape[0] != self.nodes.shape[0]:
            raise ValueError(
                f"{values.shape[0] if values.ndim else 0} values for {self.nodes.shape[0]} nodes"
            )
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


@dataclass(frozen=True, eq=False)
class SystemOperator:
    """``I + K`` for one of the three systems, applied without storing K."""

    kind: SystemKind
    nodes: np.ndarray
    coupling: np.ndarray
    k: float

    def __post_init__(self) -> None:
        nodes = np.ascontiguousarray(self.nodes, dtype=np.float64)
        coupling = np.ascontiguousarray(self.coupling, dtype=np.complex128)
        if nodes.ndim != 2 or nodes.shape[1] != 3:
            raise ValueError(f"nodes must have shape (n, 3), got {nodes.shape}")
        if coupling.shape != (nodes.shape[0],):
            raise ValueError("one coupling value per node required")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "coupling", coupling)

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.ascontiguousarray(v, dtype=np.complex128)
        if v.shape != (self.size,):
            raise ValueError(f"vector of length {v.shape} for operator of size {self.size}")
        return _apply_identity_plus_k(self.nodes, self.coupling, self.k, v)


def green_free(k: float, x, y) -> complex:
    """``exp(ik|x-y|) / (4 pi |x-y|)``; undefined at ``x == y``."""
    r = math.dist(tuple(map(float, x)), tuple(map(float, y)))
    if r == 0.0:
        raise ValueError("Green's function is singular at coincident points")
    return complex(math.cos(k * r), math.sin(k * r)) / (FOUR_PI * r)


def incident_field(cfg: PhysicalConfig, x: np.ndarray) -> np.ndarray | complex:
    """Plane wave ``exp(ik alpha . x)`` at one point or an ``(n, 3)`` array."""
    x = np.asarray(x, dtype=float)
    phase = cfg.k * (x @ np.asarray(cfg.alpha))
    out = np.exp(1j * phase)
    return complex(out) if out.ndim == 0 else out


@numba.njit(parallel=True, cache=True, fastmath=False)
def _apply_identity_plus_k(nodes, coupling, k, v):
    n = nodes.shape[0]
    cv = coupling * v
    out = np.empty(n, dtype=np.complex128)
    for j in numba.prange(n):
        xj = nodes[j, 0]
        yj = nodes[j, 1]
        zj = nodes[j, 2]
        acc_re = 0.0
        acc_im = 0.0
        for m in range(n):
            if m == j:
                continue
            dx = xj - nodes[m, 0]
            dy = yj - nodes[m, 1]
            dz = zj - nodes[m, 2]
            r = math.sqrt(dx * dx + dy * dy + dz * dz)
            kr = k * r
            g = 1.0 / (FOUR_PI * r)
            gr = math.cos(kr) * g
            gi = math.sin(kr) * g
            c = cv[m]
            acc_re += gr * c.real - gi * c.imag
            acc_im += gr * c.imag + gi * c.real
        out[j] = v[j] + complex(acc_re, acc_im)
    return out


@numba.njit(parallel=True, cache=True)
def _evaluate_potential(targets, nodes, weights, k):
    nt = targets.shape[0]
    n = nodes.shape[0]
    out = np.empty(nt, dtype=np.complex128)
    for t in numba.prange(nt):
        acc_re = 0.0
        acc_im = 0.0
        for m in range(n):
            dx = targets[t, 0] - nodes[m, 0]
            dy = targets[t, 1] - nodes[m, 1]
            dz = targets[t, 2] - nodes[m, 2]
            r = math.sqrt(dx * dx + dy * dy + dz * dz)
            g = 1.0 / (FOUR_PI * r)
            gr = math.cos(k * r) * g
            gi = math.sin(k * r) * g
            w = weights[m]
            acc_re += gr * w.real - gi * w.imag
            acc_im += gr * w.imag + gi * w.real
        out[t] = complex(acc_re, acc_im)
    return out


def apply_operator(op: SystemOperator, v: FieldVector | np.ndarray) -> FieldVector:
    """Return ``(I + K) v`` as a field on the operator's nodes."""
    values = v.values if isinstance(v, FieldVector) else np.asarray(v)
    if values.shape != (op.size,):
        raise ValueError(f"vector of length {values.shape[0]} for operator of size {op.size}")
    return FieldVector(op.matvec(values), op.nodes, op.kind)


def assemble_matrix(op: SystemOperator) -> np.ndarray:
    """Dense ``I + K``; only for small operators."""
    diff = op.nodes[:, None, :] - op.nodes[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(r, 1.0)
    g = np.exp(1j * op.k * r) / (FOUR_PI * r)
    np.fill_diagonal(g, 0.0)
    return np.eye(op.size, dtype=complex) + g * op.coupling[None, :]


def ori_operator(cfg: PhysicalConfig, cloud: ParticleCloud, recipe: MaterialRecipe) -> SystemOperator:
    a = cloud.radius_a
    if not a > 0.0:
        raise ValueError("the original system needs a positive particle radius")
    h = recipe.h_at(cloud.centers)
    coupling = recipe.shape_constant_c * h * a ** (2.0 - cfg.kappa)
    return SystemOperator(SystemKind.ORI, cloud.centers, coupling, cfg.k)


def red_operator(cfg: PhysicalConfig, grid: GridPartition, recipe: MaterialRecipe) -> SystemOperator:
    h = recipe.h_at(grid.centers)
    dens = recipe.density_at(grid.centers)
    coupling = FOUR_PI * h * dens * grid.volumes
    return SystemOperator(SystemKind.RED, grid.centers, coupling, cfg.k)


def ie_operator(cfg: PhysicalConfig, grid: GridPartition, recipe: MaterialRecipe) -> SystemOperator:
    coupling = recipe.potential_at(grid.centers) * grid.volumes
    return SystemOperator(SystemKind.IE, grid.centers, coupling, cfg.k)


def incident_rhs(cfg: PhysicalConfig, op: SystemOperator) -> FieldVector:
    return FieldVector(incident_field(cfg, op.nodes), op.nodes, op.kind)


def total_field(
    cfg: PhysicalConfig, op: SystemOperator, u: FieldVector | np.ndarray, points: np.ndarray
) -> np.ndarray:
    """Field ``u0(x) - sum_m G(x, x_m) coupling_m u_m`` off the node set.

    For ORI this is the point-scatterer representation with charges
    ``Q_m = -c a^(2-kappa) h_m u_m``. Points must not coincide with nodes.
    """
    values = u.values if isinstance(u, FieldVector) else np.asarray(u, dtype=complex)
    points = np.ascontiguousarray(np.asarray(points, dtype=float).reshape(-1, 3))
    charges = np.ascontiguousarray(-op.coupling * values)
    return incident_field(cfg, points) + _evaluate_potential(points, op.nodes, charges, op.k)


def single_particle_solution(
    cfg: PhysicalConfig,
    zeta: complex,
    a: float,
    x1,
    x,
    shape_constant_c: float = FOUR_PI,
) -> complex:
    """Asymptotic field ``u0(x) + g(x, x1) Q`` with ``Q = -zeta |S| u0(x1)``.

    Requires ``|x - x1| >= 10 a``.
    """
    if math.dist(tuple(map(float, x)), tuple(map(float, x1))) < 10.0 * a:
        raise ValueError("evaluation point too close to the particle (need |x - x1| >= 10a)")
    q = -zeta * shape_constant_c * a**2 * incident_field(cfg, x1)
    return incident_field(cfg, x) + green_free(cfg.k, x, x1) * q
