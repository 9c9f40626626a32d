"""Restarted GMRES for ``(I + K) u = u0`` and a dense direct oracle."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .kernel import FieldVector, SystemOperator, assemble_matrix

logger = logging.getLogger(__name__)

DENSE_SIZE_LIMIT = 2000


class SingularSystemError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class SolveSettings:
    relative_tolerance: float = 1e-3
    restart_length: int = 50
    max_iterations: int = 10_000

    def __post_init__(self) -> None:
        if not 0.0 < self.relative_tolerance < 1.0:
            raise ValueError(f"relative_tolerance must lie in (0, 1), got {self.relative_tolerance}")
        if self.restart_length < 1:
            raise ValueError(f"restart_length must be >= 1, got {self.restart_length}")
        if self.max_iterations < self.restart_length:
            raise ValueError("max_iterations must be >= restart_length")


@dataclass(frozen=True, eq=False)
class SolveReport:
    solution: FieldVector
    iterations: int
    final_relative_residual: float
    converged: bool
    residual_history: tuple[float, ...] = field(default=())


def _givens(a: complex, b: complex) -> tuple[float, complex, complex]:
    """Rotation with ``[c, s; -conj(s), c] [a; b] = [r; 0]``, ``c`` real."""
    if b == 0:
        return 1.0, 0j, a
    if a == 0:
        return 0.0, np.conj(b) / abs(b), complex(abs(b))
    na = abs(a)
    norm = np.hypot(na, abs(b))
    c = na / norm
    s = (a / na) * np.conj(b) / norm
    r = (a / na) * norm
    return c, s, r


def gmres_solve(
    op: SystemOperator, rhs: FieldVector | np.ndarray, settings: SolveSettings = SolveSettings()
) -> SolveReport:
    """Solve ``op u = rhs`` from a zero initial guess.

    Convergence is declared on the true relative residual
    ``||rhs - op u|| / ||rhs||``, recomputed with one matvec at the end of
    every restart cycle.
    """
    b = rhs.values if isinstance(rhs, FieldVector) else np.asarray(rhs, dtype=complex)
    b = np.ascontiguousarray(b, dtype=np.complex128)
    n = op.size
    if b.shape != (n,):
        raise ValueError(f"rhs of length {b.shape[0]} for operator of size {n}")
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        raise ValueError("rhs must be nonzero")

    tol = settings.relative_tolerance
    m = min(settings.restart_length, n)
    x = np.zeros(n, dtype=np.complex128)
    r = b.copy()
    beta = b_norm
    history = [1.0]
    iterations = 0

    while iterations < settings.max_iterations:
        V = np.empty((m + 1, n), dtype=np.complex128)
        H = np.zeros((m + 1, m), dtype=np.complex128)
        cs = np.zeros(m)
        sn = np.zeros(m, dtype=np.complex128)
        g = np.zeros(m + 1, dtype=np.complex128)
        g[0] = beta
        V[0] = r / beta
        j_used = 0
        for j in range(m):
            w = op.matvec(V[j])
            iterations += 1
            for i in range(j + 1):
                H[i, j] = np.vdot(V[i], w)
                w -= H[i, j] * V[i]
            h_next = np.linalg.norm(w)
            H[j + 1, j] = h_next
            for i in range(j):
                hi, hi1 = H[i, j], H[i + 1, j]
                H[i, j] = cs[i] * hi + sn[i] * hi1
                H[i + 1, j] = -np.conj(sn[i]) * hi + cs[i] * hi1
            cs[j], sn[j], H[j, j] = _givens(H[j, j], H[j + 1, j])
            H[j + 1, j] = 0.0
            g[j + 1] = -np.conj(sn[j]) * g[j]
            g[j] = cs[j] * g[j]
            j_used = j + 1
            est = abs(g[j + 1]) / b_norm
            history.append(est)
            breakdown = h_next <= 1e-14 * b_norm
            if est <= tol or breakdown or iterations >= settings.max_iterations:
                break
            V[j + 1] = w / h_next

        if H[j_used - 1, j_used - 1] == 0:
            raise SingularSystemError("GMRES breakdown with singular Hessenberg matrix")
        y = scipy.linalg.solve_triangular(H[:j_used, :j_used], g[:j_used])
        x += V[:j_used].T @ y
        r = b - op.matvec(x)
        beta = np.linalg.norm(r)
        rel = beta / b_norm
        logger.debug("%s: restart after %d iterations, residual %.3e", op.kind.value, iterations, rel)
        if rel <= tol:
            return SolveReport(FieldVector(x, op.nodes, op.kind), iterations, float(rel), True, tuple(history))
        if beta == 0.0:
            break

    return SolveReport(FieldVector(x, op.nodes, op.kind), iterations, float(rel), False, tuple(history))


def dense_solve(op: SystemOperator, rhs: FieldVector | np.ndarray) -> FieldVector:
    """Direct LU solve of the materialized system (oracle for small sizes)."""
    if op.size > DENSE_SIZE_LIMIT:
        raise ValueError(f"dense solve limited to {DENSE_SIZE_LIMIT} unknowns, got {op.size}")
    b = rhs.values if isinstance(rhs, FieldVector) else np.asarray(rhs, dtype=complex)
    if b.shape != (op.size,):
        raise ValueError(f"rhs of length {b.shape[0]} for operator of size {op.size}")
    A = assemble_matrix(op)
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            u = scipy.linalg.solve(A, b)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
            raise SingularSystemError(f"system is singular to working precision: {exc}") from exc
    return FieldVector(u, op.nodes, op.kind)
