import numpy as np
import pytest

from smallbody.geometry import partition_cube, place_uniform_lattice
from smallbody.kernel import (
    SystemKind,
    SystemOperator,
    assemble_matrix,
    ie_operator,
    incident_rhs,
    ori_operator,
    red_operator,
)
from smallbody.model import PhysicalConfig, design_material
from smallbody.solver import (
    SingularSystemError,
    SolveSettings,
    dense_solve,
    gmres_solve,
)

CFG = PhysicalConfig.paper_defaults()


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def hard_operator(n=120, seed=0):
    """Strong random coupling: far from identity, needs many iterations."""
    rng = np.random.default_rng(seed)
    nodes = rng.random((n, 3))
    coupling = 0.05 * np.exp(2j * np.pi * rng.random(n))
    return SystemOperator(SystemKind.ORI, nodes, coupling, 5.0)


def paper_ori(M, d=0.05):
    rec = design_material(CFG, M, 1e-4)
    cloud = place_uniform_lattice(M, d, radius=1e-4)
    op = ori_operator(CFG, cloud, rec)
    return op, incident_rhs(CFG, op)


def test_settings_validation():
    SolveSettings()
    for bad in (dict(relative_tolerance=0.0), dict(relative_tolerance=1.0),
                dict(restart_length=0), dict(restart_length=50, max_iterations=10)):
        with pytest.raises(ValueError):
            SolveSettings(**bad)


def test_identity_system_single_node():
    op = SystemOperator(SystemKind.ORI, np.array([[0.5, 0.5, 0.5]]), np.array([1.0 + 0j]), 1.0)
    rep = gmres_solve(op, np.array([0.7 - 0.2j]))
    assert rep.converged and rep.iterations == 1
    assert rep.solution.values[0] == pytest.approx(0.7 - 0.2j, rel=1e-15)


def test_paper_system_matches_dense_M100():
    op, rhs = paper_ori(100)
    rep = gmres_solve(op, rhs)
    assert rep.converged
    assert rel(rep.solution.values, dense_solve(op, rhs).values) <= 5e-3


def test_scaling_rhs_scales_solution():
    op = hard_operator()
    b = np.exp(1j * np.arange(op.size))
    c = 3.0 - 4.0j
    s = SolveSettings(relative_tolerance=1e-8)
    u1 = gmres_solve(op, b, s).solution.values
    u2 = gmres_solve(op, c * b, s).solution.values
    assert rel(u2, c * u1) <= 1e-7


@pytest.mark.parametrize("restart", [3, 10, 200])
def test_hard_system_against_dense(restart):
    op = hard_operator()
    b = np.exp(1j * np.arange(op.size))
    s = SolveSettings(relative_tolerance=1e-10, restart_length=restart, max_iterations=5000)
    rep = gmres_solve(op, b, s)
    assert rep.converged
    assert rep.iterations > 3
    exact = dense_solve(op, b).values
    assert rel(rep.solution.values, exact) <= 1e-8


def test_residual_contract_reverified():
    op = hard_operator(seed=3)
    b = np.cos(np.arange(op.size)) + 0j
    for tol in (1e-2, 1e-3, 1e-6):
        rep = gmres_solve(op, b, SolveSettings(relative_tolerance=tol, restart_length=5))
        assert rep.converged
        r = np.linalg.norm(op.matvec(rep.solution.values) - b) / np.linalg.norm(b)
        assert r <= tol
        assert r == pytest.approx(rep.final_relative_residual, rel=1e-10)
        assert rep.solution.finite


def test_residual_history_is_monotone_within_cycle():
    op = hard_operator(seed=5)
    b = np.ones(op.size, dtype=complex)
    rep = gmres_solve(op, b, SolveSettings(relative_tolerance=1e-10, restart_length=400, max_iterations=400))
    h = np.array(rep.residual_history)
    assert np.all(np.diff(h) <= 1e-12)


def test_non_convergence_is_reported():
    op = hard_operator()
    b = np.ones(op.size, dtype=complex)
    rep = gmres_solve(op, b, SolveSettings(relative_tolerance=1e-12, restart_length=2, max_iterations=4))
    assert not rep.converged
    assert rep.iterations == 4
    assert rep.final_relative_residual > 1e-12


def test_rhs_checks():
    op = hard_operator(10)
    with pytest.raises(ValueError):
        gmres_solve(op, np.zeros(10))
    with pytest.raises(ValueError):
        gmres_solve(op, np.ones(9))


@pytest.mark.parametrize("kind", ["ori", "red", "ie"])
def test_oracle_agreement_all_kinds(kind):
    rec = design_material(CFG, 400, 1e-4)
    if kind == "ori":
        op = ori_operator(CFG, place_uniform_lattice(400, 0.05, radius=1e-4), rec)
    elif kind == "red":
        op = red_operator(CFG, partition_cube(1.0, 5), rec)
    else:
        op = ie_operator(CFG, partition_cube(1.0, 7), rec)
    rhs = incident_rhs(CFG, op)
    s = SolveSettings()
    rep = gmres_solve(op, rhs, s)
    assert rep.converged
    assert rel(rep.solution.values, dense_solve(op, rhs).values) <= 5 * s.relative_tolerance


def test_restart_independence_reference_problem():
    op, rhs = paper_ori(1000, d=0.08)
    sols = [gmres_solve(op, rhs, SolveSettings(restart_length=m)).solution.values for m in (20, 50, 100)]
    for i in range(3):
        for j in range(i):
            assert rel(sols[i], sols[j]) <= 2e-3


def test_restart_independence_hard_problem():
    op = hard_operator(seed=7)
    b = np.exp(0.3j * np.arange(op.size))
    sols = [gmres_solve(op, b, SolveSettings(restart_length=m)).solution.values for m in (20, 50, 100)]
    exact = dense_solve(op, b).values
    for s in sols:
        assert rel(s, exact) <= 2e-3 * np.linalg.cond(assemble_matrix(op))


def test_gmres_is_deterministic():
    op = hard_operator(seed=11)
    b = np.exp(0.1j * np.arange(op.size))
    r1 = gmres_solve(op, b, SolveSettings(relative_tolerance=1e-9, restart_length=7))
    r2 = gmres_solve(op, b, SolveSettings(relative_tolerance=1e-9, restart_length=7))
    assert r1.iterations == r2.iterations
    assert r1.solution.values.tobytes() == r2.solution.values.tobytes()


def test_dense_one_by_one():
    op = SystemOperator(SystemKind.RED, np.array([[0.1, 0.2, 0.3]]), np.array([5.0 + 0j]), 2.0)
    assert dense_solve(op, np.array([2.5j])).values[0] == 2.5j


def test_dense_symmetric_pair():
    nodes = np.array([[0.25, 0.5, 0.5], [0.75, 0.5, 0.5]])
    op = SystemOperator(SystemKind.RED, nodes, np.array([0.3 + 0.1j, 0.3 + 0.1j]), 0.0)
    u = dense_solve(op, np.array([1.0 + 0j, 1.0 + 0j])).values
    assert u[0] == pytest.approx(u[1], rel=1e-15)


def test_dense_random_residual():
    rng = np.random.default_rng(50)
    op = SystemOperator(SystemKind.ORI, rng.random((50, 3)), 0.01 * rng.standard_normal(50) + 0j, 1.0)
    b = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    u = dense_solve(op, b).values
    assert np.linalg.norm(op.matvec(u) - b) / np.linalg.norm(b) <= 1e-10


def test_dense_singular_raises():
    # two nodes with G*c = -1 each way: I + K = [[1, -1], [-1, 1]]
    nodes = np.array([[0.0, 0, 0], [1.0, 0, 0]])
    c = -4 * np.pi * np.ones(2) + 0j
    op = SystemOperator(SystemKind.RED, nodes, c, 0.0)
    with pytest.raises(SingularSystemError):
        dense_solve(op, np.ones(2, dtype=complex))


def test_dense_size_guard():
    op = SystemOperator(SystemKind.IE, np.random.default_rng(0).random((2001, 3)), np.zeros(2001), 1.0)
    with pytest.raises(ValueError):
        dense_solve(op, np.ones(2001))
