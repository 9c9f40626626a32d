import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smallbody.model import (
    FLAG_IM_H_POSITIVE,
    FLAG_IM_N0_SQUARED_NEGATIVE,
    MaterialRecipe,
    PhysicalConfig,
    compute_impedance_function,
    compute_potential,
    design_material,
    particle_impedance,
    uniform_density,
)

# Frozen from exact decimal arithmetic: 0.182651**2 = 0.033361387801.
P_PAPER = complex(3.3361387801e-8, 6.6722775602e-5)
# mpmath, 30 digits
N_1E4 = 0.912010839355909740
N_1E6 = 0.870963589956080642


def cfg_with(**kw):
    base = dict(k=1.0, alpha=(1.0, 0.0, 0.0), kappa=0.5, omega_side=1.0, n0=1, n_desired=1)
    base.update(kw)
    return PhysicalConfig(**base)


def test_paper_potential():
    p = compute_potential(PhysicalConfig.paper_defaults())
    assert p.real == pytest.approx(P_PAPER.real, rel=1e-9)
    assert p.imag == pytest.approx(P_PAPER.imag, rel=1e-12)


def test_potential_identity_and_real_case():
    assert compute_potential(cfg_with(k=3.7, n0=1.3 + 0.2j, n_desired=1.3 + 0.2j)) == 0
    assert compute_potential(cfg_with(k=1.0, n0=1, n_desired=2)) == -3


@pytest.mark.parametrize("lam", [0.5, 2.0, 7.3])
def test_potential_homogeneous_degree_two(lam):
    c1 = cfg_with(k=0.4, n0=1.1 + 0.01j, n_desired=-0.7 + 0.2j)
    c2 = cfg_with(k=0.4 * lam, n0=1.1 + 0.01j, n_desired=-0.7 + 0.2j)
    assert compute_potential(c2) == pytest.approx(lam**2 * compute_potential(c1), rel=1e-13)


def test_impedance_function_examples():
    assert compute_impedance_function(-3 + 0j, 1.0) == pytest.approx(-0.238732414637843)
    assert compute_impedance_function(0, 5.0) == 0
    h = compute_impedance_function(P_PAPER, N_1E4)
    assert h.real == pytest.approx(2.91094664000080911e-9, rel=1e-12)
    assert h.imag == pytest.approx(5.82189328000161822e-6, rel=1e-12)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_impedance_function_rejects_nonpositive_density(bad):
    with pytest.raises(ValueError):
        compute_impedance_function(1j, bad)


def test_uniform_density_examples():
    assert uniform_density(10**6, 1e-6, 0.99, 1.0) == pytest.approx(N_1E6, rel=1e-12)
    assert uniform_density(10**4, 1e-4, 0.99, 1.0) == pytest.approx(N_1E4, rel=1e-12)
    assert uniform_density(1, 1.0, 0.3, 1.0) == 1.0


@pytest.mark.parametrize("args", [(0, 1e-3, 0.5, 1.0), (10, 0.0, 0.5, 1.0), (10, 1e-3, 0.5, 0.0)])
def test_uniform_density_rejects(args):
    with pytest.raises(ValueError):
        uniform_density(*args)


def test_particle_impedance_examples():
    assert particle_impedance(-1, 1.0, 0.5) == -1
    assert particle_impedance(0, 1e-3, 0.99) == 0
    assert particle_impedance(-0.238732, 1e-2, 0.99).real == pytest.approx(-22.7987290046069438, rel=1e-12)
    with pytest.raises(ValueError):
        particle_impedance(1, 0.0, 0.5)


@settings(max_examples=200, deadline=None)
@given(
    p_re=st.floats(-1e3, 1e3, allow_nan=False),
    p_im=st.floats(-1e3, 1e3, allow_nan=False),
    n=st.floats(1e-6, 1e6),
)
def test_recipe_round_trip_and_sign(p_re, p_im, n):
    p = complex(p_re, p_im)
    h = compute_impedance_function(p, n)
    assert abs(4 * math.pi * h * n - p) <= 1e-12 * max(abs(p), 1e-300)
    assert (p.imag <= 0) == (h.imag <= 0)


@settings(max_examples=100, deadline=None)
@given(M=st.integers(1, 10**7), a=st.floats(1e-7, 1e-1), kappa=st.floats(0, 0.999), vol=st.floats(1e-3, 1e3))
def test_density_consistency(M, a, kappa, vol):
    n = uniform_density(M, a, kappa, vol)
    assert n * a ** -(2 - kappa) * vol == pytest.approx(M, rel=1e-9)


def test_config_validation():
    with pytest.raises(ValueError):
        cfg_with(alpha=(1.0, 1.0, 0.0))
    with pytest.raises(ValueError):
        cfg_with(kappa=1.0)
    with pytest.raises(ValueError):
        cfg_with(k=0.0)
    with pytest.raises(ValueError):
        cfg_with(omega_side=-1.0)
    c = cfg_with(alpha=(0.6, 0.8, 0.0))
    assert c.alpha == (0.6, 0.8, 0.0)


def test_config_flags_negative_im_n0_squared():
    assert FLAG_IM_N0_SQUARED_NEGATIVE in cfg_with(n0=1 - 0.1j).flags
    assert not PhysicalConfig.paper_defaults().flags


def test_paper_recipe_is_flagged_but_constructed():
    rec = design_material(PhysicalConfig.paper_defaults(), 10**4, 1e-4)
    assert FLAG_IM_H_POSITIVE in rec.flags
    assert not rec.solvable
    assert rec.n_density == pytest.approx(N_1E4, rel=1e-12)
    assert rec.shape_constant_c == 4 * math.pi


def test_recipe_rejects_inconsistent_values():
    with pytest.raises(ValueError):
        MaterialRecipe(p=1.0, h=1.0, n_density=1.0)
    with pytest.raises(ValueError):
        MaterialRecipe(p=0, h=0, n_density=1.0, shape_constant_c=0.0)


def test_recipe_pointwise_accessors():
    rec = design_material(PhysicalConfig.paper_defaults(), 1000, 1e-3)
    pts = np.random.default_rng(0).random((7, 3))
    assert np.all(rec.h_at(pts) == rec.h)
    assert np.all(rec.density_at(pts) == rec.n_density)
    assert np.all(rec.potential_at(pts) == rec.p)
    assert rec.zeta(1e-3, 0.99) == pytest.approx(rec.h / 1e-3**0.99)


def test_config_is_immutable():
    c = PhysicalConfig.paper_defaults()
    with pytest.raises(AttributeError):
        c.k = 2.0
