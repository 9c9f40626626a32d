"""Acoustic scattering by many small impedance particles.

Original many-body system, reduced system on subcubes, limiting integral
equation by collocation, and the recipe for a desired refraction
coefficient.
"""

from .compare import ComparisonReport, compare_all, sup_mean_difference
from .geometry import GridPartition, ParticleCloud, locate_cell, partition_cube, place_uniform_lattice
from .kernel import (
    FieldVector,
    SystemKind,
    SystemOperator,
    apply_operator,
    green_free,
    ie_operator,
    incident_field,
    ori_operator,
    red_operator,
    single_particle_solution,
)
from .model import (
    MaterialRecipe,
    PhysicalConfig,
    compute_impedance_function,
    compute_potential,
    design_material,
    particle_impedance,
    uniform_density,
)
from .solver import SolveReport, SolveSettings, dense_solve, gmres_solve

__version__ = "0.1.0"
