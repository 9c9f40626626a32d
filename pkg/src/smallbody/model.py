"""Physical parameters and the material-design recipe.

The recipe maps an initial refraction coefficient ``n0`` and a desired
coefficient ``n`` to the potential ``p = k^2 (n0^2 - n^2)``, then, for a
chosen particle density ``N``, to the impedance function ``h = p / (4 pi N)``
and the per-particle boundary impedance ``zeta = h / a^kappa``.

All lengths are in centimeters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPHERE_SHAPE_CONSTANT = 4.0 * math.pi

# Flags attached to configs/recipes that are constructible but outside the
# regime where the scattering problem is known to be uniquely solvable.
FLAG_IM_N0_SQUARED_NEGATIVE = "im_n0_squared_negative"
FLAG_IM_H_POSITIVE = "im_h_positive"


@dataclass(frozen=True)
class PhysicalConfig:
    """Wave and medium parameters for one experiment.

    Attributes
    ----------
    k : float
        Wave number [1/cm].
    alpha : tuple of float
        Unit incident direction.
    kappa : float
        Impedance scaling exponent, ``0 <= kappa < 1``.
    omega_side : float
        Edge length [cm] of the domain cube ``[0, omega_side]^3``.
    n0, n_desired : complex
        Initial and desired refraction coefficients (constants).
    """

    k: float
    alpha: tuple[float, float, float]
    kappa: float
    omega_side: float
    n0: complex
    n_desired: complex
    flags: frozenset[str] = field(init=False, default=frozenset())

    def __post_init__(self) -> None:
        alpha = tuple(float(c) for c in self.alpha)
        if len(alpha) != 3:
            raise ValueError(f"alpha must have 3 components, got {len(alpha)}")
        if abs(math.sqrt(sum(c * c for c in alpha)) - 1.0) > 1e-12:
            raise ValueError(f"alpha must be a unit vector, got {alpha}")
        if not 0.0 <= self.kappa < 1.0:
            raise ValueError(f"kappa must lie in [0, 1), got {self.kappa}")
        if not self.k > 0.0:
            raise ValueError(f"k must be positive, got {self.k}")
        if not self.omega_side > 0.0:
            raise ValueError(f"omega_side must be positive, got {self.omega_side}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "n0", complex(self.n0))
        object.__setattr__(self, "n_desired", complex(self.n_desired))
        flags = set()
        if (self.n0 * self.n0).imag < 0.0:
            flags.add(FLAG_IM_N0_SQUARED_NEGATIVE)
        object.__setattr__(self, "flags", frozenset(flags))

    @property
    def omega_volume(self) -> float:
        return self.omega_side**3

    @property
    def wavelength(self) -> float:
        return 2.0 * math.pi / self.k

    @classmethod
    def paper_defaults(cls) -> PhysicalConfig:
        """Constants used for the many-particle experiments (unit cube)."""
        return cls(
            k=0.182651,
            alpha=(1.0, 0.0, 0.0),
            kappa=0.99,
            omega_side=1.0,
            n0=1 + 0j,
            n_desired=-1 + 0.001j,
        )


@dataclass(frozen=True)
class MaterialRecipe:
    """Output of the recipe for a uniform medium.

    ``h`` and ``n_density`` are stored as constants; the ``*_at`` accessors
    evaluate them per point so consumers never assume uniformity.
    """

    p: complex
    h: complex
    n_density: float
    shape_constant_c: float = SPHERE_SHAPE_CONSTANT
    flags: frozenset[str] = field(init=False, default=frozenset())

    def __post_init__(self) -> None:
        if not self.shape_constant_c > 0.0:
            raise ValueError(f"shape constant must be positive, got {self.shape_constant_c}")
        if not self.n_density > 0.0:
            raise ValueError(f"density must be positive, got {self.n_density}")
        recon = 4.0 * math.pi * self.h * self.n_density
        if abs(recon - self.p) > 1e-12 * max(abs(self.p), 1e-300):
            raise ValueError("4*pi*h*N does not reproduce p")
        flags = set()
        if self.h.imag > 0.0:
            flags.add(FLAG_IM_H_POSITIVE)
        object.__setattr__(self, "flags", frozenset(flags))

    @property
    def solvable(self) -> bool:
        """False when Im h > 0, outside the proven uniqueness regime."""
        return FLAG_IM_H_POSITIVE not in self.flags

    def h_at(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        return np.full(points.shape[0], self.h, dtype=complex)

    def density_at(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        return np.full(points.shape[0], self.n_density, dtype=float)

    def potential_at(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        return np.full(points.shape[0], self.p, dtype=complex)

    def zeta(self, a: float, kappa: float) -> complex:
        return particle_impedance(self.h, a, kappa)


def compute_potential(cfg: PhysicalConfig) -> complex:
    """Return ``p = k^2 (n0^2 - n^2)``."""
    return cfg.k**2 * (cfg.n0**2 - cfg.n_desired**2)


def compute_impedance_function(p: complex, n_density: float) -> complex:
    """Solve ``p = 4 pi h N`` for ``h`` componentwise."""
    if not n_density > 0.0:
        raise ValueError(f"density must be positive, got {n_density}")
    p = complex(p)
    denom = 4.0 * math.pi * n_density
    return complex(p.real / denom, p.imag / denom)


def uniform_density(M: int, a: float, kappa: float, omega_volume: float) -> float:
    """Constant density ``N = M a^(2-kappa) / |Omega|``."""
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if not a > 0.0:
        raise ValueError(f"radius must be positive, got {a}")
    if not omega_volume > 0.0:
        raise ValueError(f"domain volume must be positive, got {omega_volume}")
    return M * a ** (2.0 - kappa) / omega_volume


def particle_impedance(h: complex, a: float, kappa: float) -> complex:
    """Boundary impedance ``zeta = h / a^kappa`` of a particle of radius ``a``."""
    if not a > 0.0:
        raise ValueError(f"radius must be positive, got {a}")
    return complex(h) / a**kappa


def design_material(
    cfg: PhysicalConfig,
    M: int,
    a: float,
    shape_constant_c: float = SPHERE_SHAPE_CONSTANT,
) -> MaterialRecipe:
    """Run the recipe for ``M`` uniformly distributed particles of radius ``a``."""
    p = compute_potential(cfg)
    n_density = uniform_density(M, a, cfg.kappa, cfg.omega_volume)
    h = compute_impedance_function(p, n_density)
    return MaterialRecipe(p=p, h=h, n_density=n_density, shape_constant_c=shape_constant_c)
