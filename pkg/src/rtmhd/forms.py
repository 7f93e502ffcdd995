"""Discrete energy and constraint forms for the normal-mode eigenproblem.

All forms are symmetric banded Gram assemblies on the clamped interior grid
(trapezoid weights, zero values and zero ghosts at +-Lz):

  e0  magnetic + buoyancy form; indefinite, orientation dependent
  e1  viscous dissipation form, positive semidefinite by construction
  j   density-weighted constraint form, positive definite
  mass  plain L^2 mass, used for membership tests and thresholds
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroFrequency
from .operators import (
    band_combine,
    composite_gram_band,
    d1_gram_band,
    d2_gram_band,
    grad_stiffness_band,
    mass_band,
)
from .profiles import (
    DensityProfile,
    Frequency,
    Grid1D,
    MagneticConfig,
    Orientation,
    PhysicalParams,
)

__all__ = ["FormSet", "assemble_forms"]


@dataclass(frozen=True)
class FormSet:
    """Assembled forms plus the context they were built from."""

    e0: np.ndarray
    e1: np.ndarray
    j: np.ndarray
    mass: np.ndarray
    xi: Frequency
    mag: MagneticConfig
    params: PhysicalParams
    grid: Grid1D
    profile: DensityProfile

    def energy(self, s: float) -> np.ndarray:
        """|xi|^2 E0 + s E1, the modified-problem quadratic form."""
        return band_combine([(self.xi.norm2, self.e0), (s, self.e1)])


def assemble_forms(
    profile: DensityProfile,
    grid: Grid1D,
    xi: Frequency,
    mag: MagneticConfig,
    params: PhysicalParams,
) -> FormSet:
    """Build E0, E1, J and the L^2 mass for one frequency and field setup."""
    if xi.is_zero():
        raise ZeroFrequency("forms are defined only for |xi| > 0")

    x = grid.points()
    xm = grid.midpoints()
    rho = profile.rho(x)
    drho = profile.drho(x)
    rho_mid = profile.rho(xm)
    xi2 = xi.norm2
    m2 = mag.magnitude**2

    buoyancy = mass_band(grid, -params.g * drho)
    k_grad = grad_stiffness_band(grid)

    if mag.orientation is Orientation.HORIZONTAL:
        m2xi1 = m2 * xi.xi1**2
        e0 = band_combine(
            [
                (m2xi1, mass_band(grid)),
                (m2xi1 / xi2, k_grad),
                (1.0, buoyancy),
            ]
        )
    else:
        e0 = band_combine(
            [
                (m2, k_grad),
                (m2 / xi2, d2_gram_band(grid)),
                (1.0, buoyancy),
            ]
        )

    e1 = band_combine(
        [
            (4.0 * params.mu * xi2, d1_gram_band(grid)),
            (params.mu, composite_gram_band(grid, xi2)),
        ]
    )

    j = band_combine(
        [
            (xi2, mass_band(grid, rho)),
            (1.0, grad_stiffness_band(grid, rho_mid)),
        ]
    )

    return FormSet(
        e0=e0,
        e1=e1,
        j=j,
        mass=mass_band(grid),
        xi=xi,
        mag=mag,
        params=params,
        grid=grid,
        profile=profile,
    )
