"""Physical parameters, steady density profiles, grids, and frequencies.

The steady density rho(x3) is built from a constant base value plus the
cumulative integral of a derivative drho composed of smooth compactly
supported bumps a * exp(-1/(1 - t^2)), t = (x - c)/w.  The derivative is
analytic and exactly zero outside the declared supports; rho itself is
obtained by composite Gauss-Legendre quadrature of drho, so the pair stays
consistent to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NonPositiveDensity, NoUnstableRegion

__all__ = [
    "PhysicalParams",
    "Orientation",
    "MagneticConfig",
    "Bump",
    "ProfileSpec",
    "Grid1D",
    "Frequency",
    "DensityProfile",
    "build_profile",
    "profile_metrics",
    "BUMP_INTEGRAL",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Shear viscosity mu, gravity g, and horizontal period scale L."""

    mu: float
    g: float
    L: float

    def __post_init__(self):
        if not (self.mu > 0 and self.g > 0 and self.L > 0):
            raise ValueError("mu, g, L must all be positive")


class Orientation(Enum):
    """Direction of the uniform background magnetic field."""

    HORIZONTAL = "horizontal"  # field along e1
    VERTICAL = "vertical"      # field along e3


@dataclass(frozen=True)
class MagneticConfig:
    """Background field orientation and strength (enters only as M^2)."""

    orientation: Orientation
    magnitude: float

    def __post_init__(self):
        if self.magnitude < 0:
            raise ValueError("field magnitude must be >= 0")


@dataclass(frozen=True)
class Bump:
    """One mollifier bump of the density derivative."""

    amplitude: float
    center: float
    half_width: float

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("bump half_width must be positive")


@dataclass(frozen=True)
class ProfileSpec:
    """Base density below the transition region plus a list of bumps."""

    base_density: float
    bumps: tuple[Bump, ...]

    def __post_init__(self):
        if not self.base_density > 0:
            raise ValueError("base_density must be positive")
        if not self.bumps:
            raise ValueError("at least one bump is required")
        object.__setattr__(self, "bumps", tuple(self.bumps))

    def to_dict(self) -> dict:
        return {
            "base_density": self.base_density,
            "bumps": [
                {"amp": b.amplitude, "center": b.center, "half_width": b.half_width}
                for b in self.bumps
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProfileSpec":
        bumps = tuple(
            Bump(float(b["amp"]), float(b["center"]), float(b["half_width"]))
            for b in d["bumps"]
        )
        return cls(base_density=float(d["base_density"]), bumps=bumps)


@dataclass(frozen=True)
class Grid1D:
    """Uniform interior grid on [-half_length, half_length], endpoints excluded.

    Values at +-half_length are fixed to zero by the boundary conditions and
    are never stored; h = 2*half_length/(n + 1).
    """

    half_length: float
    n: int

    def __post_init__(self):
        if not self.half_length > 0:
            raise ValueError("half_length must be positive")
        if self.n < 16:
            raise ValueError("need at least 16 interior points")

    @property
    def h(self) -> float:
        return 2.0 * self.half_length / (self.n + 1)

    def points(self) -> np.ndarray:
        h = self.h
        return -self.half_length + h * np.arange(1, self.n + 1)

    def midpoints(self) -> np.ndarray:
        """n+1 cell midpoints, one between each pair of adjacent nodes."""
        h = self.h
        return -self.half_length + h * (np.arange(self.n + 1) + 0.5)

    def refined(self, factor: int = 2) -> "Grid1D":
        """Same domain with the spacing divided by ``factor``."""
        return Grid1D(self.half_length, (self.n + 1) * factor - 1)


@dataclass(frozen=True)
class Frequency:
    """Horizontal wave vector xi = (xi1, xi2)."""

    xi1: float
    xi2: float

    @property
    def norm2(self) -> float:
        return self.xi1 * self.xi1 + self.xi2 * self.xi2

    @property
    def norm(self) -> float:
        return float(np.hypot(self.xi1, self.xi2))

    def is_zero(self) -> bool:
        return self.xi1 == 0.0 and self.xi2 == 0.0

    def on_lattice(self, L: float, tol: float = 1e-9) -> bool:
        a = self.xi1 * L
        b = self.xi2 * L
        return abs(a - round(a)) <= tol and abs(b - round(b)) <= tol

    @classmethod
    def lattice(cls, i: int, j: int, L: float) -> "Frequency":
        return cls(i / L, j / L)

    def __neg__(self) -> "Frequency":
        return Frequency(-self.xi1, -self.xi2)


# --- mollifier bump and its cumulative integral -----------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)
_N_PANELS = 64
_PANEL_EDGES = np.linspace(-1.0, 1.0, _N_PANELS + 1)


def _bump_shape(t: np.ndarray) -> np.ndarray:
    """exp(-1/(1-t^2)) for |t| < 1, zero elsewhere."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ti * ti))
    return out


def _panel_prefix() -> np.ndarray:
    """Cumulative integrals of the bump shape over the fixed panels."""
    a = _PANEL_EDGES[:-1]
    b = _PANEL_EDGES[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = _bump_shape(nodes) @ _GL_WEIGHTS
    panel = half * vals
    prefix = np.zeros(_N_PANELS + 1)
    np.cumsum(panel, out=prefix[1:])
    return prefix


_PANEL_PREFIX = _panel_prefix()

#: integral of exp(-1/(1-t^2)) over [-1, 1]
BUMP_INTEGRAL = float(_PANEL_PREFIX[-1])


def _bump_cdf(t: np.ndarray) -> np.ndarray:
    """Integral of the bump shape from -1 up to t (clipped to [-1, 1])."""
    t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
    width = 2.0 / _N_PANELS
    idx = np.minimum(((t + 1.0) / width).astype(int), _N_PANELS - 1)
    lo = _PANEL_EDGES[idx]
    half = 0.5 * (t - lo)
    mid = 0.5 * (t + lo)
    nodes = mid[..., None] + half[..., None] * _GL_NODES
    partial = half * (_bump_shape(nodes) @ _GL_WEIGHTS)
    return _PANEL_PREFIX[idx] + partial


@dataclass(frozen=True)
class DensityProfile:
    """Evaluators for rho, drho plus cached scalar metrics of the profile."""

    spec: ProfileSpec
    total_jump: float
    sup_ratio: float
    inf_rho: float
    sup_rho: float
    support: tuple[float, float]

    def drho(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for b in self.spec.bumps:
            out += b.amplitude * _bump_shape((x - b.center) / b.half_width)
        return out

    def rho(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.spec.base_density)
        for b in self.spec.bumps:
            out += b.amplitude * b.half_width * _bump_cdf((x - b.center) / b.half_width)
        return out

    def ratio(self, x) -> np.ndarray:
        """Pointwise drho/rho."""
        return self.drho(x) / self.rho(x)


def _support_interval(spec: ProfileSpec) -> tuple[float, float]:
    lo = min(b.center - b.half_width for b in spec.bumps)
    hi = max(b.center + b.half_width for b in spec.bumps)
    return lo, hi


def _dense_support_samples(spec: ProfileSpec, per_bump: int) -> np.ndarray:
    pieces = [
        np.linspace(b.center - b.half_width, b.center + b.half_width, per_bump)
        for b in spec.bumps
    ]
    return np.unique(np.concatenate(pieces))


def build_profile(spec: ProfileSpec, check_grid: Grid1D) -> DensityProfile:
    """Validate a profile spec on the given grid and cache its metrics.

    Raises NoUnstableRegion if no bump has positive amplitude and
    NonPositiveDensity if rho dips to zero or below anywhere sampled.
    """
    if not any(b.amplitude > 0 for b in spec.bumps):
        raise NoUnstableRegion("profile needs a bump with positive amplitude")

    support = _support_interval(spec)
    half = 0.5 * check_grid.half_length
    if not (-half < support[0] and support[1] < half):
        raise ValueError(
            f"bump support [{support[0]:g}, {support[1]:g}] must sit strictly "
            f"inside [-Lz/2, Lz/2] = [{-half:g}, {half:g}] so a decay region exists"
        )
    total_jump = BUMP_INTEGRAL * sum(b.amplitude * b.half_width for b in spec.bumps)

    # 10x the check-grid density across every bump support, plus the grid
    # itself and the two asymptotic values.
    per_bump = max(101, 10 * check_grid.n // max(1, len(spec.bumps)))
    samples = np.concatenate(
        [check_grid.points(), _dense_support_samples(spec, per_bump)]
    )

    probe = DensityProfile(
        spec=spec,
        total_jump=total_jump,
        sup_ratio=0.0,
        inf_rho=0.0,
        sup_rho=0.0,
        support=support,
    )
    rho_s = probe.rho(samples)
    tails = np.array([spec.base_density, spec.base_density + total_jump])
    inf_rho = float(min(rho_s.min(), tails.min()))
    sup_rho = float(max(rho_s.max(), tails.max()))
    if inf_rho <= 0:
        raise NonPositiveDensity(f"min rho = {inf_rho:.6g} <= 0")

    sup_ratio = _polished_sup_ratio(probe, samples)
    return DensityProfile(
        spec=spec,
        total_jump=total_jump,
        sup_ratio=sup_ratio,
        inf_rho=inf_rho,
        sup_rho=sup_rho,
        support=support,
    )


def _polished_sup_ratio(profile: DensityProfile, samples: np.ndarray) -> float:
    """sup of drho/rho: dense sampling then a bounded local polish.

    The polish step makes the cached value an upper envelope for the ratio at
    any later evaluation grid, which keeps sup-based bounds exact.
    """
    r = profile.ratio(samples)
    k = int(np.argmax(r))
    best = float(r[k])
    if best <= 0.0:
        # positive bump guarantees a positive ratio somewhere; keep sample max
        return max(best, 0.0)
    lo = samples[max(0, k - 1)]
    hi = samples[min(len(samples) - 1, k + 1)]
    if hi > lo:
        res = minimize_scalar(
            lambda x: -profile.ratio(np.array([x]))[0],
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-13},
        )
        best = max(best, float(-res.fun))
    return best


def profile_metrics(profile: DensityProfile) -> dict:
    """Cached scalar metrics as a plain dict."""
    return {
        "total_jump": profile.total_jump,
        "sup_ratio": profile.sup_ratio,
        "inf_rho": profile.inf_rho,
        "sup_rho": profile.sup_rho,
    }
