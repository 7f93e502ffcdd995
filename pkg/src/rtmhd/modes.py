"""Companion components of a growing mode and the real-valued field assembly.

Given the vertical-velocity profile psi and rate lambda of one frequency, the
remaining components follow in the order pressure-free horizontal solve ->
pressure -> divergence closure:

  horizontal field: phi solves the clamped two-point problem
      -phi'' + sigma phi = omega,
  pi comes from the third-derivative expression of psi, and theta closes the
  divergence identity xi1 phi + xi2 theta + psi' = 0 exactly.

  vertical field: the rotation ansatz phi = -xi1 psi'/|xi|^2,
  theta = -xi2 psi'/|xi|^2 closes the divergence identically and pi follows
  algebraically from the first momentum equation.

Real horizontally periodic fields are synthesized from the +-xi pair; the
component parities make every field a single cos/sin profile in x' . xi.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import ResidualTooLarge
from .growth import GrowthResult
from .operators import d1_apply, d2_apply
from .profiles import (
    DensityProfile,
    Frequency,
    Grid1D,
    MagneticConfig,
    Orientation,
    PhysicalParams,
    ProfileSpec,
)

__all__ = [
    "NormalMode",
    "FieldSnapshot",
    "build_mode",
    "mode_residuals",
    "assemble_real_solution",
    "export_mode",
    "load_mode",
    "export_snapshot",
]

DEFAULT_MODE_TOL = 1e-6

_FIELD_ORDER = ("rho", "u1", "u2", "u3", "N1", "N2", "N3", "q")


@dataclass(frozen=True)
class NormalMode:
    """One growing normal mode: profiles on the interior grid."""

    xi: Frequency
    lam: float
    psi: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    pi: np.ndarray
    mag: MagneticConfig
    grid: Grid1D
    residuals: dict


@dataclass(frozen=True)
class FieldSnapshot:
    """Real fields at one time as cos/sin coefficient profiles in x' . xi."""

    t: float
    xi: Frequency
    grid: Grid1D
    L: float
    fields: dict  # name -> (cos profile, sin profile)
    norms: dict   # name -> L^2(Omega) norm

    def norm_group(self, names: tuple[str, ...]) -> float:
        return float(np.sqrt(sum(self.norms[k] ** 2 for k in names)))


def _magnetic_rhs(
    mode_arrays: dict,
    xi: Frequency,
    mag: MagneticConfig,
    h: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The M^2-scaled coupling terms of the three momentum equations."""
    phi, theta, psi = mode_arrays["phi"], mode_arrays["theta"], mode_arrays["psi"]
    psi1 = d1_apply(psi, h)
    if mag.orientation is Orientation.HORIZONTAL:
        b1 = np.zeros_like(psi)
        b2 = xi.xi1 * xi.xi2 * phi - xi.xi1**2 * theta
        b3 = -(xi.xi1**2 * psi + xi.xi1 * d1_apply(phi, h))
    else:
        b1 = d2_apply(phi, h) + xi.xi1 * psi1
        b2 = d2_apply(theta, h) + xi.xi2 * psi1
        b3 = np.zeros_like(psi)
    return b1, b2, b3


def _l2(v: np.ndarray, h: float) -> float:
    return float(np.sqrt(h * np.sum(np.abs(v) ** 2)))


_STENCIL_TRIM = 3  # rows per side where composed stencils touch ghost values


def mode_residuals(
    psi: np.ndarray,
    phi: np.ndarray,
    theta: np.ndarray,
    pi: np.ndarray,
    lam: float,
    xi: Frequency,
    mag: MagneticConfig,
    params: PhysicalParams,
    profile: DensityProfile,
    grid: Grid1D,
) -> dict:
    """Relative residuals of the four mode equations and the divergence.

    Residuals are measured on stencil-interior rows: the outermost rows of
    the truncated grid realize the clamped boundary conditions rather than
    the differential equations, and composed difference stencils are only
    consistent where they do not reach past the boundary.
    """
    h = grid.h
    x = grid.points()
    rho = profile.rho(x)
    drho = profile.drho(x)
    xi2 = xi.norm2
    mu = params.mu
    m2 = mag.magnitude**2
    b1, b2, b3 = _magnetic_rhs(
        {"phi": phi, "theta": theta, "psi": psi}, xi, mag, h
    )
    cut = slice(_STENCIL_TRIM, len(psi) - _STENCIL_TRIM)

    def rel(residual: np.ndarray, terms: list[np.ndarray]) -> float:
        scale = sum(_l2(t[cut], h) for t in terms)
        if scale == 0.0:
            return 0.0
        return _l2(residual[cut], h) / scale

    t1 = [
        lam**2 * rho * phi,
        -lam * xi.xi1 * pi,
        lam * mu * (xi2 * phi - d2_apply(phi, h)),
        -(m2 * b1),
    ]
    t2 = [
        lam**2 * rho * theta,
        -lam * xi.xi2 * pi,
        lam * mu * (xi2 * theta - d2_apply(theta, h)),
        -(m2 * b2),
    ]
    t3 = [
        lam**2 * rho * psi,
        lam * d1_apply(pi, h),
        lam * mu * (xi2 * psi - d2_apply(psi, h)),
        -params.g * drho * psi,
        -(m2 * b3),
    ]
    psi1 = d1_apply(psi, h)
    div = xi.xi1 * phi + xi.xi2 * theta + psi1
    div_terms = [xi.xi1 * phi, xi.xi2 * theta, psi1]
    return {
        "eq1": rel(sum(t1), t1),
        "eq2": rel(sum(t2), t2),
        "eq3": rel(sum(t3), t3),
        "div": rel(div, div_terms),
    }


def _solve_clamped(sigma: np.ndarray, rhs: np.ndarray, h: float) -> np.ndarray:
    """Solve -v'' + sigma v = rhs with zero boundary values (tridiagonal)."""
    n = len(rhs)
    ab = np.zeros((3, n))
    ab[0, 1:] = -1.0 / h**2
    ab[1] = 2.0 / h**2 + sigma
    ab[2, :-1] = -1.0 / h**2
    return solve_banded((1, 1), ab, rhs)


def build_mode(
    growth: GrowthResult,
    mag: MagneticConfig,
    params: PhysicalParams,
    profile: DensityProfile,
    grid: Grid1D,
    mode_tol: float = DEFAULT_MODE_TOL,
) -> NormalMode:
    """Reconstruct (phi, theta, pi) from the minimizing psi and validate."""
    if growth.lam <= 0:
        raise ValueError("mode construction needs a positive growth rate")
    xi = growth.xi
    lam = growth.lam
    h = grid.h
    x = grid.points()
    rho = profile.rho(x)
    mu = params.mu
    xi2 = xi.norm2
    m2 = mag.magnitude**2

    psi = np.array(growth.psi.vec, dtype=float)
    psi1 = d1_apply(psi, h)
    psi3 = d1_apply(d2_apply(psi, h), h)

    if mag.orientation is Orientation.HORIZONTAL:
        beta = lam**2 * rho + lam * mu * xi2 + m2 * xi.xi1**2
        if xi.xi1 == 0.0:
            phi = np.zeros_like(psi)
        elif xi.xi2 == 0.0:
            # close the divergence through phi; theta then vanishes
            phi = -psi1 / xi.xi1
        else:
            sigma = beta / (lam * mu)
            omega = xi.xi1 * (lam * mu * psi3 - beta * psi1) / (lam * mu * xi2)
            phi = _solve_clamped(sigma, omega, h)
        pi = (lam * mu * psi3 - beta * psi1 - m2 * xi.xi1 * xi2 * phi) / (lam * xi2)
        if xi.xi2 != 0.0:
            theta = -(xi.xi1 * phi + psi1) / xi.xi2
        else:
            theta = np.zeros_like(psi)
    else:
        phi = -xi.xi1 * psi1 / xi2
        theta = -xi.xi2 * psi1 / xi2
        pi = -(
            lam**2 * rho * psi1
            + (lam * mu + m2) * (xi2 * psi1 - d2_apply(psi1, h))
        ) / (lam * xi2)

    residuals = mode_residuals(
        psi, phi, theta, pi, lam, xi, mag, params, profile, grid
    )
    worst = max(residuals.values())
    if worst > mode_tol:
        raise ResidualTooLarge(
            f"mode residuals {residuals} exceed tolerance {mode_tol:g}; "
            "increase the grid resolution"
        )
    return NormalMode(
        xi=xi,
        lam=lam,
        psi=psi,
        phi=phi,
        theta=theta,
        pi=pi,
        mag=mag,
        grid=grid,
        residuals=residuals,
    )


# --- real-valued growing solution ---------------------------------------------


def assemble_real_solution(
    mode: NormalMode, t: float, params: PhysicalParams, profile: DensityProfile
) -> FieldSnapshot:
    """Real horizontally periodic fields from the +-xi pair at time t."""
    grid = mode.grid
    h = grid.h
    x = grid.points()
    drho = profile.drho(x)
    lam = mode.lam
    M = mode.mag.magnitude
    xi = mode.xi
    amp = float(np.exp(lam * t))
    zero = np.zeros_like(mode.psi)

    fields: dict[str, tuple[np.ndarray, np.ndarray]] = {
        "rho": (-2.0 * drho * mode.psi * amp, zero),
        "u1": (zero, 2.0 * lam * mode.phi * amp),
        "u2": (zero, 2.0 * lam * mode.theta * amp),
        "u3": (2.0 * lam * mode.psi * amp, zero),
        "q": (2.0 * lam * mode.pi * amp, zero),
    }
    if M == 0.0:
        fields["N1"] = (zero, zero)
        fields["N2"] = (zero, zero)
        fields["N3"] = (zero, zero)
    elif mode.mag.orientation is Orientation.HORIZONTAL:
        fields["N1"] = (2.0 * M * xi.xi1 * mode.phi * amp, zero)
        fields["N2"] = (2.0 * M * xi.xi1 * mode.theta * amp, zero)
        fields["N3"] = (zero, -2.0 * M * xi.xi1 * mode.psi * amp)
    else:
        fields["N1"] = (zero, 2.0 * M * d1_apply(mode.phi, h) * amp)
        fields["N2"] = (zero, 2.0 * M * d1_apply(mode.theta, h) * amp)
        fields["N3"] = (2.0 * M * d1_apply(mode.psi, h) * amp, zero)

    two_pi_l = 2.0 * np.pi * params.L
    norms = {
        name: two_pi_l
        * float(np.sqrt(0.5 * h * (np.sum(c**2) + np.sum(s**2))))
        for name, (c, s) in fields.items()
    }
    return FieldSnapshot(
        t=t, xi=xi, grid=grid, L=params.L, fields=fields, norms=norms
    )


def snapshot_divergence(snap: FieldSnapshot, names: tuple[str, str, str]) -> float:
    """Relative discrete divergence of a vector field stored in a snapshot."""
    h = snap.grid.h
    xi = snap.xi
    (c1, s1), (c2, s2), (c3, s3) = (snap.fields[k] for k in names)
    cos_part = xi.xi1 * s1 + xi.xi2 * s2 + d1_apply(c3, h)
    sin_part = -xi.xi1 * c1 - xi.xi2 * c2 + d1_apply(s3, h)
    num = np.sqrt(_l2(cos_part, h) ** 2 + _l2(sin_part, h) ** 2)
    scale = sum(
        np.sqrt(_l2(a, h) ** 2 + _l2(b, h) ** 2)
        for a, b in (
            (xi.xi1 * s1, xi.xi1 * c1),
            (xi.xi2 * s2, xi.xi2 * c2),
            (d1_apply(c3, h), d1_apply(s3, h)),
        )
    )
    if scale == 0.0:
        return 0.0
    return float(num / scale)


# --- file formats --------------------------------------------------------------


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def export_mode(
    mode: NormalMode,
    profile: DensityProfile,
    params: PhysicalParams,
    stem: str,
) -> tuple[str, str]:
    """Write <stem>.json (full metadata + profiles) and <stem>.csv.

    The JSON file carries everything needed to rebuild the residuals; the CSV
    adds the boundary rows with their identically zero values.
    """
    if not stem:
        raise OSError("empty export path")
    payload = {
        "kind": "normal_mode",
        "xi": [mode.xi.xi1, mode.xi.xi2],
        "lambda": mode.lam,
        "mag": {
            "orientation": mode.mag.orientation.value,
            "magnitude": mode.mag.magnitude,
        },
        "params": {"mu": params.mu, "g": params.g, "L": params.L},
        "grid": {"half_length": mode.grid.half_length, "n": mode.grid.n},
        "profile": profile.spec.to_dict(),
        "residuals": mode.residuals,
        "psi": mode.psi.tolist(),
        "phi": mode.phi.tolist(),
        "theta": mode.theta.tolist(),
        "pi": mode.pi.tolist(),
    }
    json_path = stem + ".json"
    csv_path = stem + ".csv"
    with open(json_path, "w") as f:
        json.dump(payload, f, indent=1, sort_keys=True)
        f.write("\n")

    lz = mode.grid.half_length
    rows = ["x3,psi,phi,theta,pi"]
    rows.append(f"{_fmt(-lz)},0,0,0,0")
    for x, a, b, c, d in zip(
        mode.grid.points(), mode.psi, mode.phi, mode.theta, mode.pi
    ):
        rows.append(f"{_fmt(x)},{_fmt(a)},{_fmt(b)},{_fmt(c)},{_fmt(d)}")
    rows.append(f"{_fmt(lz)},0,0,0,0")
    with open(csv_path, "w") as f:
        f.write("\n".join(rows) + "\n")
    return json_path, csv_path


def load_mode(json_path: str):
    """Rebuild (mode, profile, params) from an exported JSON file."""
    from .profiles import build_profile  # local import to avoid cycle at import time

    with open(json_path) as f:
        payload = json.load(f)
    if payload.get("kind") != "normal_mode":
        raise OSError(f"{json_path} is not a normal-mode export")
    params = PhysicalParams(**payload["params"])
    grid = Grid1D(**payload["grid"])
    spec = ProfileSpec.from_dict(payload["profile"])
    profile = build_profile(spec, grid)
    mag = MagneticConfig(
        Orientation(payload["mag"]["orientation"]), payload["mag"]["magnitude"]
    )
    mode = NormalMode(
        xi=Frequency(*payload["xi"]),
        lam=payload["lambda"],
        psi=np.array(payload["psi"]),
        phi=np.array(payload["phi"]),
        theta=np.array(payload["theta"]),
        pi=np.array(payload["pi"]),
        mag=mag,
        grid=grid,
        residuals=payload["residuals"],
    )
    return mode, profile, params


def export_snapshot(snap: FieldSnapshot, path: str) -> str:
    """CSV of a snapshot: one cos/sin column pair per field."""
    if not path:
        raise OSError("empty export path")
    header = ["x3"]
    for name in _FIELD_ORDER:
        header += [f"{name}_cos", f"{name}_sin"]
    rows = [",".join(header)]
    xs = snap.grid.points()
    for i, x in enumerate(xs):
        row = [_fmt(x)]
        for name in _FIELD_ORDER:
            c, s = snap.fields[name]
            row += [_fmt(c[i]), _fmt(s[i])]
        rows.append(",".join(row))
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as f:
        f.write("\n".join(rows) + "\n")
    return path
