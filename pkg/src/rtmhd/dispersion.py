"""Critical field strength, critical frequencies, and lattice sweeps.

The growing-mode domain of a field configuration is the set of frequencies
where the magnetic + buoyancy form E0 is indefinite.  Membership is decided
by the sign of the smallest eigenvalue of (E0, mass); the same threshold can
be located through dedicated critical quantities (the critical field
strength, the horizontal critical-frequency function, and the vertical
critical-frequency constant), and both routes agree up to solver tolerance.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .eig import max_generalized_eig, min_generalized_eig
from .errors import EmptyDomain, InconsistentDecision, OutOfRange, ZeroFrequency
from .forms import assemble_forms
from .growth import GrowthResult, growth_rate
from .operators import band_combine, grad_stiffness_band, mass_band
from .profiles import (
    DensityProfile,
    Frequency,
    Grid1D,
    MagneticConfig,
    Orientation,
    PhysicalParams,
)

__all__ = [
    "CriticalNumber",
    "DispersionEntry",
    "DispersionTable",
    "SupRate",
    "in_growing_domain",
    "critical_number",
    "critical_number_auto",
    "default_truncation_grids",
    "critical_freq_horizontal",
    "critical_freq_vertical",
    "lattice_sweep",
    "sup_rate",
    "default_sweep_radius",
    "table_to_csv",
    "trace_to_csv",
]

_MEMBERSHIP_FLOOR = 1e-12
_DIVERGENCE_FACTOR = 1.5
_CONVERGENCE_RTOL = 1e-4


def in_growing_domain(
    profile: DensityProfile,
    grid: Grid1D,
    xi: Frequency,
    mag: MagneticConfig,
    params: PhysicalParams,
) -> bool:
    """True iff E0 is indefinite at xi (strictly negative with a noise floor)."""
    if xi.is_zero():
        raise ZeroFrequency("xi = 0 is excluded from the growing domain")
    forms = assemble_forms(profile, grid, xi, mag, params)
    pair = min_generalized_eig(forms.e0, forms.mass)
    return pair.value < -_MEMBERSHIP_FLOOR * params.g * profile.sup_ratio


# --- critical field strength -------------------------------------------------


@dataclass(frozen=True)
class CriticalNumber:
    """Finite/infinite classification of the critical vertical field strength."""

    is_infinite: bool
    value: float | None
    trace: tuple[tuple[float, float], ...]  # (Lz, value) per truncation


def _critical_value_on(profile: DensityProfile, grid: Grid1D, g: float) -> float:
    """sqrt of the largest eigenvalue of (g drho mass, gradient stiffness)."""
    x = grid.points()
    a = mass_band(grid, g * profile.drho(x))
    b = grad_stiffness_band(grid)
    pair = max_generalized_eig(a, b)
    if pair.value <= 0:
        raise OutOfRange("profile admits no positive Rayleigh quotient")
    return float(np.sqrt(pair.value))


def default_truncation_grids(
    profile: DensityProfile,
    lz0: float | None = None,
    n0: int = 129,
    count: int = 3,
) -> list[Grid1D]:
    """A doubling Lz sequence with n scaled proportionally (fixed spacing)."""
    if lz0 is None:
        lo, hi = profile.support
        lz0 = 4.0 * max(abs(lo), abs(hi), 1.0)
    grids = []
    for k in range(count):
        scale = 2**k
        grids.append(Grid1D(lz0 * scale, (n0 + 1) * scale - 1))
    return grids


def _classify_trace(
    trace: list[tuple[float, float]], total_jump: float, strict: bool
) -> CriticalNumber | None:
    """Apply the divergence/convergence rules; None means undecided so far.

    True divergence doubles the Rayleigh quotient (the squared trace value)
    per Lz doubling, so the 1.5x detection factor is applied to value^2.
    """
    v = [t[1] for t in trace]
    growth_last = (v[-1] / v[-2]) ** 2
    growth_prev = (v[-2] / v[-3]) ** 2
    diverging = growth_last >= _DIVERGENCE_FACTOR and growth_prev >= _DIVERGENCE_FACTOR
    rel_change = abs(v[-1] - v[-2]) / abs(v[-1])
    converged = rel_change < _CONVERGENCE_RTOL

    if diverging:
        if total_jump <= 0:
            raise InconsistentDecision(
                f"trace diverges ({growth_prev:.3f}x, {growth_last:.3f}x) but "
                f"total_jump = {total_jump:.6g} <= 0"
            )
        return CriticalNumber(is_infinite=True, value=None, trace=tuple(trace))
    if converged:
        if total_jump > 0:
            raise InconsistentDecision(
                f"trace settled at {v[-1]:.6g} but total_jump = "
                f"{total_jump:.6g} > 0 predicts divergence"
            )
        return CriticalNumber(is_infinite=False, value=v[-1], trace=tuple(trace))
    if strict:
        raise InconsistentDecision(
            f"trace is neither diverging nor settled (last relative change "
            f"{rel_change:.3g}); extend the Lz sequence"
        )
    return None


def critical_number(
    profile: DensityProfile, grids: list[Grid1D], g: float = 1.0
) -> CriticalNumber:
    """Classify the critical field strength from a doubling-Lz truncation trace.

    Divergence (>= 1.5x growth per doubling over the last two doublings) means
    infinite; a settled trace (< 1e-4 relative change at the last doubling)
    means finite with the last value.  Either way the numerical decision is
    cross-checked against the sign of the total density jump.
    """
    if len(grids) < 3:
        raise ValueError("need at least 3 truncations, each doubling Lz")
    for ga, gb in zip(grids, grids[1:]):
        if not math.isclose(gb.half_length, 2.0 * ga.half_length, rel_tol=1e-9):
            raise ValueError("each truncation must double the previous Lz")
    trace = [(grid.half_length, _critical_value_on(profile, grid, g)) for grid in grids]
    result = _classify_trace(trace, profile.total_jump, strict=True)
    assert result is not None
    return result


def critical_number_auto(
    profile: DensityProfile,
    lz0: float | None = None,
    n0: int = 129,
    g: float = 1.0,
    max_doublings: int = 14,
) -> CriticalNumber:
    """Extend the doubling-Lz trace until the classification rules trigger."""
    grids = default_truncation_grids(profile, lz0=lz0, n0=n0, count=3)
    trace = [(gr.half_length, _critical_value_on(profile, gr, g)) for gr in grids]
    for _ in range(max_doublings):
        result = _classify_trace(trace, profile.total_jump, strict=False)
        if result is not None:
            return result
        last = grids[-1]
        nxt = Grid1D(2.0 * last.half_length, (last.n + 1) * 2 - 1)
        grids.append(nxt)
        trace.append((nxt.half_length, _critical_value_on(profile, nxt, g)))
    return critical_number(profile, grids, g=g)  # raises with diagnostics


# --- critical frequencies ----------------------------------------------------


def critical_freq_horizontal(
    profile: DensityProfile, grid: Grid1D, xi: Frequency, M: float, g: float = 1.0
) -> float:
    """Threshold S(xi) for a horizontal field; instability requires |xi| < S."""
    if M * xi.xi1 == 0.0:
        raise OutOfRange("S(xi) requires M * xi1 != 0")
    x = grid.points()
    coeff = g * xi.norm2 / (M * xi.xi1) ** 2
    a = band_combine(
        [
            (coeff, mass_band(grid, profile.drho(x))),
            (-1.0, grad_stiffness_band(grid)),
        ]
    )
    pair = max_generalized_eig(a, mass_band(grid))
    if pair.value <= 0:
        raise OutOfRange(
            f"field ratio |M xi1|/|xi| = {abs(M * xi.xi1) / xi.norm:.6g} is at or "
            "above the critical field strength; no threshold exists"
        )
    return float(np.sqrt(pair.value))


def _vertical_e0_min(
    profile: DensityProfile,
    grid: Grid1D,
    xi_norm: float,
    M: float,
    g: float,
) -> float:
    xi = Frequency(0.0, xi_norm)
    mag = MagneticConfig(Orientation.VERTICAL, abs(M))
    params = PhysicalParams(mu=1.0, g=g, L=1.0)
    forms = assemble_forms(profile, grid, xi, mag, params)
    return min_generalized_eig(forms.e0, forms.mass).value


def critical_freq_vertical(
    profile: DensityProfile,
    grid: Grid1D,
    M: float,
    g: float = 1.0,
    rtol: float = 1e-8,
) -> float:
    """Threshold |xi|_vc for a vertical field; instability requires |xi| > it.

    Located by bisection in |xi| on the sign of the smallest eigenvalue of
    (vertical E0, mass), which is nonincreasing in |xi|.  A positive total
    density jump makes the threshold zero.
    """
    if profile.total_jump > 0:
        return 0.0
    if M == 0.0:
        raise OutOfRange("the vertical threshold needs M != 0")

    hi = 1.0
    for _ in range(60):
        if _vertical_e0_min(profile, grid, hi, M, g) < 0.0:
            break
        hi *= 2.0
    else:
        raise OutOfRange(
            f"E0 stays nonnegative up to |xi| = {hi:.3g}: the field strength "
            "appears to be at or above critical"
        )
    lo = hi / 2.0
    while _vertical_e0_min(profile, grid, lo, M, g) < 0.0:
        hi = lo
        lo /= 2.0
        if lo < 1e-12:
            return 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if _vertical_e0_min(profile, grid, mid, M, g) < 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# --- lattice sweep -----------------------------------------------------------


@dataclass(frozen=True)
class DispersionEntry:
    xi1: float
    xi2: float
    member: bool
    lam: float | None
    error: str | None = None


@dataclass(frozen=True)
class DispersionTable:
    entries: tuple[DispersionEntry, ...]
    lattice_radius: float
    params: PhysicalParams
    mag: MagneticConfig


@dataclass(frozen=True)
class SupRate:
    lam_max: float
    xi_pair: tuple[Frequency, Frequency]
    lam_star: float
    on_boundary: bool


def default_sweep_radius(profile: DensityProfile) -> float:
    """Four fundamental wavelengths of the derivative support width."""
    lo, hi = profile.support
    return 4.0 * 2.0 * math.pi / (hi - lo)


def _representatives(radius: float, L: float) -> list[tuple[int, int]]:
    kmax = int(math.floor(radius * L + 1e-12))
    reps = []
    for i in range(kmax + 1):
        for j in range(kmax + 1):
            if i == 0 and j == 0:
                continue
            if math.hypot(i, j) <= radius * L + 1e-12:
                reps.append((i, j))
    return reps


def _solve_rep(args) -> tuple[int, int, bool, float | None, str | None]:
    profile, grid, mag, params, tol, i, j = args
    xi = Frequency.lattice(i, j, params.L)
    try:
        if not in_growing_domain(profile, grid, xi, mag, params):
            return i, j, False, None, None
        forms = assemble_forms(profile, grid, xi, mag, params)
        res = growth_rate(forms, tol=tol)
        if res is None:
            return i, j, False, None, None
        return i, j, True, res.lam, None
    except Exception as exc:  # per-point failures are recorded, not raised
        return i, j, False, None, f"{type(exc).__name__}: {exc}"


def lattice_sweep(
    profile: DensityProfile,
    grid: Grid1D,
    mag: MagneticConfig,
    params: PhysicalParams,
    radius: float,
    tol: float = 1e-8,
    workers: int = 1,
) -> DispersionTable:
    """Membership and growth rate on all lattice points with 0 < |xi| <= radius.

    The rate is even in each frequency component, so one representative per
    sign orbit is solved and mirrored to the remaining quadrants.
    """
    if radius <= 0:
        raise ValueError("sweep radius must be positive")
    reps = _representatives(radius, params.L)
    jobs = [(profile, grid, mag, params, tol, i, j) for (i, j) in reps]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            solved = list(pool.map(_solve_rep, jobs))
    else:
        solved = [_solve_rep(job) for job in jobs]

    by_index: dict[tuple[int, int], DispersionEntry] = {}
    for i, j, member, lam, err in solved:
        for si in (1, -1) if i else (1,):
            for sj in (1, -1) if j else (1,):
                xi = Frequency.lattice(si * i, sj * j, params.L)
                by_index[(si * i, sj * j)] = DispersionEntry(
                    xi1=xi.xi1, xi2=xi.xi2, member=member, lam=lam, error=err
                )
    keys = sorted(by_index)
    entries = tuple(by_index[k] for k in keys)
    return DispersionTable(
        entries=entries, lattice_radius=radius, params=params, mag=mag
    )


def sup_rate(table: DispersionTable) -> SupRate:
    """Largest swept rate and the +-xi pair attaining it (deterministic ties)."""
    members = [e for e in table.entries if e.member and e.lam is not None]
    if not members:
        raise EmptyDomain(
            f"no growing frequency inside radius {table.lattice_radius:.6g}"
        )
    lam_max = max(e.lam for e in members)
    # ties broken by smallest |xi| then lexicographic (xi1, xi2)
    best = min(
        (e for e in members if e.lam >= lam_max),
        key=lambda e: (math.hypot(e.xi1, e.xi2), e.xi1, e.xi2),
    )
    xi1 = Frequency(best.xi1, best.xi2)
    spacing = 1.0 / table.params.L
    on_boundary = xi1.norm > table.lattice_radius - spacing
    return SupRate(
        lam_max=lam_max,
        xi_pair=(xi1, -xi1),
        lam_star=best.lam,
        on_boundary=on_boundary,
    )


def growth_at(
    profile: DensityProfile,
    grid: Grid1D,
    xi: Frequency,
    mag: MagneticConfig,
    params: PhysicalParams,
    tol: float = 1e-8,
) -> GrowthResult | None:
    """Convenience: assemble forms and run the fixed point at one frequency."""
    forms = assemble_forms(profile, grid, xi, mag, params)
    return growth_rate(forms, tol=tol)


# --- exports -----------------------------------------------------------------


def table_to_csv(table: DispersionTable) -> str:
    lines = ["xi1,xi2,member,lambda"]
    for e in table.entries:
        lam = f"{e.lam:.17g}" if (e.member and e.lam is not None) else ""
        lines.append(f"{e.xi1:.17g},{e.xi2:.17g},{int(e.member)},{lam}")
    return "\n".join(lines) + "\n"


def trace_to_csv(critical: CriticalNumber) -> str:
    lines = ["Lz,value"]
    for lz, value in critical.trace:
        lines.append(f"{lz:.17g},{value:.17g}")
    return "\n".join(lines) + "\n"
