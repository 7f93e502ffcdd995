"""Cross-validation by direct time integration of the linearized equations.

The linearized system block-diagonalizes over horizontal frequencies, so one
frequency evolves as a 1D complex system in x3.  A Crank-Nicolson step treats
every term implicitly at the half step: the density and induction updates are
affine in the new velocity, so they are eliminated analytically and the step
reduces to one sparse solve for (u, q) with the incompressibility row kept as
an exact constraint (pressure as multiplier).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import DegenerateSeries, SharpnessViolation, SolverSingular
from .growth import GrowthResult
from .modes import NormalMode
from .operators import d1_apply
from .profiles import (
    DensityProfile,
    Frequency,
    Grid1D,
    MagneticConfig,
    Orientation,
    PhysicalParams,
)

__all__ = [
    "LinearState",
    "RateEstimate",
    "LinearEvolver",
    "evolve",
    "eigenmode_state",
    "random_divfree_state",
    "measured_rate",
    "sharpness_test",
    "series_to_csv",
]

RATE_SLACK = 0.02  # admissible relative overshoot of a measured rate


@dataclass
class LinearState:
    """Complex vertical profiles of all perturbation fields at frequency xi."""

    xi: Frequency
    grid: Grid1D
    t: float
    rho: np.ndarray
    u: np.ndarray  # shape (3, n)
    N: np.ndarray  # shape (3, n)
    q: np.ndarray

    def copy(self) -> "LinearState":
        return LinearState(
            xi=self.xi,
            grid=self.grid,
            t=self.t,
            rho=self.rho.copy(),
            u=self.u.copy(),
            N=self.N.copy(),
            q=self.q.copy(),
        )

    def norm_u(self) -> float:
        return float(np.sqrt(self.grid.h * np.sum(np.abs(self.u) ** 2)))

    def norm_rho(self) -> float:
        return float(np.sqrt(self.grid.h * np.sum(np.abs(self.rho) ** 2)))

    def norm_N(self) -> float:
        return float(np.sqrt(self.grid.h * np.sum(np.abs(self.N) ** 2)))

    def divergence_u(self) -> float:
        return _relative_div(self.u, self.xi, self.grid)

    def divergence_N(self) -> float:
        return _relative_div(self.N, self.xi, self.grid)


def _relative_div(v: np.ndarray, xi: Frequency, grid: Grid1D) -> float:
    h = grid.h
    parts = [1j * xi.xi1 * v[0], 1j * xi.xi2 * v[1], d1_apply(v[2], h)]
    num = np.linalg.norm(parts[0] + parts[1] + parts[2])
    scale = sum(np.linalg.norm(p) for p in parts)
    if scale == 0.0:
        return 0.0
    return float(num / scale)


def _sparse_d1(n: int, h: float) -> sp.csr_matrix:
    c = 1.0 / (2.0 * h)
    return sp.diags([-c, c], offsets=[-1, 1], shape=(n, n), format="csr")


def _sparse_d1_free(n: int, h: float) -> sp.csr_matrix:
    d = _sparse_d1(n, h).tolil()
    d[0, 0:3] = np.array([-3.0, 4.0, -1.0]) / (2.0 * h)
    d[n - 1, n - 3 : n] = np.array([1.0, -4.0, 3.0]) / (2.0 * h)
    return d.tocsr()


def _sparse_d2(n: int, h: float) -> sp.csr_matrix:
    c = 1.0 / (h * h)
    return sp.diags(
        [c, -2.0 * c, c], offsets=[-1, 0, 1], shape=(n, n), format="csr"
    )


class LinearEvolver:
    """Factored Crank-Nicolson stepper for one frequency and step size."""

    def __init__(
        self,
        profile: DensityProfile,
        mag: MagneticConfig,
        params: PhysicalParams,
        grid: Grid1D,
        xi: Frequency,
        dt: float,
    ):
        if dt <= 0:
            raise ValueError("dt must be positive")
        n = grid.n
        h = grid.h
        x = grid.points()
        rho = profile.rho(x)
        drho = profile.drho(x)
        xi2 = xi.norm2
        mu = params.mu
        M = mag.magnitude

        ident = sp.identity(n, format="csr", dtype=complex)
        d1 = _sparse_d1(n, h).astype(complex)
        d1f = _sparse_d1_free(n, h).astype(complex)
        lap = (_sparse_d2(n, h) - xi2 * sp.identity(n, format="csr")).astype(complex)
        zero = sp.csr_matrix((n, n), dtype=complex)

        # induction operator T: N_t = T u, and Lorentz force blocks F[i][j]
        if mag.orientation is Orientation.HORIZONTAL:
            t_op = [1j * M * xi.xi1 * ident] * 3
            f_blocks = [
                [zero, zero, zero],
                [-1j * M * xi.xi2 * ident, 1j * M * xi.xi1 * ident, zero],
                [-M * d1f, zero, 1j * M * xi.xi1 * ident],
            ]
        else:
            t_op = [M * d1] * 3
            f_blocks = [
                [M * d1f, zero, -1j * M * xi.xi1 * ident],
                [zero, M * d1f, -1j * M * xi.xi2 * ident],
                [zero, zero, zero],
            ]

        grad = [1j * xi.xi1 * ident, 1j * xi.xi2 * ident, d1]
        div = [1j * xi.xi1 * ident, 1j * xi.xi2 * ident, d1]

        rho_dt = sp.diags(rho / dt).astype(complex)
        blocks: list[list] = [[None] * 4 for _ in range(4)]
        for c in range(3):
            acc = {c: rho_dt - 0.5 * mu * lap}
            # implicit Lorentz contribution F(T u+) scaled by dt/4
            for j in range(3):
                fij = f_blocks[c][j] @ t_op[j]
                if fij.nnz:
                    acc[j] = acc.get(j, zero) - 0.25 * dt * fij
            if c == 2:
                acc[2] = acc.get(2, zero) + sp.diags(
                    -0.25 * dt * params.g * drho
                ).astype(complex)
            for j, blk in acc.items():
                blocks[c][j] = blk
            blocks[c][3] = grad[c]
        for j in range(3):
            blocks[3][j] = div[j]

        system = sp.bmat(blocks, format="csc")
        try:
            self._lu = splu(system)
        except RuntimeError as exc:
            raise SolverSingular(
                f"time-step system is singular at dt = {dt:g}: {exc}"
            ) from exc

        self.grid = grid
        self.xi = xi
        self.dt = dt
        self._rho = rho
        self._drho = drho
        self._g = params.g
        self._mu = mu
        self._lap = lap
        self._t_op = t_op
        self._f_blocks = f_blocks
        self._n = n

    def _induction(self, u: np.ndarray) -> np.ndarray:
        return np.stack([self._t_op[j] @ u[j] for j in range(3)])

    def _lorentz(self, N: np.ndarray) -> np.ndarray:
        out = np.zeros_like(N)
        for c in range(3):
            for j in range(3):
                blk = self._f_blocks[c][j]
                if blk.nnz:
                    out[c] += blk @ N[j]
        return out

    def step(self, state: LinearState) -> LinearState:
        dt = self.dt
        n = self._n
        u, N, rho_p = state.u, state.N, state.rho

        n_half_known = N + 0.25 * dt * self._induction(u)
        rho_half_known = rho_p - 0.25 * dt * self._drho * u[2]
        force = self._lorentz(n_half_known)

        rhs = np.empty(4 * n, dtype=complex)
        for c in range(3):
            r = (self._rho / dt) * u[c] + 0.5 * self._mu * (self._lap @ u[c])
            r += force[c]
            if c == 2:
                r -= self._g * rho_half_known
            rhs[c * n : (c + 1) * n] = r
        rhs[3 * n :] = 0.0

        sol = self._lu.solve(rhs)
        u_new = np.stack([sol[c * n : (c + 1) * n] for c in range(3)])
        q_half = sol[3 * n :]

        rho_new = rho_p - 0.5 * dt * self._drho * (u[2] + u_new[2])
        n_new = N + 0.5 * dt * (self._induction(u) + self._induction(u_new))
        return LinearState(
            xi=state.xi,
            grid=state.grid,
            t=state.t + dt,
            rho=rho_new,
            u=u_new,
            N=n_new,
            q=q_half,
        )


def evolve(
    init: LinearState,
    profile: DensityProfile,
    mag: MagneticConfig,
    params: PhysicalParams,
    dt: float,
    T: float,
    record_every: int | None = None,
) -> list[LinearState]:
    """Integrate to time T, recording every ``record_every`` steps."""
    stepper = LinearEvolver(profile, mag, params, init.grid, init.xi, dt)
    n_steps = max(1, int(round(T / dt)))
    if record_every is None:
        record_every = max(1, n_steps // 60)
    out = [init.copy()]
    state = init
    for k in range(1, n_steps + 1):
        state = stepper.step(state)
        if k % record_every == 0 or k == n_steps:
            out.append(state)
    return out


def eigenmode_state(
    mode: NormalMode, profile: DensityProfile, params: PhysicalParams
) -> LinearState:
    """Initial data matching the growing mode at t = 0."""
    grid = mode.grid
    h = grid.h
    lam = mode.lam
    M = mode.mag.magnitude
    xi = mode.xi
    u = np.stack(
        [
            -1j * lam * mode.phi.astype(complex),
            -1j * lam * mode.theta.astype(complex),
            lam * mode.psi.astype(complex),
        ]
    )
    rho = -(profile.drho(grid.points()) * mode.psi).astype(complex)
    if M == 0.0:
        N = np.zeros_like(u)
    elif mode.mag.orientation is Orientation.HORIZONTAL:
        N = np.stack(
            [
                (M * xi.xi1) * mode.phi.astype(complex),
                (M * xi.xi1) * mode.theta.astype(complex),
                1j * (M * xi.xi1) * mode.psi.astype(complex),
            ]
        )
    else:
        N = np.stack(
            [
                -1j * M * d1_apply(mode.phi, h).astype(complex),
                -1j * M * d1_apply(mode.theta, h).astype(complex),
                M * d1_apply(mode.psi, h).astype(complex),
            ]
        )
    q = lam * mode.pi.astype(complex)
    return LinearState(xi=xi, grid=grid, t=0.0, rho=rho, u=u, N=N, q=q)


def _random_smooth_compact(grid: Grid1D, rng: np.random.Generator) -> np.ndarray:
    """Random C^inf profile supported inside 80% of the truncated domain."""
    x = grid.points()
    s = x / (0.8 * grid.half_length)
    window = np.zeros_like(x)
    inside = np.abs(s) < 1.0
    window[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    phase = np.pi * (x + grid.half_length) / (2.0 * grid.half_length)
    out = np.zeros(grid.n, dtype=complex)
    for k in range(1, 7):
        a, b = rng.standard_normal(2)
        out += (a + 1j * b) * np.sin(k * phase)
    return window * out


def random_divfree_state(
    profile: DensityProfile,
    grid: Grid1D,
    xi: Frequency,
    seed: int,
) -> LinearState:
    """Random smooth initial data with exact discrete incompressibility.

    u3 is drawn as a smooth compactly supported profile and the horizontal
    components are derived from the potential chi = D1 u3 / |xi|^2, so the
    discrete divergence vanishes identically; an extra swirl term keeps the
    horizontal components generic.  N starts at zero (trivially
    divergence-free), rho is an independent random profile.
    """
    rng = np.random.default_rng(seed)
    h = grid.h
    u3 = _random_smooth_compact(grid, rng)
    beta = _random_smooth_compact(grid, rng)
    chi = d1_apply(u3, h) / xi.norm2
    u1 = 1j * xi.xi1 * chi + 1j * xi.xi2 * beta
    u2 = 1j * xi.xi2 * chi - 1j * xi.xi1 * beta
    rho = _random_smooth_compact(grid, rng)
    u = np.stack([u1, u2, u3])
    return LinearState(
        xi=xi,
        grid=grid,
        t=0.0,
        rho=rho,
        u=u,
        N=np.zeros_like(u),
        q=np.zeros(grid.n, dtype=complex),
    )


@dataclass
class RateEstimate:
    """Least-squares exponential rate over the last half of a norm series."""

    times: np.ndarray
    norms: np.ndarray
    rate: float
    fit_residual: float


def measured_rate(samples: list[tuple[float, float]]) -> RateEstimate:
    """Fit log(norm) ~ a + rate * t on the last 50% of the samples."""
    if len(samples) < 10:
        raise ValueError("need at least 10 samples to fit a rate")
    t = np.array([s[0] for s in samples])
    v = np.array([s[1] for s in samples])
    if np.any(v <= 0.0) or not np.all(np.isfinite(v)):
        raise DegenerateSeries("norm series contains non-positive values")
    half = len(t) // 2
    tt, vv = t[half:], np.log(v[half:])
    coeffs = np.polyfit(tt, vv, 1)
    fit = np.polyval(coeffs, tt)
    rms = float(np.sqrt(np.mean((vv - fit) ** 2)))
    return RateEstimate(times=t, norms=v, rate=float(coeffs[0]), fit_residual=rms)


def run_rate(
    init: LinearState,
    profile: DensityProfile,
    mag: MagneticConfig,
    params: PhysicalParams,
    dt: float,
    T: float,
) -> tuple[RateEstimate, list[LinearState]]:
    states = evolve(init, profile, mag, params, dt, T)
    series = [(s.t, s.norm_u()) for s in states]
    return measured_rate(series), states


def sharpness_test(
    profile: DensityProfile,
    mag: MagneticConfig,
    params: PhysicalParams,
    grid: Grid1D,
    lam_cap: float,
    seeds: list[int],
    xi_rates: dict[Frequency, float],
    horizon: float = 3.0,
    steps_per_efold: int = 100,
) -> float:
    """Evolve random data at each frequency; rates must respect their bounds.

    xi_rates maps each swept member frequency to its predicted rate.  Raises
    SharpnessViolation if any measured rate exceeds lambda(xi) * (1 + 2%).
    Returns the largest measured rate.
    """
    worst = -np.inf
    for xi, lam in sorted(xi_rates.items(), key=lambda kv: (kv[0].xi1, kv[0].xi2)):
        dt = 1.0 / (steps_per_efold * lam)
        T = horizon / lam
        for seed in seeds:
            init = random_divfree_state(profile, grid, xi, seed)
            est, _ = run_rate(init, profile, mag, params, dt, T)
            if est.rate > lam * (1.0 + RATE_SLACK):
                raise SharpnessViolation(
                    f"seed {seed}, xi = ({xi.xi1:g}, {xi.xi2:g}): measured "
                    f"{est.rate:.6g} exceeds bound {lam:.6g} * (1 + {RATE_SLACK})"
                )
            worst = max(worst, est.rate)
    if worst > lam_cap * (1.0 + RATE_SLACK):
        raise SharpnessViolation(
            f"max measured rate {worst:.6g} exceeds the sweep bound {lam_cap:.6g}"
        )
    return float(worst)


def series_to_csv(states: list[LinearState]) -> str:
    lines = ["t,norm_rho,norm_u,norm_N"]
    for s in states:
        lines.append(
            f"{s.t:.17g},{s.norm_rho():.17g},{s.norm_u():.17g},{s.norm_N():.17g}"
        )
    return "\n".join(lines) + "\n"
