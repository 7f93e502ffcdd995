"""Smallest eigenvalue of a symmetric banded pencil (A, B), B positive definite.

Strategy: Sylvester inertia counts from unpivoted banded LDL^T factorizations
of A - sigma*B drive a bisection that isolates the smallest pencil eigenvalue,
then a few inverse-iteration steps polish the eigenpair.  Zero pivots are
handled by perturbing the shift and retrying a bounded number of times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import FactorizationBreakdown
from .operators import band_combine, band_matvec, band_to_lu

__all__ = ["EigenPair", "inertia_count", "min_generalized_eig", "max_generalized_eig"]

_INVERSE_STEPS = 5
_RESIDUAL_TOL = 1e-8


def _ldlt_negative_count(w: np.ndarray, p: int) -> int:
    """Negative pivots of the in-place banded LDL^T; -1 flags a zero pivot."""
    n = w.shape[1]
    neg = 0
    for j in range(n):
        d = w[0, j]
        if d == 0.0:
            return -1
        if d < 0.0:
            neg += 1
        m = min(p, n - 1 - j)
        for b in range(1, m + 1):
            wb = w[b, j] / d
            for a in range(b, m + 1):
                w[a - b, j + b] -= wb * w[a, j]
    return neg


try:  # optional JIT; the pure-Python kernel stays the reference implementation
    from numba import njit

    _ldlt_negative_count_jit = njit(cache=True)(_ldlt_negative_count)
except ImportError:  # pragma: no cover - exercised only without numba
    _ldlt_negative_count_jit = _ldlt_negative_count


def _band_scale(ab: np.ndarray) -> float:
    return float(np.max(np.abs(ab))) if ab.size else 1.0


def _count_at(a: np.ndarray, b: np.ndarray, sigma: float) -> int:
    """Inertia count with bounded shift perturbation on pivot breakdown."""
    p = max(a.shape[0], b.shape[0]) - 1
    scale = max(1.0, abs(sigma))
    eps = 1e-14
    for _ in range(5):
        w = band_combine([(1.0, a), (-sigma, b)])
        c = _ldlt_negative_count_jit(w, p)
        if c >= 0:
            return c
        sigma += eps * scale
        eps *= 100.0
    raise FactorizationBreakdown(
        f"banded LDL^T kept hitting zero pivots near shift {sigma:.6g}"
    )


def inertia_count(a: np.ndarray, b: np.ndarray, sigma: float) -> int:
    """Number of pencil eigenvalues strictly below sigma."""
    return _count_at(a, b, sigma)


@dataclass
class EigenPair:
    """Eigenvalue, B-normalized eigenvector, residual, and iteration count.

    value_tol is the first-order bound |r| |psi| on the eigenvalue error
    implied by the residual; it is the certification floor for any decision
    that compares eigenvalues from separate solves.
    """

    value: float
    vec: np.ndarray
    residual: float
    iterations: int
    value_tol: float = 0.0


def _expand_bracket(
    a: np.ndarray, b: np.ndarray, lo: float, hi: float
) -> tuple[float, float, int]:
    """Grow [lo, hi] until count(lo) == 0 and count(hi) >= 1."""
    iters = 0
    span = max(1.0, abs(lo), abs(hi))
    while _count_at(a, b, lo) > 0:
        iters += 1
        lo -= span
        span *= 4.0
        if iters > 200:
            raise FactorizationBreakdown("could not bracket the smallest eigenvalue")
    span = max(1.0, abs(lo), abs(hi))
    while _count_at(a, b, hi) < 1:
        iters += 1
        hi += span
        span *= 4.0
        if iters > 200:
            raise FactorizationBreakdown("could not bracket the smallest eigenvalue")
    return lo, hi, iters


def _solve_shifted(
    a: np.ndarray, b: np.ndarray, sigma: float, rhs: np.ndarray
) -> np.ndarray:
    shifted = band_combine([(1.0, a), (-sigma, b)])
    l_and_u, full = band_to_lu(shifted)
    return solve_banded(l_and_u, full, rhs)


def min_generalized_eig(
    a: np.ndarray,
    b: np.ndarray,
    tol: float = 1e-10,
    bracket: tuple[float, float] | None = None,
) -> EigenPair:
    """Smallest alpha with A psi = alpha B psi; psi normalized to psi^T B psi = 1."""
    n = a.shape[1]
    if bracket is not None:
        lo, hi = bracket
    else:
        guess = _band_scale(a) / max(np.min(b[0]), 1e-300)
        lo, hi = -max(1.0, guess), max(1.0, guess)
    lo, hi, iters = _expand_bracket(a, b, lo, hi)

    while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        iters += 1
        if _count_at(a, b, mid) >= 1:
            hi = mid
        else:
            lo = mid

    # Inverse iteration from the bracket midpoint; the shift is within tol of
    # the eigenvalue so a handful of steps reaches the residual floor.  The
    # acceptable floor scales with the matvec roundoff eps*|A|*|x|/|Bx|, which
    # dominates 1e-8 once the forms carry 1/h^3-sized fourth-order entries.
    shift = 0.5 * (lo + hi)
    x = np.ones(n) / np.sqrt(n)
    residual = np.inf
    value = shift
    floor = _RESIDUAL_TOL
    for _ in range(3):
        try:
            for _ in range(_INVERSE_STEPS):
                y = _solve_shifted(a, b, shift, band_matvec(b, x))
                iters += 1
                s = float(y @ band_matvec(b, y))
                if not np.isfinite(s) or s <= 0.0:
                    raise np.linalg.LinAlgError("inverse iteration lost positivity")
                x = y / np.sqrt(s)
        except (np.linalg.LinAlgError, ValueError):
            shift -= max(tol, abs(shift) * 1e-12)
            continue
        bx = band_matvec(b, x)
        value = float(x @ band_matvec(a, x)) / float(x @ bx)
        shifted = band_combine([(1.0, a), (-value, b)])
        norm_bx = float(np.linalg.norm(bx))
        residual = float(np.linalg.norm(band_matvec(shifted, x))) / norm_bx
        floor = max(
            _RESIDUAL_TOL,
            256.0
            * np.finfo(float).eps
            * _band_scale(shifted)
            * float(np.linalg.norm(x))
            / norm_bx,
        )
        if residual <= floor:
            break
        shift = value  # Rayleigh-shift retry
    if residual > floor:
        raise FactorizationBreakdown(
            f"inverse iteration stalled at residual {residual:.3g}"
        )

    k = int(np.argmax(np.abs(x)))
    if x[k] < 0:
        x = -x
    value_tol = residual * float(np.linalg.norm(band_matvec(b, x))) * float(
        np.linalg.norm(x)
    )
    return EigenPair(
        value=value, vec=x, residual=residual, iterations=iters, value_tol=value_tol
    )


def max_generalized_eig(
    a: np.ndarray,
    b: np.ndarray,
    tol: float = 1e-10,
    bracket: tuple[float, float] | None = None,
) -> EigenPair:
    """Largest pencil eigenvalue, via the smallest eigenvalue of (-A, B)."""
    neg = None
    if bracket is not None:
        neg = (-bracket[1], -bracket[0])
    pair = min_generalized_eig(band_combine([(-1.0, a)]), b, tol=tol, bracket=neg)
    pair.value = -pair.value
    return pair
