import numpy as np
import pytest

import rtmhd
from rtmhd.operators import (
    DiffOps,
    band_matvec,
    band_to_dense,
    band_to_lu,
    composite_gram_band,
    d1_gram_band,
    d2_gram_band,
    grad_stiffness_band,
    mass_band,
    stencil_gram,
    gradient_stencil,
)

from .oracles import eoc


def _smooth(x):
    # compactly supported C^inf test function
    out = np.zeros_like(x)
    m = np.abs(x) < 2.0
    out[m] = np.exp(-1.0 / (1.0 - (x[m] / 2.0) ** 2)) * np.sin(1.3 * x[m])
    return out


def _smooth_d1(x, eps=1e-6):
    return (_smooth(x + eps) - _smooth(x - eps)) / (2 * eps)


def test_d1_d2_convergence_order():
    errs1, errs2 = [], []
    for n in (400, 800):
        grid = rtmhd.Grid1D(4.0, n)
        ops = DiffOps(grid)
        x = grid.points()
        f = _smooth(x)
        d1_exact = _smooth_d1(x)
        d2_exact = (_smooth(x + 1e-4) - 2 * _smooth(x) + _smooth(x - 1e-4)) / 1e-8
        errs1.append(np.max(np.abs(ops.d1(f) - d1_exact)))
        errs2.append(np.max(np.abs(ops.d2(f) - d2_exact)))
    assert 1.8 <= eoc(errs1[0], errs1[1]) <= 2.2
    assert 1.8 <= eoc(errs2[0], errs2[1]) <= 2.2


def test_d1_free_second_order_at_ends():
    errs = []
    for n in (400, 800):
        grid = rtmhd.Grid1D(4.0, n)
        ops = DiffOps(grid)
        x = grid.points()
        f = np.cos(0.7 * x)  # nonzero at the boundary
        exact = -0.7 * np.sin(0.7 * x)
        errs.append(np.max(np.abs(ops.d1_free(f) - exact)))
    assert 1.8 <= eoc(errs[0], errs[1]) <= 2.2


def test_gram_products_match_dense_einsum():
    grid = rtmhd.Grid1D(3.0, 23)
    rng = np.random.default_rng(7)
    st = gradient_stencil(grid)
    w = rng.uniform(0.5, 2.0, st.n_rows)
    gram = stencil_gram(st, w)
    # dense comparison
    op = np.zeros((st.n_rows, grid.n))
    for o, c in zip(st.offsets, st.coeffs):
        for k in range(st.n_rows):
            col = k + o
            if 0 <= col < grid.n:
                op[k, col] = c[k]
    dense = op.T @ np.diag(w) @ op
    assert np.allclose(band_to_dense(gram), dense, atol=1e-14)


@pytest.mark.parametrize(
    "builder",
    [
        lambda g: grad_stiffness_band(g),
        lambda g: d1_gram_band(g),
        lambda g: d2_gram_band(g),
        lambda g: composite_gram_band(g, 1.7),
        lambda g: mass_band(g, 2.2),
    ],
)
def test_gram_forms_are_psd_and_symmetric(builder):
    grid = rtmhd.Grid1D(3.0, 41)
    ab = builder(grid)
    dense = band_to_dense(ab)
    assert np.array_equal(dense, dense.T)
    w = np.linalg.eigvalsh(dense)
    assert w.min() >= -1e-10 * max(1.0, abs(w).max())


def test_band_matvec_and_lu_layout():
    rng = np.random.default_rng(3)
    ab = rng.standard_normal((3, 17))
    x = rng.standard_normal(17)
    dense = band_to_dense(ab)
    assert np.allclose(band_matvec(ab, x), dense @ x, atol=1e-13)
    (kl, ku), full = band_to_lu(ab)
    rebuilt = np.zeros_like(dense)
    n = 17
    for i in range(n):
        for j in range(n):
            if abs(i - j) <= kl:
                rebuilt[i, j] = full[ku + i - j, j]
    assert np.allclose(rebuilt, dense, atol=0)


def test_quadratic_forms_converge_to_integrals():
    vals = []
    for n in (500, 1000, 2000):
        grid = rtmhd.Grid1D(4.0, n)
        x = grid.points()
        f = _smooth(x)
        vals.append(f @ band_matvec(grad_stiffness_band(grid), f))
    # Richardson check: second-order convergence toward a limit
    e1 = abs(vals[1] - vals[2])
    e0 = abs(vals[0] - vals[1])
    assert 1.8 <= eoc(e0, e1) <= 2.2
