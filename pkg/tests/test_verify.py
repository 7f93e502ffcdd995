import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import rtmhd
from rtmhd.errors import DegenerateSeries, SharpnessViolation
from rtmhd.forms import assemble_forms
from rtmhd.growth import growth_rate
from rtmhd.modes import build_mode
from rtmhd.verify import (
    LinearState,
    eigenmode_state,
    evolve,
    measured_rate,
    random_divfree_state,
    run_rate,
    sharpness_test,
    series_to_csv,
)

from .conftest import CANON_PARAMS, CANON_SPEC

H = rtmhd.Orientation.HORIZONTAL
V = rtmhd.Orientation.VERTICAL
GRID = rtmhd.Grid1D(8.0, 801)


@pytest.fixture(scope="module")
def setup_horizontal():
    prof = rtmhd.build_profile(CANON_SPEC, GRID)
    mag = rtmhd.MagneticConfig(H, 0.3)
    xi = rtmhd.Frequency(1.0, 0.0)
    forms = assemble_forms(prof, GRID, xi, mag, CANON_PARAMS)
    res = growth_rate(forms)
    mode = build_mode(res, mag, CANON_PARAMS, prof, GRID, mode_tol=1e-3)
    return prof, mag, mode, res


@pytest.fixture(scope="module")
def setup_vertical():
    prof = rtmhd.build_profile(CANON_SPEC, GRID)
    mag = rtmhd.MagneticConfig(V, 0.3)
    xi = rtmhd.Frequency(1.0, 0.0)
    forms = assemble_forms(prof, GRID, xi, mag, CANON_PARAMS)
    res = growth_rate(forms)
    mode = build_mode(res, mag, CANON_PARAMS, prof, GRID, mode_tol=1e-3)
    return prof, mag, mode, res


def test_zero_initial_state_stays_zero(setup_horizontal):
    prof, mag, mode, _ = setup_horizontal
    n = GRID.n
    zero = LinearState(
        xi=mode.xi, grid=GRID, t=0.0,
        rho=np.zeros(n, complex), u=np.zeros((3, n), complex),
        N=np.zeros((3, n), complex), q=np.zeros(n, complex),
    )
    states = evolve(zero, prof, mag, CANON_PARAMS, dt=0.05, T=1.0)
    assert states[-1].norm_u() == 0.0
    assert states[-1].norm_rho() == 0.0
    assert states[-1].norm_N() == 0.0


@pytest.mark.parametrize("which", ["horizontal", "vertical"])
def test_eigenmode_growth_rate_reproduced(which, setup_horizontal, setup_vertical):
    prof, mag, mode, res = setup_horizontal if which == "horizontal" else setup_vertical
    lam = res.lam
    init = eigenmode_state(mode, prof, CANON_PARAMS)
    est, states = run_rate(init, prof, mag, CANON_PARAMS, dt=0.01 / lam, T=3.0 / lam)
    assert abs(est.rate - lam) / lam <= 0.02
    assert est.fit_residual <= 1e-3
    ratio = states[-1].norm_u() / states[0].norm_u()
    assert ratio == pytest.approx(np.exp(lam * states[-1].t), rel=0.02)


def test_incompressibility_preserved_each_step(setup_horizontal):
    prof, mag, mode, res = setup_horizontal
    init = eigenmode_state(mode, prof, CANON_PARAMS)
    states = evolve(init, prof, mag, CANON_PARAMS, dt=0.05 / res.lam, T=1.0 / res.lam,
                    record_every=1)
    for s in states:
        assert s.divergence_u() <= 1e-10
        assert s.divergence_N() <= 1e-10


def test_single_step_rescale_consistency(setup_horizontal):
    # one step forward then rescaled by exp(-lam dt) returns near the start;
    # the defect is bounded by the dt^2 step error plus the h^2 floor from
    # the mode's spatial discretization mismatch
    prof, mag, mode, res = setup_horizontal
    lam = res.lam
    init = eigenmode_state(mode, prof, CANON_PARAMS)
    dt = 0.1 / lam
    states = evolve(init, prof, mag, CANON_PARAMS, dt=dt, T=dt, record_every=1)
    u1 = states[-1].u * np.exp(-lam * dt)
    defect = np.linalg.norm(u1 - init.u) / np.linalg.norm(init.u)
    assert defect <= 0.01


def test_fixed_horizon_richardson_order(setup_horizontal):
    # floor-free order measurement: successive dt halvings compared against
    # each other at a fixed horizon converge at second order
    prof, mag, mode, res = setup_horizontal
    lam = res.lam
    init = eigenmode_state(mode, prof, CANON_PARAMS)
    T = 1.0 / lam
    ends = []
    for fac in (0.2, 0.1, 0.05, 0.025):
        n_steps = int(round(T / (fac / lam)))
        states = evolve(init, prof, mag, CANON_PARAMS, dt=T / n_steps, T=T)
        ends.append(states[-1].u)
    d1 = np.linalg.norm(ends[0] - ends[1])
    d2 = np.linalg.norm(ends[1] - ends[2])
    d3 = np.linalg.norm(ends[2] - ends[3])
    orders = [np.log2(d1 / d2), np.log2(d2 / d3)]
    assert all(1.7 <= o <= 2.3 for o in orders), orders


def test_timestep_convergence_order(setup_horizontal):
    prof, mag, mode, res = setup_horizontal
    lam = res.lam
    init = eigenmode_state(mode, prof, CANON_PARAMS)
    errs = []
    for fac in (0.2, 0.1, 0.05):
        est, _ = run_rate(init, prof, mag, CANON_PARAMS, dt=fac / lam, T=2.0 / lam)
        errs.append(abs(est.rate - lam) / lam)
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((orders >= 1.7) & (orders <= 2.3))


def test_measured_rate_exact_exponential():
    t = np.linspace(0.0, 10.0, 40)
    est = measured_rate(list(zip(t, np.exp(0.7 * t))))
    assert est.rate == pytest.approx(0.7, abs=1e-12)
    assert est.fit_residual <= 1e-12


def test_measured_rate_perturbed_exponential():
    t = np.linspace(0.0, 10.0, 60)
    est = measured_rate(list(zip(t, np.exp(0.7 * t) * (1 + 0.001 * np.sin(t)))))
    assert est.rate == pytest.approx(0.7, abs=2e-3)


@settings(max_examples=20, deadline=None)
@given(rate=st.floats(-1.0, 1.0), scale=st.floats(0.1, 10.0))
def test_measured_rate_property(rate, scale):
    t = np.linspace(0.0, 5.0, 25)
    est = measured_rate(list(zip(t, scale * np.exp(rate * t))))
    assert est.rate == pytest.approx(rate, abs=1e-9)


def test_measured_rate_degenerate_series():
    t = np.linspace(0.0, 1.0, 12)
    v = np.exp(t)
    v[7] = 0.0
    with pytest.raises(DegenerateSeries):
        measured_rate(list(zip(t, v)))
    with pytest.raises(ValueError):
        measured_rate([(0.0, 1.0)] * 5)


def test_random_divfree_state_exact_constraint():
    prof = rtmhd.build_profile(CANON_SPEC, GRID)
    for seed in (0, 1, 2):
        state = random_divfree_state(prof, GRID, rtmhd.Frequency(1.0, 2.0), seed)
        assert state.divergence_u() <= 1e-13
        assert state.divergence_N() == 0.0
        assert state.norm_u() > 0


def test_viscous_decay_without_sources(setup_horizontal):
    # no density perturbation, no vertical velocity, no field: Stokes decay
    prof, _, _, _ = setup_horizontal
    mag0 = rtmhd.MagneticConfig(H, 0.0)
    xi = rtmhd.Frequency(1.0, 0.0)
    state = random_divfree_state(prof, GRID, xi, seed=4)
    state.u[2][:] = 0.0
    state.u[0][:] = 0.0  # keep only the swirl component u2(x3)
    state.rho[:] = 0.0
    states = evolve(state, prof, mag0, CANON_PARAMS, dt=0.02, T=2.0)
    est = measured_rate([(s.t, s.norm_u()) for s in states])
    assert est.rate <= 0.0


def test_generic_data_approaches_dominant_rate(setup_horizontal):
    prof, mag, mode, res = setup_horizontal
    lam = res.lam
    init = random_divfree_state(prof, GRID, mode.xi, seed=7)
    est, _ = run_rate(init, prof, mag, CANON_PARAMS, dt=0.01 / lam, T=4.0 / lam)
    assert est.rate <= lam * 1.02
    assert est.rate >= 0.9 * lam


def test_generic_rate_monotone_in_horizon(setup_horizontal):
    # last-window fits approach the dominant rate from below as T grows
    prof, mag, mode, res = setup_horizontal
    lam = res.lam
    init = random_divfree_state(prof, GRID, mode.xi, seed=11)
    fits = []
    for horizon in (1.5, 3.0, 5.0):
        est, _ = run_rate(
            init, prof, mag, CANON_PARAMS, dt=0.02 / lam, T=horizon / lam
        )
        assert est.rate <= lam * 1.02
        fits.append(est.rate)
    assert fits[0] <= fits[1] + 1e-6 <= fits[2] + 2e-6


def test_sharpness_violation_detected(setup_horizontal):
    prof, mag, mode, res = setup_horizontal
    wrong = {mode.xi: 0.25 * res.lam}  # deliberately too small a bound
    with pytest.raises(SharpnessViolation):
        sharpness_test(
            prof, mag, CANON_PARAMS, GRID, 0.25 * res.lam, seeds=[0], xi_rates=wrong
        )


def test_series_csv(setup_horizontal):
    prof, mag, mode, res = setup_horizontal
    init = eigenmode_state(mode, prof, CANON_PARAMS)
    states = evolve(init, prof, mag, CANON_PARAMS, dt=0.1 / res.lam, T=0.5 / res.lam)
    text = series_to_csv(states)
    lines = text.strip().split("\n")
    assert lines[0] == "t,norm_rho,norm_u,norm_N"
    assert len(lines) == len(states) + 1
