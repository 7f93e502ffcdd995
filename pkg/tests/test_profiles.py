import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import rtmhd
from rtmhd.errors import NonPositiveDensity, NoUnstableRegion
from rtmhd.profiles import BUMP_INTEGRAL

from .oracles import adaptive_bump_integral

GRID = rtmhd.Grid1D(8.0, 401)

# integral of exp(-1/(1-t^2)) over [-1,1]; frozen from an adaptive-quadrature
# oracle (30-digit value 0.443993816168079437823048921171)
BUMP_INTEGRAL_ORACLE = 0.44399381616807944


def test_bump_integral_matches_adaptive_quadrature():
    assert BUMP_INTEGRAL == pytest.approx(BUMP_INTEGRAL_ORACLE, abs=1e-15)
    assert adaptive_bump_integral(1.0, 1.0) == pytest.approx(BUMP_INTEGRAL, rel=1e-12)


def test_single_positive_bump_jump():
    spec = rtmhd.ProfileSpec(1.0, (rtmhd.Bump(0.7, 0.0, 1.0),))
    prof = rtmhd.build_profile(spec, GRID)
    assert prof.total_jump > 0
    assert prof.total_jump == pytest.approx(0.7 * 1.0 * BUMP_INTEGRAL_ORACLE, rel=1e-13)


def test_signed_bump_sum_negative_jump():
    a = 0.4
    spec = rtmhd.ProfileSpec(
        5.0, (rtmhd.Bump(a, 1.0, 0.5), rtmhd.Bump(-3 * a, -1.0, 0.5))
    )
    prof = rtmhd.build_profile(spec, GRID)
    assert prof.total_jump < 0
    assert prof.inf_rho > 0


def test_large_negative_bump_rejected():
    spec = rtmhd.ProfileSpec(0.1, (rtmhd.Bump(0.1, 1.5, 0.5), rtmhd.Bump(-5.0, 0.0, 1.0)))
    with pytest.raises(NonPositiveDensity):
        rtmhd.build_profile(spec, GRID)


def test_no_positive_bump_rejected():
    spec = rtmhd.ProfileSpec(1.0, (rtmhd.Bump(-0.2, 0.0, 1.0),))
    with pytest.raises(NoUnstableRegion):
        rtmhd.build_profile(spec, GRID)


def test_mirror_symmetric_bumps_cancel():
    spec = rtmhd.ProfileSpec(
        2.0, (rtmhd.Bump(0.5, -1.0, 0.6), rtmhd.Bump(-0.5, 1.0, 0.6))
    )
    prof = rtmhd.build_profile(spec, GRID)
    assert prof.total_jump == pytest.approx(0.0, abs=1e-15)


def test_jump_scales_linearly_with_amplitudes():
    base = rtmhd.ProfileSpec(3.0, (rtmhd.Bump(0.5, 1.0, 0.5), rtmhd.Bump(-0.2, -1.0, 0.7)))
    c = 1.73
    scaled = rtmhd.ProfileSpec(
        3.0,
        tuple(rtmhd.Bump(c * b.amplitude, b.center, b.half_width) for b in base.bumps),
    )
    p1 = rtmhd.build_profile(base, GRID)
    p2 = rtmhd.build_profile(scaled, GRID)
    assert p2.total_jump == pytest.approx(c * p1.total_jump, rel=1e-14)


def test_derivative_compact_support_exact_zero():
    spec = rtmhd.ProfileSpec(1.0, (rtmhd.Bump(0.5, 0.3, 1.2),))
    prof = rtmhd.build_profile(spec, GRID)
    outside = np.array([-8.0, -1.0, 1.5001, 3.0, 7.9])
    assert np.all(prof.drho(outside) == 0.0)
    inside = np.linspace(-0.89, 1.49, 64)
    assert np.all(prof.drho(inside) > 0.0)


def test_cumulative_consistency_with_jump():
    spec = rtmhd.ProfileSpec(1.0, (rtmhd.Bump(0.5, 0.0, 1.0), rtmhd.Bump(-0.1, 1.5, 0.4)))
    prof = rtmhd.build_profile(spec, GRID)
    lz = GRID.half_length
    delta = prof.rho(np.array([lz]))[0] - prof.rho(np.array([-lz]))[0]
    assert delta == pytest.approx(prof.total_jump, rel=1e-12)


def test_density_positive_everywhere_sampled(canon_profile):
    x = np.linspace(-8, 8, 4001)
    assert np.all(canon_profile.rho(x) >= canon_profile.inf_rho - 1e-14)
    assert canon_profile.inf_rho > 0


def test_sup_ratio_dominates_grid_samples(canon_profile):
    x = np.linspace(-8, 8, 20011)
    ratios = canon_profile.ratio(x)
    assert canon_profile.sup_ratio >= ratios.max() - 1e-13
    assert canon_profile.sup_ratio > 0


def test_metrics_dict(canon_profile):
    m = rtmhd.profile_metrics(canon_profile)
    assert set(m) == {"total_jump", "sup_ratio", "inf_rho", "sup_rho"}
    assert m["sup_rho"] >= m["inf_rho"] > 0


def test_support_must_leave_decay_region():
    spec = rtmhd.ProfileSpec(1.0, (rtmhd.Bump(0.5, 0.0, 4.5),))
    with pytest.raises(ValueError):
        rtmhd.build_profile(spec, GRID)  # support exceeds [-Lz/2, Lz/2]


def test_spec_serialization_exact_roundtrip():
    spec = rtmhd.ProfileSpec(
        1.7182818284590452,
        (rtmhd.Bump(0.12345678901234567, -1.1, 0.9876543210987654),),
    )
    text = json.dumps(spec.to_dict())
    back = rtmhd.ProfileSpec.from_dict(json.loads(text))
    assert back == spec


@settings(max_examples=25, deadline=None)
@given(
    base=st.floats(0.5, 10.0),
    amp=st.floats(0.01, 1.0),
    center=st.floats(-2.0, 2.0),
    width=st.floats(0.2, 1.5),
)
def test_profile_invariants_hold_for_random_specs(base, amp, center, width):
    spec = rtmhd.ProfileSpec(base, (rtmhd.Bump(amp, center, width),))
    prof = rtmhd.build_profile(spec, GRID)
    assert prof.total_jump == pytest.approx(amp * width * BUMP_INTEGRAL, rel=1e-12)
    assert prof.inf_rho >= base - 1e-12
    assert prof.sup_ratio > 0
    lo, hi = prof.support
    assert lo == pytest.approx(center - width) and hi == pytest.approx(center + width)
