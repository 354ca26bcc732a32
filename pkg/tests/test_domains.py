import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import trapbasis as tb
from helpers import step_scan_oracle


# --- profile validation -----------------------------------------------------


def test_validate_constant_profile():
    prof = tb.ProfileFunction.constant(1.0)
    prof = tb.ProfileFunction(prof.evaluator, lower=0.5, upper=2.0)
    report = tb.validate_profile(prof, 512)
    assert report.ok
    assert report.minimum == pytest.approx(1.0)
    assert report.maximum == pytest.approx(1.0)


def test_validate_slope_profile(slope_profile):
    report = tb.validate_profile(slope_profile, 1024)
    assert report.ok
    assert report.minimum == pytest.approx(1.0)
    assert report.maximum == pytest.approx(1.5)


def test_validate_rejects_nonpositive_profile():
    prof = tb.ProfileFunction(lambda y: np.asarray(y), lower=0.1, upper=1.0)
    with pytest.raises(tb.AdmissibilityError) as err:
        tb.validate_profile(prof, 256)
    report = err.value.report
    assert report.minimum <= 0.0
    # the declared lower bound is violated near y = 0
    assert any(y < 0.1 for y, _ in report.violations)


def test_validate_needs_two_points(slope_profile):
    with pytest.raises(tb.DomainError):
        tb.validate_profile(slope_profile, 1)


def test_profile_rejects_bad_bounds():
    with pytest.raises(tb.AdmissibilityError):
        tb.ProfileFunction(lambda y: np.ones_like(y), lower=0.0, upper=1.0)
    with pytest.raises(tb.AdmissibilityError):
        tb.ProfileFunction(lambda y: np.ones_like(y), lower=2.0, upper=1.0)


def test_profile_from_samples_interpolates():
    prof = tb.ProfileFunction.from_samples([0.0, 0.5, 1.0], [1.0, 2.0, 1.0])
    assert prof(0.25) == pytest.approx(1.5)
    assert prof.lower == pytest.approx(1.0)
    assert prof.upper == pytest.approx(2.0)


def test_profile_from_config_dispatch():
    closed = tb.ProfileFunction.from_config({"kind": "closed_form", "expr": "1+y/2"})
    assert closed(1.0) == pytest.approx(1.5)
    stepped = tb.ProfileFunction.from_config({"kind": "step", "values": [1.0, 0.5]})
    assert stepped(0.75) == pytest.approx(0.5)
    sampled = tb.ProfileFunction.from_config(
        {"kind": "samples", "ys": [0, 1], "fs": [1, 3]}
    )
    assert sampled(0.5) == pytest.approx(2.0)
    with pytest.raises(tb.DomainError):
        tb.ProfileFunction.from_config({"kind": "mystery"})


# --- step profiles ----------------------------------------------------------


def test_step_profile_half_open_convention():
    step = tb.StepProfile((1.0, 0.5, 0.75))
    # left endpoints take the incoming cell's value; y = 1 stays in the last
    assert step(0.0) == 1.0
    assert step(1.0 / 3.0) == 0.5
    assert step(2.0 / 3.0) == 0.75
    assert step(1.0) == 0.75
    assert step(0.5) == 0.5


def test_step_profile_rejects_nonpositive():
    with pytest.raises(tb.DomainError):
        tb.StepProfile((1.0, 0.0))


def test_step_profile_to_profile_records_jumps():
    prof = tb.StepProfile((1.0, 1.0, 0.5)).to_profile()
    assert prof.jumps == (2.0 / 3.0,)
    assert prof.continuity_class == "piecewise_continuous"
    assert prof.step is not None


def test_trapezoid_area(slope_trapezoid):
    assert slope_trapezoid.area == pytest.approx(2.5, abs=1e-12)
    rect = tb.unit_rectangle()
    assert rect.area == pytest.approx(2.0)


# --- step approximation -----------------------------------------------------


def test_approximate_constant_needs_one_cell():
    prof = tb.ProfileFunction.constant(0.7)
    approx = tb.approximate_profile(prof, 5)
    assert approx.partitions == 1
    assert approx.step.values == (0.7,)
    assert approx.sup_inverse_error == 0.0
    assert approx.sup_value_error == 0.0


def test_approximate_slope_matches_scan_oracle(slope_profile):
    expected_n, _, _ = step_scan_oracle(slope_profile, 1)
    approx = tb.approximate_profile(slope_profile, 1)
    assert approx.partitions == expected_n
    assert approx.sup_inverse_error < approx.bound
    assert approx.sup_value_error < approx.bound
    assert approx.scale == pytest.approx(1.5)


def test_approximate_order_eight(slope_profile):
    first = tb.approximate_profile(slope_profile, 1)
    eighth = tb.approximate_profile(slope_profile, 8)
    assert eighth.partitions >= first.partitions
    assert eighth.sup_value_error < 1.0 / 32.0


def test_approximate_errors_shrink_along_doubling_orders(slope_profile):
    sups = [
        tb.approximate_profile(slope_profile, n).sup_value_error
        for n in (1, 2, 4, 8, 16)
    ]
    bounds = [1.0 / (4.0 * n) for n in (1, 2, 4, 8, 16)]
    assert all(s < b for s, b in zip(sups, bounds))
    assert all(a >= b for a, b in zip(sups, sups[1:]))


def test_approximate_aligns_with_declared_jumps():
    prof = tb.StepProfile((1.0, 0.5, 0.75)).to_profile()
    approx = tb.approximate_profile(prof, 2)
    # partitions snap to multiples of the jump denominator
    assert approx.partitions % 3 == 0
    assert approx.sup_inverse_error < approx.bound


def test_approximate_unalignable_jump_raises():
    prof = tb.ProfileFunction(
        lambda y: np.where(np.asarray(y) < 1 / math.pi, 1.0, 2.0),
        lower=1.0,
        upper=2.0,
        jumps=(1 / math.pi,),
    )
    with pytest.raises(tb.ApproximationError):
        tb.approximate_profile(prof, 1)


def test_approximate_partition_cap_raises(slope_profile):
    with pytest.raises(tb.ApproximationError):
        tb.approximate_profile(slope_profile, 16, max_partitions=2)


# --- multi-interval construction ---------------------------------------------


def test_build_multiinterval_single_cell():
    assert tb.build_multiinterval(tb.StepProfile((1.0,))).segments == ((-1.0, 1.0),)


def test_build_multiinterval_two_cells():
    got = tb.build_multiinterval(tb.StepProfile((1.0, 0.5)))
    assert got.segments == ((-1.0, 1.0), (1.5, 2.5))
    assert got.total_length == pytest.approx(3.0)


def test_build_multiinterval_touching_segments():
    got = tb.build_multiinterval(tb.StepProfile((1.0, 1.0, 1.0)))
    assert got.segments == ((-1.0, 1.0), (1.0, 3.0), (3.0, 5.0))


def test_build_multiinterval_rejects_tall_cells():
    with pytest.raises(tb.DomainError):
        tb.build_multiinterval(tb.StepProfile((1.2, 0.5)))


@given(
    st.lists(
        st.floats(min_value=0.05, max_value=1.0, allow_nan=False),
        min_size=1,
        max_size=8,
    )
)
def test_build_multiinterval_properties(values):
    step = tb.StepProfile(tuple(values))
    interval = tb.build_multiinterval(step)
    # disjoint ordered segments totalling twice the value sum
    for (_, b), (a2, _) in zip(interval.segments, interval.segments[1:]):
        assert b <= a2 + 1e-12
    assert interval.total_length == pytest.approx(2.0 * sum(values))
    lo, hi = interval.bounds
    assert lo >= -1.0 - 1e-12
    assert hi <= 2.0 * step.cells - 1.0 + 1e-12


def test_translation_plan_values():
    assert tb.translation_plan(tb.StepProfile((1.0,))) == ((0.0, 0.0),)
    assert tb.translation_plan(tb.StepProfile((1.0, 0.5, 0.25))) == (
        (0.0, 0.0),
        (2.0, -1.0),
        (4.0, -2.0),
    )


def test_translation_plan_tiles_the_interval():
    step = tb.StepProfile((0.8, 0.3, 1.0))
    plan = tb.translation_plan(step)
    interval = tb.build_multiinterval(step)
    for j, ((dx, dy), b) in enumerate(zip(plan, step.values)):
        # unit-height cell (-b, b) x (j, j+1) translated by (dx, dy)
        assert (-b + dx, b + dx) == interval.segments[j]
        assert j + dy == 0.0


# --- other domain types -------------------------------------------------------


def test_multiinterval_validation():
    with pytest.raises(tb.DomainError):
        tb.MultiInterval(((0.0, 0.0),))
    with pytest.raises(tb.DomainError):
        tb.MultiInterval(((0.0, 2.0), (1.0, 3.0)))
    ok = tb.MultiInterval(((0.0, 1.0), (2.0, 2.5)))
    assert ok.total_length == pytest.approx(1.5)
    assert ok.centered_half_width == pytest.approx(1.25)
    assert bool(ok.contains(0.5)) and not bool(ok.contains(1.5))


def test_sphere_measures():
    assert tb.sphere_surface_measure(2) == 1.0
    assert tb.sphere_surface_measure(3) == pytest.approx(2 * math.pi)
    assert tb.sphere_surface_measure(4) == pytest.approx(4 * math.pi)


def test_spherical_trapezoid_validation(slope_profile):
    solid = tb.SphericalTrapezoid(slope_profile, 3)
    assert solid.sphere_measure == pytest.approx(2 * math.pi)
    with pytest.raises(tb.DomainError):
        tb.SphericalTrapezoid(slope_profile, 1)
    with pytest.raises(tb.DomainError):
        tb.SphericalTrapezoid(slope_profile, 3, sphere_measure=5.0)
