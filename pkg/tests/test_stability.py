import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

import trapbasis as tb
from trapbasis.stability import difference_gram

QUARTER_PI = math.pi / 4.0


def _identity_perturbation(profile):
    return tb.CallablePerturbation(fn=lambda n, y: profile(y), label="g = f")


# --- kadec_check ------------------------------------------------------------


def test_unperturbed_family_certifies_with_zero_aggregate(slope_profile):
    report = tb.kadec_check(slope_profile, _identity_perturbation(slope_profile), 6)
    assert report.verdict == "certified"
    assert all(r.epsilon == 0.0 for r in report.rows)
    assert report.aggregate == 0.0
    assert report.lam == 0.0


def test_quarter_shift_family_sits_on_the_boundary(slope_profile):
    report = tb.kadec_check(slope_profile, tb.ingham_family(slope_profile), 5)
    assert report.verdict == "boundary"
    for row in report.rows:
        assert row.epsilon * 4 * abs(row.n) == pytest.approx(1.0, abs=1e-12)
        assert not row.passed
    # the aggregate hits pi/4, so no contraction constant is reported
    assert report.aggregate == pytest.approx(QUARTER_PI, abs=1e-12)
    assert report.lam is None


def test_boundary_verdict_is_profile_independent(unit_profile, slope_profile):
    r1 = tb.kadec_check(unit_profile, tb.ingham_family(unit_profile), 3)
    r2 = tb.kadec_check(slope_profile, tb.ingham_family(slope_profile), 3)
    assert r1.verdict == r2.verdict == "boundary"
    for a, b in zip(r1.rows, r2.rows):
        assert a.epsilon == pytest.approx(b.epsilon, abs=1e-12)


def test_margin_family_certifies_with_known_aggregate(slope_profile):
    pert = tb.MarginPerturbation(slope_profile, 0.9)
    report = tb.kadec_check(slope_profile, pert, 8)
    assert report.verdict == "certified"
    for row in report.rows:
        assert row.epsilon == pytest.approx(0.9 / (4.0 * row.n**2), abs=1e-12)
        assert row.passed
    # sup_n pi n * 0.9/(4 n^2) is attained at |n| = 1
    assert report.aggregate == pytest.approx(0.9 * QUARTER_PI, abs=1e-12)
    assert report.lam == pytest.approx(tb.pw_bound(0.9 * QUARTER_PI), abs=1e-14)


def test_violated_family_reports_violated(slope_profile):
    pert = tb.CallablePerturbation(
        fn=lambda n, y: slope_profile(y) / (1.0 + 0.5 / abs(n)), label="too big"
    )
    report = tb.kadec_check(slope_profile, pert, 3)
    assert report.verdict == "violated"


def test_coarse_grid_detected():
    prof = tb.ProfileFunction.constant(1.0)
    pert = tb.CallablePerturbation(
        fn=lambda n, y: 1.0 / (1.0 + 0.2 * np.sin(np.pi * np.asarray(y)) ** 2),
        label="oscillating",
    )
    with pytest.raises(tb.GridRefinementError):
        tb.kadec_check(prof, pert, 1, grid_size=4)


@given(st.floats(min_value=0.1, max_value=10.0, allow_nan=False))
def test_deviations_are_scale_invariant(scale):
    base = tb.ProfileFunction.from_expression("1+y/2", lower=0.9, upper=1.6)
    scaled = tb.ProfileFunction(
        lambda y: scale * (1 + np.asarray(y) / 2),
        lower=0.9 * scale,
        upper=1.6 * scale,
    )
    p1 = tb.MarginPerturbation(base, 0.7)
    p2 = tb.MarginPerturbation(scaled, 0.7)
    r1 = tb.kadec_check(base, p1, 3, grid_size=128)
    r2 = tb.kadec_check(scaled, p2, 3, grid_size=128)
    for a, b in zip(r1.rows, r2.rows):
        assert a.epsilon == pytest.approx(b.epsilon, rel=1e-12, abs=1e-12)
    assert r1.aggregate == pytest.approx(r2.aggregate, rel=1e-12, abs=1e-12)


# --- pw_bound ----------------------------------------------------------------


def test_contraction_bound_values():
    assert tb.pw_bound(0.0) == 0.0
    # frozen regression value for L = pi/8
    assert tb.pw_bound(math.pi / 8.0) == pytest.approx(0.458803899853803, abs=1e-12)


def test_contraction_bound_limit_is_one():
    # exact trig identity at the open endpoint
    endpoint = 1.0 - math.cos(QUARTER_PI) + math.sin(QUARTER_PI)
    assert endpoint == pytest.approx(1.0, abs=1e-15)
    assert tb.pw_bound(QUARTER_PI - 1e-13) == pytest.approx(1.0, abs=1e-12)


def test_contraction_bound_monotone_on_grid():
    grid = np.linspace(0.0, QUARTER_PI, 1000, endpoint=False)
    vals = [tb.pw_bound(v) for v in grid]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1.0


@pytest.mark.parametrize("bad", [-0.1, QUARTER_PI, 1.0, math.pi])
def test_contraction_bound_rejects_out_of_domain(bad):
    with pytest.raises(ValueError):
        tb.pw_bound(bad)


# --- sharpness family construction --------------------------------------------


def test_ingham_family_values(unit_profile, slope_profile):
    fam = tb.ingham_family(unit_profile)
    y = np.linspace(0, 1, 5)
    assert np.allclose(fam.g(1, y), 4.0 / 3.0)
    # f/g - 1 is the constant -1/(4|n|), independent of y and of the profile
    fam2 = tb.ingham_family(slope_profile)
    ratio = slope_profile(y) / fam2.g(1, y) - 1.0
    assert np.allclose(ratio, -0.25, atol=1e-14)
    ratio3 = slope_profile(y) / fam2.g(-2, y) - 1.0
    assert np.allclose(ratio3, -0.125, atol=1e-14)


# --- difference-family norm bound ----------------------------------------------


def test_trivial_perturbation_has_vanishing_norms(slope_profile):
    result = tb.pw_inequality_test(
        slope_profile, _identity_perturbation(slope_profile), 2, 2, trials=5
    )
    assert result.lam == 0.0
    assert result.max_norm <= 1e-7
    assert result.max_ratio == 0.0
    assert result.ok


def test_single_mode_difference_norm_matches_quadrature_oracle(slope_profile):
    pert = tb.MarginPerturbation(slope_profile, 0.9)
    M = difference_gram(slope_profile, pert, 1, 0, tol=1e-12)
    indices = tb.window_indices(1, 0)
    pos = indices.index((1, 0))
    engine = float(np.real(M[pos, pos]))
    # oracle: (1/2) * int over the rectangle of |1 - exp(i delta x)|^2,
    # delta = pi * 0.9/4 constant in y for this family
    delta = 0.9 * math.pi / 4.0
    oracle, _ = integrate.dblquad(
        lambda x, y: 0.5 * abs(1.0 - np.exp(1j * delta * x)) ** 2,
        0.0,
        1.0,
        -1.0,
        1.0,
    )
    closed = 2.0 - 2.0 * math.sin(delta) / delta
    assert engine == pytest.approx(oracle, abs=1e-9)
    assert engine == pytest.approx(closed, abs=1e-10)


def test_monte_carlo_ratio_below_one(slope_profile):
    pert = tb.MarginPerturbation(slope_profile, 0.9)
    result = tb.pw_inequality_test(slope_profile, pert, 3, 3, trials=40, seed=3)
    assert result.ok
    assert result.max_ratio <= 1.0
    assert np.linalg.norm(result.worst_coefficients) == pytest.approx(1.0, abs=1e-12)


def test_uncertified_family_is_rejected(slope_profile):
    with pytest.raises(tb.DomainError):
        tb.pw_inequality_test(
            slope_profile, tb.ingham_family(slope_profile), 2, 2, trials=1
        )


def test_certified_family_inherits_contraction_bounds(slope_profile):
    pert = tb.MarginPerturbation(slope_profile, 0.9)
    fam = tb.trapezoid_basis(
        tb.Trapezoid(slope_profile), 4, 4, weighted=True, perturbation=pert
    )
    report = tb.gram_matrix(fam)
    lam = tb.pw_bound(0.9 * QUARTER_PI)
    assert report.eigen_min >= (1.0 - lam) ** 2 - 1e-3
    assert report.eigen_max <= (1.0 + lam) ** 2 + 1e-3
