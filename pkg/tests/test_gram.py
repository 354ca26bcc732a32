import math

import numpy as np
import pytest
from scipy import integrate

import trapbasis as tb
from helpers import trapezoid_inner

PI = math.pi


# --- inner products ------------------------------------------------------------


def test_unweighted_self_product_is_the_area(slope_trapezoid):
    fam = tb.trapezoid_basis(slope_trapezoid, 1, 1, weighted=False)
    e = fam.element(1, 0)
    value = tb.inner_product(e, e, slope_trapezoid)
    assert value == pytest.approx(2.5, abs=1e-10)


def test_weighted_rectangle_pair_vanishes_exactly():
    rect = tb.unit_rectangle()
    fam = tb.trapezoid_basis(rect, 2, 2, weighted=True)
    value = tb.inner_product(fam.element(1, 0), fam.element(2, 1), rect)
    assert abs(value) < 1e-12


def test_weighted_slope_pair_vanishes_within_tolerance(slope_trapezoid):
    fam = tb.trapezoid_basis(slope_trapezoid, 2, 0, weighted=True)
    e1, e2 = fam.element(1, 0), fam.element(2, 0)
    value = tb.inner_product(e1, e2, slope_trapezoid, tol=1e-12)
    assert abs(value) < 1e-8
    # independent oracle at doubled resolution
    oracle = trapezoid_inner(e1.evaluate, e2.evaluate, slope_trapezoid.profile, 320, 320)
    assert value == pytest.approx(oracle, abs=1e-8)


def test_inner_product_quadrature_agrees_with_oracle(slope_trapezoid):
    pert = tb.MarginPerturbation(slope_trapezoid.profile, 0.9)
    fam = tb.trapezoid_basis(slope_trapezoid, 2, 2, weighted=True, perturbation=pert)
    e1, e2 = fam.element(2, 1), fam.element(-1, -2)
    value = tb.inner_product(e1, e2, slope_trapezoid, tol=1e-12)
    oracle = trapezoid_inner(e1.evaluate, e2.evaluate, slope_trapezoid.profile, 240, 240)
    assert value == pytest.approx(oracle, abs=1e-9)


def test_inner_product_domain_mismatch_raises(slope_trapezoid):
    fam = tb.trapezoid_basis(slope_trapezoid, 1, 1)
    interval = tb.MultiInterval(((0.0, 1.0),))
    with pytest.raises(tb.DomainError):
        tb.inner_product(fam.element(0, 0), fam.element(0, 0), interval)


# --- gram matrices ----------------------------------------------------------------


def test_rectangle_weighted_gram_is_identity():
    fam = tb.trapezoid_basis(tb.unit_rectangle(), 4, 4, weighted=True)
    report = tb.gram_matrix(fam)
    assert report.identity_defect < 1e-13
    assert report.verdict == "identity_within_tol"
    assert report.quadrature_tolerance == 0.0  # closed-form path


def test_slope_weighted_gram_is_identity_within_tolerance(slope_trapezoid):
    report = tb.gram_matrix(
        tb.trapezoid_basis(slope_trapezoid, 4, 4, weighted=True), tol=1e-9
    )
    assert report.identity_defect < 1e-6
    assert report.verdict == "identity_within_tol"


@pytest.mark.parametrize(
    "expr,lower,upper",
    [("2+sin(pi*y)/3", 1.5, 2.5), ("exp(y)/2", 0.4, 1.4), ("1/(1+y)", 0.4, 1.1)],
)
def test_weighted_gram_identity_for_assorted_profiles(expr, lower, upper):
    prof = tb.ProfileFunction.from_expression(expr, lower=lower, upper=upper)
    fam = tb.trapezoid_basis(tb.Trapezoid(prof), 3, 3, weighted=True)
    report = tb.gram_matrix(fam, tol=1e-9)
    assert report.identity_defect < 1e-6


def test_gram_hermitian_and_psd(slope_trapezoid):
    pert = tb.MarginPerturbation(slope_trapezoid.profile, 0.9)
    for family in (
        tb.trapezoid_basis(slope_trapezoid, 3, 2, weighted=True, perturbation=pert),
        tb.trapezoid_basis(slope_trapezoid, 2, 2, weighted=False),
        tb.spherical_basis(tb.SphericalTrapezoid(slope_trapezoid.profile, 3), 2, 2),
    ):
        report = tb.gram_matrix(family)
        assert report.hermiticity_defect < 1e-12
        assert report.eigen_min >= -1e-10
        assert report.eigen_min <= report.eigen_max


def test_quarter_shift_eigen_min_decreases(unit_profile):
    pert = tb.ingham_family(unit_profile)
    mins = []
    for window in (2, 4, 8):
        fam = tb.trapezoid_basis(
            tb.Trapezoid(unit_profile), window, 1, weighted=True, perturbation=pert
        )
        mins.append(tb.gram_matrix(fam).eigen_min)
    assert mins[0] > mins[1] > mins[2] > 0


def test_nested_truncations_interlace(slope_trapezoid):
    pert = tb.MarginPerturbation(slope_trapezoid.profile, 0.9)
    big = tb.trapezoid_basis(slope_trapezoid, 4, 3, weighted=True, perturbation=pert)
    small = big.restrict(2, 2)
    rb = tb.gram_matrix(big)
    rs = tb.gram_matrix(small)
    assert rb.eigen_min <= rs.eigen_min + 1e-12
    assert rb.eigen_max >= rs.eigen_max - 1e-12


def test_step_profile_dual_path_agreement():
    prof = tb.StepProfile((1.0, 0.5, 0.75)).to_profile()
    fam = tb.trapezoid_basis(tb.Trapezoid(prof), 3, 3, weighted=True)
    closed = tb.gram_matrix(fam, method="closed")
    quad = tb.gram_matrix(fam, method="quadrature", tol=1e-12)
    assert np.max(np.abs(closed.matrix - quad.matrix)) < 1e-10
    # step-profile integrals are elementary, so orthonormality is machine-exact
    assert closed.identity_defect < 1e-13


def test_closed_method_requires_step_profile(slope_trapezoid):
    fam = tb.trapezoid_basis(slope_trapezoid, 1, 1)
    with pytest.raises(tb.DomainError):
        tb.gram_matrix(fam, method="closed")


def test_desk_scale_cap(slope_trapezoid):
    fam = tb.trapezoid_basis(slope_trapezoid, 40, 40)
    with pytest.raises(tb.DomainError):
        tb.gram_matrix(fam)


# --- frame bounds ------------------------------------------------------------------


def test_frame_bounds_of_identity():
    fam = tb.trapezoid_basis(tb.unit_rectangle(), 3, 3, weighted=True)
    report = tb.gram_matrix(fam)
    a, b = tb.frame_bounds(report)
    assert a == pytest.approx(1.0, abs=1e-12)
    assert b == pytest.approx(1.0, abs=1e-12)


def test_restricted_harmonics_upper_bound(slope_trapezoid):
    box = ((-PI, PI), (-PI, PI))
    report = tb.restricted_frame_check(box, slope_trapezoid, 3, trials=8)
    _, b_est = tb.frame_bounds(report.gram)
    assert b_est <= 4 * PI**2 + 1e-6


# --- reconstruction ----------------------------------------------------------------


def test_element_self_reconstruction(slope_trapezoid):
    fam = tb.trapezoid_basis(slope_trapezoid, 3, 3, weighted=True)
    position = len(fam.indices) // 2
    report = tb.reconstruct(tb.ElementTarget(position), fam)
    assert report.relative_residual < 1e-8
    indicator = np.zeros(len(fam.indices))
    indicator[position] = 1.0
    assert np.allclose(report.coefficients, indicator, atol=1e-7)


def test_box_target_residual_decreases(slope_trapezoid):
    target = tb.BoxTarget(-0.5, 0.5, 0.0, 0.5)
    res = {}
    for window in (4, 8):
        fam = tb.trapezoid_basis(slope_trapezoid, window, window, weighted=True)
        res[window] = tb.reconstruct(target, fam).relative_residual
    assert res[8] < res[4]


def test_reconstruct_refuses_ill_conditioned():
    interval = tb.MultiInterval(((0.0, 1.0),))
    fam = tb.MultiIntervalFamily(interval, (0, 1), (0.0, 1e-9))
    with pytest.raises(tb.IllConditionedError):
        tb.reconstruct(tb.ElementTarget(0), fam)


def test_multirect_constant_target_is_in_the_span():
    step = tb.StepProfile((1.0, 0.5))
    interval = tb.build_multiinterval(step)
    selection = tb.search_interval_basis(interval, 8, 50.0, half_width=2.0)
    build = tb.build_multirect_basis(step, selection, 1)
    target = tb.BoxTarget(-2.0, 2.0, 0.0, 1.0)  # constant one on the region
    report = tb.reconstruct(target, build.family)
    assert report.relative_residual < 1e-9


def test_multirect_box_moments_match_sinc_products():
    step = tb.StepProfile((1.0, 0.5))
    interval = tb.build_multiinterval(step)
    selection = tb.search_interval_basis(interval, 4, 50.0, half_width=2.0)
    build = tb.build_multirect_basis(step, selection, 1)
    family = build.family
    target = tb.BoxTarget(-0.25, 0.75, 0.0, 1.0)
    moments = tb.gram.target_moments(target, family)
    for pos in (0, len(family.entries) // 2):
        elem = family.element(pos)
        manual = 0.0 + 0.0j
        for c, b in enumerate(step.values):
            xlo, xhi = max(-0.25, -b), min(0.75, b)
            ylo, yhi = c / 2.0, (c + 1) / 2.0
            ix, _ = integrate.quad(
                lambda x: np.cos(elem.omega_x * x), xlo, xhi, limit=200
            )
            ix_im, _ = integrate.quad(
                lambda x: -np.sin(elem.omega_x * x), xlo, xhi, limit=200
            )
            iy, _ = integrate.quad(
                lambda y: np.cos(elem.omega_y * y), ylo, yhi, limit=200
            )
            iy_im, _ = integrate.quad(
                lambda y: -np.sin(elem.omega_y * y), ylo, yhi, limit=200
            )
            manual += (ix + 1j * ix_im) * (iy + 1j * iy_im)
        manual *= elem.amplitude
        assert moments[pos] == pytest.approx(manual, abs=1e-10)


def test_multirect_offcenter_residual_decreases():
    step = tb.StepProfile((1.0, 0.5))
    interval = tb.build_multiinterval(step)
    residuals = []
    for window in (4, 8):
        selection = tb.search_interval_basis(interval, window, 80.0, half_width=2.0)
        build = tb.build_multirect_basis(step, selection, 1)
        target = tb.BoxTarget(-0.25, 0.75, 0.0, 0.4)
        residuals.append(tb.reconstruct(target, build.family).relative_residual)
    assert residuals[1] < residuals[0]


# --- restricted frame probe -----------------------------------------------------------


def test_box_domain_gives_tight_ratios():
    box = ((-PI, PI), (-PI, PI))
    report = tb.restricted_frame_check(box, None, 4, trials=12, seed=5)
    assert report.tight_constant == pytest.approx(4 * PI**2)
    assert report.min_ratio == pytest.approx(report.tight_constant, abs=1e-9)
    assert report.max_ratio == pytest.approx(report.tight_constant, abs=1e-9)


def test_trapezoid_domain_ratios_within_tight_bound(slope_trapezoid):
    box = ((-PI, PI), (-PI, PI))
    report = tb.restricted_frame_check(box, slope_trapezoid, 3, trials=24, seed=2)
    assert report.min_ratio > 0.0
    assert report.max_ratio <= report.tight_constant + 1e-6


def test_indicator_ratio_matches_plancherel_sum(slope_trapezoid):
    box = ((-PI, PI), (-PI, PI))
    trunc = 3
    report = tb.restricted_frame_check(box, slope_trapezoid, trunc, trials=4)
    K = report.gram.matrix
    fam = tb.BoxHarmonicsFamily(box, trunc, trunc, restricted_to=slope_trapezoid)
    zero_pos = fam.indices.index((0, 0))
    ratio = float(
        np.linalg.norm(K[:, zero_pos]) ** 2 / np.real(K[zero_pos, zero_pos])
    )
    # independent route: scipy quadrature of the indicator's pairings
    prof = slope_trapezoid.profile
    total = 0.0
    for n in range(-trunc, trunc + 1):
        for m in range(-trunc, trunc + 1):
            re, _ = integrate.quad(
                lambda y: (
                    2 * prof(y) if n == 0 else 2 * np.sin(n * prof(y)) / n
                )
                * np.cos(m * y),
                0.0,
                1.0,
                limit=200,
            )
            im, _ = integrate.quad(
                lambda y: (
                    2 * prof(y) if n == 0 else 2 * np.sin(n * prof(y)) / n
                )
                * (-np.sin(m * y)),
                0.0,
                1.0,
                limit=200,
            )
            total += re**2 + im**2
    area, _ = integrate.quad(lambda y: 2 * prof(y), 0.0, 1.0)
    assert ratio == pytest.approx(total / area, rel=1e-7)


def test_probe_window_validation(slope_trapezoid):
    box = ((-PI, PI), (-PI, PI))
    with pytest.raises(tb.DomainError):
        tb.restricted_frame_check(box, slope_trapezoid, 2, probe_window=3)


def test_trapezoid_must_fit_in_box(slope_trapezoid):
    with pytest.raises(tb.DomainError):
        tb.restricted_frame_check(((-1.0, 1.0), (-1.0, 1.0)), slope_trapezoid, 2)


# --- matrix export ----------------------------------------------------------------


def _hermitian(dim, seed=11):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (a + a.conj().T)


def test_csv_round_trip(tmp_path):
    m = _hermitian(5)
    path = tmp_path / "m.csv"
    tb.write_gram_csv(m, path)
    back = tb.read_gram_csv(path)
    assert np.allclose(back, m, atol=0)


def test_binary_round_trip(tmp_path):
    m = _hermitian(6)
    path = tmp_path / "m.gram"
    tb.write_gram_binary(m, path)
    back, flags = tb.read_gram_binary(path)
    assert flags == 1
    assert back.shape == m.shape
    assert np.allclose(back, m, atol=1e-6)  # complex64 payload
    raw = path.read_bytes()
    assert raw[:4] == b"GRAM"
    assert len(raw) == 16 + 6 * 6 * 8


def test_binary_rejects_garbage(tmp_path):
    path = tmp_path / "junk.gram"
    path.write_bytes(b"JUNKxxxxxxxxxxxx")
    with pytest.raises(tb.DomainError):
        tb.read_gram_binary(path)
