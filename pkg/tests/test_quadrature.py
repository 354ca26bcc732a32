import numpy as np
import pytest
from scipy import integrate

from trapbasis.errors import QuadratureError
from trapbasis.quadrature import (
    oscillatory_coefficients,
    oscillatory_integral,
    power_exp_integral,
    segment_exp_integral,
    symmetric_exp_integral,
)


def _quad_complex(fn, a, b):
    re, _ = integrate.quad(lambda x: fn(x).real, a, b, limit=400)
    im, _ = integrate.quad(lambda x: fn(x).imag, a, b, limit=400)
    return re + 1j * im


def test_symmetric_kernel_against_quad():
    for theta, a in [(3.7, 0.8), (-12.0, 1.3), (0.4, 2.0)]:
        expected = _quad_complex(lambda x: np.exp(1j * theta * x), -a, a)
        assert symmetric_exp_integral(theta, a) == pytest.approx(expected.real, abs=1e-12)
        assert abs(expected.imag) < 1e-12


def test_symmetric_kernel_zero_limit_and_series_continuity():
    assert symmetric_exp_integral(0.0, 0.7) == pytest.approx(1.4, abs=1e-15)
    # values just across the series switch agree to near machine precision
    a = 1.1
    below = symmetric_exp_integral(0.9e-6 / a, a)
    above = symmetric_exp_integral(1.1e-6 / a, a)
    assert below == pytest.approx(2 * a, rel=1e-12)
    assert above == pytest.approx(2 * a, rel=1e-12)


def test_segment_integral_against_quad():
    for theta, lo, hi in [(5.3, -0.4, 1.7), (-2.2, 0.1, 0.2), (0.0, -1.0, 3.0)]:
        expected = _quad_complex(lambda x: np.exp(1j * theta * x), lo, hi)
        got = complex(segment_exp_integral(theta, lo, hi))
        assert got == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("power", [0, 1, 2, 3])
def test_power_integral_against_quad(power):
    for theta, a in [(7.3, 0.9), (0.0, 1.4), (1e-5, 1.2), (-4.4, 0.5)]:
        expected = _quad_complex(lambda r: r**power * np.exp(1j * theta * r), 0.0, a)
        got = complex(power_exp_integral(theta, a, power))
        assert got == pytest.approx(expected, abs=1e-12)


def test_power_integral_rejects_negative_power():
    with pytest.raises(ValueError):
        power_exp_integral(1.0, 1.0, -1)


def test_oscillatory_batch_against_quad():
    density = lambda y: 1.0 / (1.0 + 0.5 * y)
    deltas = [0.0, 2 * np.pi, -6 * np.pi, 30.0]
    values = oscillatory_coefficients(density, deltas, tol=1e-12)
    for d, v in zip(deltas, values):
        expected = _quad_complex(lambda y: density(y) * np.exp(1j * d * y), 0.0, 1.0)
        assert complex(v) == pytest.approx(expected, abs=1e-10)


def test_oscillatory_respects_custom_interval():
    val = oscillatory_integral(lambda y: np.ones_like(y), 0.0, y0=0.25, y1=0.75)
    assert val == pytest.approx(0.5, abs=1e-13)


def test_oscillatory_nonconvergence_reports_estimate():
    # |y - 1/pi|^{-1/3} is integrable but rough; one refinement cannot settle
    density = lambda y: np.abs(y - 1.0 / np.pi) ** (-1.0 / 3.0)
    with pytest.raises(QuadratureError) as err:
        oscillatory_coefficients(density, [0.0], tol=1e-14, max_refinements=3)
    assert err.value.estimate is not None and err.value.estimate > 0


def test_panel_multiple_alignment_handles_discontinuity():
    # step density integrates exactly once panels align with the jump
    density = lambda y: np.where(y < 1.0 / 3.0, 1.0, 2.0)
    val = oscillatory_coefficients(density, [0.0], tol=1e-12, panel_multiple=3)[0]
    assert complex(val) == pytest.approx(1.0 / 3.0 + 2.0 * 2.0 / 3.0, abs=1e-14)
