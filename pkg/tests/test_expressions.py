import math

import numpy as np
import pytest

from trapbasis.errors import ExpressionError
from trapbasis.expressions import compile_expression


def test_linear_expression_matches_closed_form():
    fn = compile_expression("1+y/2")
    y = np.linspace(0, 1, 11)
    assert np.allclose(fn(y), 1 + y / 2)


def test_functions_and_constants():
    fn = compile_expression("2 + sin(pi*y)/4")
    y = np.array([0.0, 0.5, 1.0])
    assert np.allclose(fn(y), 2 + np.sin(np.pi * y) / 4)


def test_unary_minus_and_nesting():
    fn = compile_expression("-(y - 1) + sqrt(abs(y))")
    y = np.linspace(0, 1, 7)
    assert np.allclose(fn(y), -(y - 1) + np.sqrt(np.abs(y)))


def test_constant_expression_broadcasts():
    fn = compile_expression("2")
    y = np.linspace(0, 1, 5)
    out = fn(y)
    assert out.shape == y.shape
    assert np.all(out == 2.0)


def test_scalar_euler_constant():
    fn = compile_expression("e")
    assert math.isclose(float(fn(np.array([0.3]))[0]), math.e)


@pytest.mark.parametrize(
    "bad",
    [
        "__import__('os')",
        "open('x')",
        "y ** 2",
        "y if y else 1",
        "[1, 2]",
        "unknownfn(y)",
        "x + 1",
        "y.real",
        "lambda t: t",
        "",
        "'text'",
    ],
)
def test_rejects_non_whitelisted_syntax(bad):
    with pytest.raises(ExpressionError):
        compile_expression(bad)
