"""Whitelisted closed-form expressions for profile configs.

Configs may declare a boundary profile as ``{"kind": "closed_form",
"expr": "1+y/2"}``.  The grammar is deliberately tiny: numeric literals, the
variable ``y``, the constants ``pi`` and ``e``, the four arithmetic
operators, unary minus, and a handful of analytic functions.  Everything is
compiled to a vectorized numpy callable; anything outside the whitelist is
rejected up front, so configs can never execute arbitrary code.
"""

from __future__ import annotations

import ast
import math
from typing import Callable

import numpy as np

from .errors import ExpressionError

_FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}

_CONSTANTS = {"pi": math.pi, "e": math.e}

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
}


def _evaluate(node: ast.AST, y: np.ndarray):
    if isinstance(node, ast.Expression):
        return _evaluate(node.body, y)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        raise ExpressionError(f"non-numeric literal {node.value!r}")
    if isinstance(node, ast.Name):
        if node.id == "y":
            return y
        if node.id in _CONSTANTS:
            return _CONSTANTS[node.id]
        raise ExpressionError(f"unknown name {node.id!r}")
    if isinstance(node, ast.BinOp):
        op = _BINOPS.get(type(node.op))
        if op is None:
            raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
        return op(_evaluate(node.left, y), _evaluate(node.right, y))
    if isinstance(node, ast.UnaryOp):
        if isinstance(node.op, ast.USub):
            return np.negative(_evaluate(node.operand, y))
        if isinstance(node.op, ast.UAdd):
            return _evaluate(node.operand, y)
        raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
            raise ExpressionError("only whitelisted function calls are allowed")
        if len(node.args) != 1 or node.keywords:
            raise ExpressionError(f"{node.func.id} takes exactly one argument")
        return _FUNCTIONS[node.func.id](_evaluate(node.args[0], y))
    raise ExpressionError(f"syntax element {type(node).__name__} not allowed")


def compile_expression(text: str) -> Callable[[np.ndarray], np.ndarray]:
    """Compile ``text`` into a vectorized function of ``y``."""
    if not isinstance(text, str) or not text.strip():
        raise ExpressionError("expression must be a nonempty string")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from exc
    # Validate once on a probe so bad expressions fail at compile time.
    probe = np.array([0.25, 0.75])
    _evaluate(tree, probe)

    def evaluator(y):
        arr = np.asarray(y, dtype=float)
        value = _evaluate(tree, arr)
        return np.broadcast_to(np.asarray(value, dtype=float), arr.shape).copy()

    evaluator.__doc__ = f"closed-form profile {text!r}"
    return evaluator
