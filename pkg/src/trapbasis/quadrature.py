"""Closed-form exponential integrals and adaptive oscillatory quadrature.

The Gram assembly for every domain in this package reduces to one of two
primitives:

* exact antiderivatives of ``x^p * exp(i*theta*x)`` over an interval, with a
  series branch near ``theta = 0`` to avoid catastrophic cancellation, and
* an outer one-dimensional integral of a smooth density against
  ``exp(i*delta*y)`` for a whole batch of modulation frequencies ``delta``,
  evaluated by composite Gauss-Legendre panels that double until the batch
  converges.

Panel counts are seeded from an oscillation estimate (roughly one panel per
cycle) so refinement usually terminates after one or two doublings.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureError

# Switch to the Taylor branch of the sine kernels once |theta * halfwidth|
# drops below this; the direct quotient loses digits there.
SMALL_PHASE = 1e-6


@lru_cache(maxsize=None)
def _gauss_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


def panel_nodes(y0: float, y1: float, panels: int, order: int = 12):
    """Nodes and weights of a composite Gauss-Legendre rule on [y0, y1]."""
    base_x, base_w = _gauss_nodes(order)
    edges = np.linspace(y0, y1, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * base_x[None, :]).ravel()
    weights = (half[:, None] * base_w[None, :]).ravel()
    return nodes, weights


def symmetric_exp_integral(theta, halfwidth):
    """``∫_{-a}^{a} exp(i*theta*x) dx = 2 sin(a*theta)/theta`` (real valued).

    ``theta`` and ``halfwidth`` broadcast; the ``theta -> 0`` limit ``2a`` is
    taken through a Taylor branch for ``|a*theta| < 1e-6``.
    """
    theta = np.asarray(theta, dtype=float)
    a = np.asarray(halfwidth, dtype=float)
    t = theta * a
    small = np.abs(t) < SMALL_PHASE
    safe = np.where(small, 1.0, theta)
    direct = 2.0 * np.sin(t) / safe
    t2 = t * t
    series = 2.0 * a * (1.0 - t2 / 6.0 * (1.0 - t2 / 20.0))
    return np.where(small, series, direct)


def segment_exp_integral(theta, lo, hi):
    """``∫_{lo}^{hi} exp(i*theta*x) dx`` as a complex array.

    Written as midpoint phase times a symmetric sine kernel so the small
    ``theta`` branch is shared with :func:`symmetric_exp_integral`.
    """
    theta = np.asarray(theta, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return np.exp(1j * theta * mid) * symmetric_exp_integral(theta, half)


def power_exp_integral(theta, upper, power: int):
    """``∫_0^a r^p exp(i*theta*r) dr`` for an integer ``p >= 0``.

    Uses the integration-by-parts recurrence when the phase is resolved and a
    truncated Taylor series otherwise.  ``theta`` and ``upper`` broadcast.
    """
    if power < 0 or power != int(power):
        raise ValueError("power must be a nonnegative integer")
    theta = np.asarray(theta, dtype=float)
    a = np.asarray(upper, dtype=float)
    theta, a = np.broadcast_arrays(theta, a)
    t = theta * a
    small = np.abs(t) < 1e-3

    # Series branch: sum_m (i theta)^m a^(p+m+1) / (m! (p+m+1)).
    series = np.zeros(theta.shape, dtype=complex)
    term = np.asarray(a ** (power + 1) / (power + 1), dtype=complex)
    series = series + term
    factor = np.ones_like(theta, dtype=complex)
    for m in range(1, 12):
        factor = factor * (1j * theta * a) / m
        series = series + factor * a ** (power + 1) / (power + m + 1)

    # Recurrence branch, guarded against theta == 0.
    safe = np.where(np.abs(theta) < 1e-300, 1.0, theta)
    itheta = 1j * safe
    phase = np.exp(1j * safe * a)
    value = (phase - 1.0) / itheta
    for p in range(1, power + 1):
        value = (a**p * phase - p * value) / itheta

    return np.where(small, series, value)


def oscillatory_coefficients(
    density: Callable[[np.ndarray], np.ndarray],
    deltas: Sequence[float],
    *,
    y0: float = 0.0,
    y1: float = 1.0,
    tol: float = 1e-9,
    oscillation: float = 0.0,
    order: int = 12,
    panel_multiple: int = 1,
    max_refinements: int = 14,
) -> np.ndarray:
    """Integrals ``∫ density(y) exp(i*delta*y) dy`` for every ``delta``.

    ``oscillation`` is the caller's estimate of how many cycles ``density``
    itself contributes; modulation cycles from ``deltas`` are added on top.
    ``panel_multiple`` pins panel counts to a multiple (cell alignment for
    piecewise-smooth densities).  Raises :class:`QuadratureError` with the
    achieved error estimate if the refinement cap is reached.
    """
    deltas = np.asarray(deltas, dtype=float)
    span = y1 - y0
    if span <= 0:
        return np.zeros(deltas.shape, dtype=complex)
    max_delta = float(np.max(np.abs(deltas))) if deltas.size else 0.0
    cycles = abs(oscillation) + max_delta * span / (2.0 * math.pi)
    panels = max(1, math.ceil(1.0 + cycles))
    if panel_multiple > 1:
        panels = panel_multiple * math.ceil(panels / panel_multiple)

    previous = None
    change = math.inf
    for _ in range(max_refinements):
        nodes, weights = panel_nodes(y0, y1, panels, order)
        hv = np.asarray(density(nodes))
        weighted = weights * hv
        phases = np.exp(1j * np.outer(deltas, nodes))
        values = phases @ weighted
        if previous is not None:
            change = float(np.max(np.abs(values - previous))) if values.size else 0.0
            if change < tol:
                return values
        previous = values
        panels *= 2
    raise QuadratureError(
        f"oscillatory quadrature did not reach tol={tol:g} "
        f"(last change {change:.3e} with {panels // 2} panels)",
        estimate=change,
        values=previous,
    )


def oscillatory_integral(density, delta: float, **kwargs) -> complex:
    """Single-frequency convenience wrapper over the batched routine."""
    return complex(oscillatory_coefficients(density, [delta], **kwargs)[0])
