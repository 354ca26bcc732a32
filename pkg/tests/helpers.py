"""Independent quadrature oracles used by the tests.

These deliberately avoid the package's own integration code: plain iterated
Gauss-Legendre rules over explicit evaluators, so Gram entries and norms can
be cross-checked through a second route.
"""

import numpy as np


def _gl(a, b, n):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def rectangle_inner(u, v, nx=160, ny=160):
    """<u, v> over [-1, 1] x [0, 1] by iterated Gauss-Legendre."""
    ys, wy = _gl(0.0, 1.0, ny)
    xs, wx = _gl(-1.0, 1.0, nx)
    total = 0.0 + 0.0j
    for y, wyi in zip(ys, wy):
        vals = u(xs, np.full_like(xs, y)) * np.conj(v(xs, np.full_like(xs, y)))
        total += wyi * np.sum(wx * vals)
    return total


def trapezoid_inner(u, v, profile, nx=160, ny=160):
    """<u, v> over {|x| <= f(y), 0 <= y <= 1} by iterated Gauss-Legendre."""
    ys, wy = _gl(0.0, 1.0, ny)
    total = 0.0 + 0.0j
    for y, wyi in zip(ys, wy):
        f = float(profile(y))
        xs, wx = _gl(-f, f, nx)
        vals = u(xs, np.full_like(xs, y)) * np.conj(v(xs, np.full_like(xs, y)))
        total += wyi * np.sum(wx * vals)
    return total


def unit_square_inner(u, v, nx=120, ny=120):
    ys, wy = _gl(0.0, 1.0, ny)
    xs, wx = _gl(0.0, 1.0, nx)
    total = 0.0 + 0.0j
    for y, wyi in zip(ys, wy):
        vals = u(xs, np.full_like(xs, y)) * np.conj(v(xs, np.full_like(xs, y)))
        total += wyi * np.sum(wx * vals)
    return total


def step_scan_oracle(profile, order, grid_size=10_000):
    """Brute-force doubling scan for the smallest certified partition count.

    Re-derives the step construction (cell values at left endpoints) and the
    sup errors on the audit grid without touching the library's code path.
    """
    grid = np.linspace(0.0, 1.0, grid_size)
    fvals = profile(grid)
    bound = 1.0 / (4.0 * order)
    partitions = 1
    while partitions <= 1 << 20:
        values = profile(np.arange(partitions) / partitions)
        idx = np.clip((grid * partitions).astype(int), 0, partitions - 1)
        svals = np.asarray(values)[idx]
        err_inv = np.max(np.abs(1.0 / svals - 1.0 / fvals))
        err_val = np.max(np.abs(svals - fvals))
        if err_inv < bound and err_val < bound:
            return partitions, float(err_inv), float(err_val)
        partitions *= 2
    raise AssertionError("oracle scan failed")
