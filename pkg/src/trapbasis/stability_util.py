"""Small shared helpers for stochastic probes."""

from __future__ import annotations

import numpy as np


def unit_sphere_sample(rng: np.random.Generator, dimension: int) -> np.ndarray:
    """Uniform sample from the complex unit sphere in ``C^dimension``."""
    c = rng.standard_normal(dimension) + 1j * rng.standard_normal(dimension)
    return c / np.linalg.norm(c)
