"""Quarter-threshold stability checks and the contraction-constant bound.

A perturbed family ``exp(i pi (n x / g_n(y) + 2 k y))`` stays a Riesz basis
on the trapezoid when the per-column deviation ``eps_n = sup_y |f/g_n - 1|``
stays strictly below ``1/(4|n|)``; the constant 1/4 is sharp.  The aggregate
``L = sup_n pi |n| eps_n < pi/4`` feeds the contraction bound
``lambda = 1 - cos(L) + sin(L) < 1``, which controls the inherited Riesz
bounds ``(1 - lambda)^2 <= spec(G) <= (1 + lambda)^2`` of every truncation.

The sharpness family ``g_n = n f / (n - sgn(n)/4)`` attains the threshold
exactly for every column and is reported as a boundary verdict, never
certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bases import (
    PerturbationFamily,
    RatioPerturbation,
    TrapezoidFamily,
    trapezoid_basis,
)
from .domains import ProfileFunction, Trapezoid, unit_rectangle
from .errors import DomainError, GridRefinementError
from .gram import cross_gram
from .stability_util import unit_sphere_sample

QUARTER_PI = math.pi / 4.0

#: absolute tolerance for declaring a deviation exactly on the threshold
BOUNDARY_TOL = 1e-12

#: allowed relative drift of grid sups under one refinement
REFINEMENT_DRIFT = 1e-3

VERDICT_CERTIFIED = "certified"
VERDICT_BOUNDARY = "boundary"
VERDICT_VIOLATED = "violated"


@dataclass(frozen=True)
class InghamPerturbation(PerturbationFamily):
    """Sharpness family ``g_n = n f / (n - sgn(n)/4)``.

    The ratio ``f/g_n - 1`` equals ``-1/(4|n|)`` identically, so the
    perturbed x-exponents are ``(n - sgn(n)/4) / f(y)``.
    """

    profile: ProfileFunction
    label: str = "quarter-shift sharpness family"

    def g(self, n, y):
        if n == 0:
            raise DomainError("g is undefined at n = 0")
        return self.profile(np.asarray(y, dtype=float)) * n / (n - 0.25 * math.copysign(1.0, n))


@dataclass(frozen=True)
class MarginPerturbation(PerturbationFamily):
    """Strictly sub-threshold family ``g_n = f / (1 + theta/(4 n^2))``.

    Deviations are ``theta/(4 n^2) < 1/(4|n|)`` for ``0 < theta < 1``; the
    aggregate sup is attained at ``|n| = 1`` with ``L = theta * pi / 4``.
    """

    profile: ProfileFunction
    theta: float = 0.9

    @property
    def label(self) -> str:
        return f"margin family (theta={self.theta:g})"

    def g(self, n, y):
        if n == 0:
            raise DomainError("g is undefined at n = 0")
        return self.profile(np.asarray(y, dtype=float)) / (
            1.0 + self.theta / (4.0 * n * n)
        )


def ingham_family(profile: ProfileFunction) -> InghamPerturbation:
    """The threshold-attaining perturbation for a given profile."""
    return InghamPerturbation(profile)


@dataclass(frozen=True)
class DeviationRow:
    n: int
    epsilon: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class KadecReport:
    """Per-column deviations, their aggregate, and the stability verdict.

    ``lam`` is the contraction constant when ``L < pi/4`` and ``None``
    otherwise (boundary and violated runs carry no constant).
    """

    rows: tuple[DeviationRow, ...]
    aggregate: float  # L = sup_n pi |n| eps_n
    lam: float | None
    verdict: str
    grid_size: int
    profile_label: str
    perturbation_label: str

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "aggregate_L": self.aggregate,
            "lambda": self.lam,
            "grid_size": self.grid_size,
            "profile": self.profile_label,
            "perturbation": self.perturbation_label,
            "rows": [
                {
                    "n": r.n,
                    "epsilon": r.epsilon,
                    "threshold": r.threshold,
                    "passed": r.passed,
                }
                for r in self.rows
            ],
        }

    def csv_rows(self):
        for r in self.rows:
            yield (r.n, r.epsilon, r.threshold)


def _deviations(profile, perturbation, n_max, grid):
    y = np.linspace(0.0, 1.0, grid)
    f = profile(y)
    eps = {}
    for n in range(-n_max, n_max + 1):
        if n == 0:
            continue
        eps[n] = float(np.max(np.abs(f / perturbation.g(n, y) - 1.0)))
    return eps


def kadec_check(
    profile: ProfileFunction,
    perturbation: PerturbationFamily,
    n_max: int,
    grid_size: int = 1024,
) -> KadecReport:
    """Grid-sup check of the quarter threshold for ``0 < |n| <= n_max``.

    One mandatory grid refinement guards the sup estimates; a relative
    drift above 1e-3 raises :class:`GridRefinementError`.  Verdicts:
    ``certified`` (strict everywhere), ``boundary`` (some deviation within
    1e-12 of its threshold), ``violated`` otherwise.
    """
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    if grid_size < 2:
        raise DomainError("grid_size must be at least 2")
    coarse = _deviations(profile, perturbation, n_max, grid_size)
    fine = _deviations(profile, perturbation, n_max, 2 * grid_size - 1)
    for n, value in fine.items():
        reference = max(value, 1e-300)
        if abs(value - coarse[n]) / reference > REFINEMENT_DRIFT:
            raise GridRefinementError(
                f"deviation sup for n={n} moved from {coarse[n]:.6e} to "
                f"{value:.6e} under refinement; grid too coarse"
            )

    rows = []
    boundary_hit = False
    violated = False
    aggregate = 0.0
    for n in sorted(fine, key=lambda m: (abs(m), m)):
        eps = fine[n]
        threshold = 1.0 / (4.0 * abs(n))
        on_boundary = abs(eps - threshold) < BOUNDARY_TOL
        strict = eps < threshold and not on_boundary
        if on_boundary:
            boundary_hit = True
        elif eps > threshold:
            violated = True
        rows.append(DeviationRow(n=n, epsilon=eps, threshold=threshold, passed=strict))
        aggregate = max(aggregate, math.pi * abs(n) * eps)

    if violated:
        verdict = VERDICT_VIOLATED
    elif boundary_hit:
        verdict = VERDICT_BOUNDARY
    else:
        verdict = VERDICT_CERTIFIED
    lam = pw_bound(aggregate) if aggregate < QUARTER_PI else None
    return KadecReport(
        rows=tuple(rows),
        aggregate=aggregate,
        lam=lam,
        verdict=verdict,
        grid_size=2 * grid_size - 1,
        profile_label=profile.label,
        perturbation_label=perturbation.describe(),
    )


def pw_bound(aggregate: float) -> float:
    """Contraction constant ``1 - cos(L) + sin(L)`` for ``0 <= L < pi/4``.

    Strictly increasing on its domain with limit 1 at the open endpoint;
    values at or beyond ``pi/4`` are rejected because the bound degenerates.
    """
    if not 0.0 <= aggregate < QUARTER_PI:
        raise ValueError(f"aggregate deviation {aggregate!r} outside [0, pi/4)")
    return 1.0 - math.cos(aggregate) + math.sin(aggregate)


@dataclass(frozen=True)
class PwInequalityResult:
    """Monte Carlo audit of the difference-family norm bound.

    ``max_ratio`` is the largest observed ``|sum c (e - e~)| / lambda`` over
    unit coefficient vectors; the bound predicts it never exceeds 1.  When
    the perturbation is trivial both the norm and ``lambda`` vanish and the
    ratio is reported as zero.
    """

    max_ratio: float
    max_norm: float
    lam: float
    aggregate: float
    trials: int
    tolerance: float
    worst_coefficients: np.ndarray

    @property
    def ok(self) -> bool:
        return self.max_ratio <= 1.0 + self.tolerance

    def to_dict(self) -> dict:
        return {
            "max_ratio": self.max_ratio,
            "lambda": self.lam,
            "aggregate_L": self.aggregate,
            "trials": self.trials,
            "tolerance": self.tolerance,
            "ok": self.ok,
        }


def difference_gram(
    profile: ProfileFunction,
    perturbation: PerturbationFamily,
    n_window: int,
    k_window: int,
    *,
    tol: float = 1e-9,
) -> np.ndarray:
    """Gram of ``(e_nk - e~_nk)/sqrt(2)`` pulled back to the rectangle.

    After straightening the boundary, the unperturbed columns are the
    orthonormal rectangle harmonics and the perturbed ones carry
    x-exponents ``n f(y)/g_n(y)``; the difference Gram is assembled from
    the identity, the cross pairings, and the perturbed Gram.
    """
    rect = unit_rectangle()
    unperturbed = TrapezoidFamily(rect, n_window, k_window, weighted=True)
    pulled = TrapezoidFamily(
        rect,
        n_window,
        k_window,
        weighted=True,
        perturbation=RatioPerturbation(profile, perturbation),
    )
    size = len(unperturbed.indices)
    identity = np.eye(size, dtype=complex)
    cross = cross_gram(unperturbed, pulled, tol=tol)
    from .gram import gram_matrix  # local import to avoid cycle at load

    perturbed = gram_matrix(pulled, tol=tol).matrix
    return identity - cross - cross.conj().T + perturbed


def pw_inequality_test(
    profile: ProfileFunction,
    perturbation: PerturbationFamily,
    n_window: int,
    k_window: int,
    trials: int,
    *,
    seed: int = 0,
    tol: float = 1e-9,
    tolerance: float = 1e-4,
    grid_size: int = 1024,
) -> PwInequalityResult:
    """Probe the contraction bound with random unit coefficient vectors.

    Requires a certified quarter-threshold verdict; draws coefficients
    uniformly from the complex unit sphere of the truncation and evaluates
    the difference-family norm through its Gram.
    """
    if trials < 1:
        raise DomainError("trials must be at least 1")
    report = kadec_check(profile, perturbation, max(n_window, 1), grid_size)
    if report.verdict != VERDICT_CERTIFIED:
        raise DomainError(
            f"stability verdict is {report.verdict!r}; the norm bound needs a "
            "certified family"
        )
    lam = report.lam
    M = difference_gram(profile, perturbation, n_window, k_window, tol=tol)
    H = 0.5 * (M + M.conj().T)
    rng = np.random.default_rng(seed)
    max_ratio = -math.inf
    max_norm = 0.0
    worst = None
    # per-entry quadrature noise accumulates across the truncation
    noise_floor = 10.0 * tol * math.sqrt(H.shape[0])
    for _ in range(trials):
        c = unit_sphere_sample(rng, H.shape[0])
        norm = math.sqrt(max(float(np.real(np.vdot(c, H @ c))), 0.0))
        if lam > 0.0:
            ratio = norm / lam
        else:
            ratio = 0.0 if norm <= noise_floor else math.inf
        if ratio > max_ratio or worst is None:
            max_ratio = ratio
            worst = c
        max_norm = max(max_norm, norm)
    return PwInequalityResult(
        max_ratio=max_ratio,
        max_norm=max_norm,
        lam=lam,
        aggregate=report.aggregate,
        trials=trials,
        tolerance=tolerance,
        worst_coefficients=worst,
    )


def certified_family(
    profile: ProfileFunction,
    perturbation: PerturbationFamily | None,
    n_window: int,
    k_window: int,
    *,
    weighted: bool = True,
) -> TrapezoidFamily:
    """Weighted perturbed family on the trapezoid bounded by ``profile``."""
    return trapezoid_basis(
        Trapezoid(profile),
        n_window,
        k_window,
        perturbation=perturbation,
        weighted=weighted,
    )
