"""Truncated Gram matrices, frame-bound estimates, and reconstruction.

Inner products factor into a closed-form inner integral (in x, or in the
radius) and an outer y-integral handled by adaptive oscillatory quadrature;
on step-profile domains both integrals are elementary and the assembly is
exact.  Entries depend only on the pair of x-columns and the difference of
y-indices, so each Gram is assembled from a much smaller table of
integrals.

Finite-section caveat: eigenvalues of a truncated Gram always lie inside
the full family's Riesz bounds, so the reported extremes are evidence
(an upper bound on the lower frame constant, a lower bound on the upper
one), never proof.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bases import (
    BoxHarmonicsFamily,
    CellExponentialElement,
    Exponential1D,
    MultiIntervalFamily,
    MultiRectFamily,
    ProductFamily,
    RadialElement,
    RadialFamily,
    SeparableElement,
    TrapezoidFamily,
)
from .domains import MultiInterval, SphericalTrapezoid, Trapezoid
from .errors import DomainError, IllConditionedError
from .quadrature import (
    oscillatory_coefficients,
    power_exp_integral,
    segment_exp_integral,
    symmetric_exp_integral,
)

TWO_PI = 2.0 * math.pi

#: condition number beyond which Gram solves are refused
MAX_SOLVE_CONDITION = 1e10

VERDICT_IDENTITY = "identity_within_tol"
VERDICT_BOUNDED = "bounded"
VERDICT_ILL = "ill_conditioned"


@dataclass(frozen=True)
class GramReport:
    """Hermitian truncated Gram matrix with spectral summary.

    Rows follow the family's fixed lexicographic index order.  The verdict
    is ``identity_within_tol`` when ``max|G - I|`` is below ten times the
    per-entry quadrature tolerance.
    """

    matrix: np.ndarray
    indices: tuple
    eigen_min: float
    eigen_max: float
    condition_number: float
    quadrature_tolerance: float
    hermiticity_defect: float
    verdict: str
    label: str = ""

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def identity_defect(self) -> float:
        return float(
            np.max(np.abs(self.matrix - np.eye(self.dimension, dtype=complex)))
        )

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "eigen_min": self.eigen_min,
            "eigen_max": self.eigen_max,
            "condition_number": self.condition_number
            if math.isfinite(self.condition_number)
            else None,
            "quadrature_tolerance": self.quadrature_tolerance,
            "hermiticity_defect": self.hermiticity_defect,
            "identity_defect": self.identity_defect,
            "verdict": self.verdict,
            "label": self.label,
        }


def _finalize(matrix: np.ndarray, indices, tol: float, label: str) -> GramReport:
    hermitian = 0.5 * (matrix + matrix.conj().T)
    defect = float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0
    eigs = np.linalg.eigvalsh(hermitian)
    eigen_min = float(eigs[0])
    eigen_max = float(eigs[-1])
    cond = math.inf if eigen_min <= 0 else eigen_max / eigen_min
    ident_tol = max(10.0 * tol, 1e-12)
    dim = matrix.shape[0]
    if float(np.max(np.abs(matrix - np.eye(dim)))) < ident_tol:
        verdict = VERDICT_IDENTITY
    elif eigen_min <= 0 or cond > MAX_SOLVE_CONDITION:
        verdict = VERDICT_ILL
    else:
        verdict = VERDICT_BOUNDED
    return GramReport(
        matrix=matrix,
        indices=tuple(indices),
        eigen_min=eigen_min,
        eigen_max=eigen_max,
        condition_number=cond,
        quadrature_tolerance=tol,
        hermiticity_defect=defect,
        verdict=verdict,
        label=label,
    )


# ---------------------------------------------------------------------------
# separable (x-exponential over profile-bounded region) assembly
# ---------------------------------------------------------------------------


def _oscillation_estimate(dalpha: Callable, halfwidth: Callable) -> float:
    """Cycles contributed by the x-kernel as y sweeps [0, 1]."""
    probe = np.linspace(0.0, 1.0, 33)
    arg = dalpha(probe) * halfwidth(probe)
    return float(np.ptp(arg)) / TWO_PI


def _separable_blocks(
    ns_row: Sequence[int],
    ns_col: Sequence[int],
    ks_row: Sequence[int],
    ks_col: Sequence[int],
    alpha_row: Callable,
    alpha_col: Callable,
    density_of: Callable,
    beta_unit: float,
    tol: float,
    panel_multiple: int,
    hermitian: bool,
) -> np.ndarray:
    """Assemble blocks ``G[(n,k),(n',k')] = V[n, n', k - k']``.

    ``density_of(n, n')`` returns the y-density whose modulated integrals
    fill one block; entries for all ``k - k'`` differences come from a
    single batched quadrature per column pair.
    """
    ks_row = list(ks_row)
    ks_col = list(ks_col)
    d_lo = min(ks_row) - max(ks_col)
    d_hi = max(ks_row) - min(ks_col)
    diffs = np.arange(d_lo, d_hi + 1)
    deltas = beta_unit * diffs
    kr = np.asarray(ks_row)
    kc = np.asarray(ks_col)
    dmat = kr[:, None] - kc[None, :] - d_lo  # indices into diffs

    p, q = len(ks_row), len(ks_col)
    G = np.zeros((len(ns_row) * p, len(ns_col) * q), dtype=complex)
    for i, n in enumerate(ns_row):
        j_start = i if (hermitian and ns_row == ns_col and ks_row == ks_col) else 0
        for j in range(j_start, len(ns_col)):
            n2 = ns_col[j]
            density = density_of(n, n2)
            osc = _oscillation_estimate(
                lambda y: alpha_row(n, y) - alpha_col(n2, y), density.halfwidth
            )
            vals = oscillatory_coefficients(
                density,
                deltas,
                tol=tol,
                oscillation=osc,
                panel_multiple=panel_multiple,
            )
            block = vals[dmat]
            G[i * p : (i + 1) * p, j * q : (j + 1) * q] = block
            if hermitian and ns_row == ns_col and ks_row == ks_col and j > i:
                G[j * q : (j + 1) * q, i * p : (i + 1) * p] = block.conj().T
    return G


class _PairDensity:
    """Callable y-density for one column pair, carrying its halfwidth."""

    def __init__(self, fn: Callable, halfwidth: Callable):
        self._fn = fn
        self.halfwidth = halfwidth

    def __call__(self, y):
        return self._fn(y)


def _trapezoid_density(family_row, family_col, n, n2) -> _PairDensity:
    profile = family_row.profile if isinstance(family_row, TrapezoidFamily) else None
    if profile is None:
        # box harmonics restricted to a trapezoid
        profile = family_row.restricted_to.profile

    def weight(fam, y):
        if isinstance(fam, TrapezoidFamily):
            return fam.weight_values(y)
        return np.ones(np.shape(y))

    def density(y):
        dalpha = family_row.alpha(n, y) - family_col.alpha(n2, y)
        return (
            weight(family_row, y)
            * weight(family_col, y)
            * symmetric_exp_integral(dalpha, profile(y))
        )

    return _PairDensity(density, profile)


def _x_windows(family) -> tuple[list[int], list[int]]:
    if isinstance(family, TrapezoidFamily):
        nw, kw = family.n_window, family.k_window
    else:
        nw, kw = family.n_window, family.m_window
    return (
        list(range(-nw, nw + 1)),
        list(range(-kw, kw + 1)),
    )


def _panel_multiple_for(profile) -> int:
    return profile.step.cells if profile.step is not None else 1


def _trapezoid_gram_quadrature(family: TrapezoidFamily, tol: float) -> np.ndarray:
    ns, ks = _x_windows(family)
    return _separable_blocks(
        ns,
        ns,
        ks,
        ks,
        family.alpha,
        family.alpha,
        lambda n, n2: _trapezoid_density(family, family, n, n2),
        beta_unit=TWO_PI,
        tol=tol,
        panel_multiple=_panel_multiple_for(family.profile),
        hermitian=True,
    )


def _step_trapezoid_gram_closed(family: TrapezoidFamily) -> np.ndarray:
    """Exact assembly for an unperturbed family over a step profile."""
    step = family.profile.step
    ns, ks = _x_windows(family)
    cells = step.cells
    vals = np.asarray(step.values)
    edges = np.arange(cells + 1) / cells
    size = len(ns) * len(ks)
    G = np.zeros((size, size), dtype=complex)
    kr = np.asarray(ks)
    dmat = kr[:, None] - kr[None, :]
    p = len(ks)
    for i, n in enumerate(ns):
        for j, n2 in enumerate(ns):
            if j < i:
                continue
            entry = np.zeros(dmat.shape, dtype=complex)
            for c in range(cells):
                b = vals[c]
                dalpha = math.pi * (n - n2) / b
                xpart = symmetric_exp_integral(dalpha, b)
                w2 = 1.0 / (2.0 * b) if family.weighted else 1.0
                ypart = segment_exp_integral(
                    TWO_PI * dmat.astype(float), edges[c], edges[c + 1]
                )
                entry = entry + w2 * xpart * ypart
            G[i * p : (i + 1) * p, j * p : (j + 1) * p] = entry
            if j > i:
                G[j * p : (j + 1) * p, i * p : (i + 1) * p] = entry.conj().T
    return G


def _radial_density(family: RadialFamily, n: int, n2: int) -> _PairDensity:
    prof = family.solid.profile
    d = family.solid.dimension
    measure = family.solid.sphere_measure

    def dalpha(y):
        y = np.asarray(y, dtype=float)
        f = prof(y)
        a = TWO_PI * n / f if n else np.zeros(y.shape)
        b = TWO_PI * n2 / f if n2 else np.zeros(y.shape)
        return a - b

    if family.weighted:

        def density(y):
            f = prof(np.asarray(y, dtype=float))
            return segment_exp_integral(dalpha(y), 0.0, f) / f

    else:

        def density(y):
            f = prof(np.asarray(y, dtype=float))
            return measure * power_exp_integral(dalpha(y), f, d - 2)

    return _PairDensity(density, prof)


def _radial_gram(family: RadialFamily, tol: float) -> np.ndarray:
    ns = list(range(-family.n_window, family.n_window + 1))
    ks = list(range(-family.k_window, family.k_window + 1))

    def alpha(n, y):
        y = np.asarray(y, dtype=float)
        if n == 0:
            return np.zeros(y.shape)
        return TWO_PI * n / family.solid.profile(y)

    return _separable_blocks(
        ns,
        ns,
        ks,
        ks,
        alpha,
        alpha,
        lambda n, n2: _radial_density(family, n, n2),
        beta_unit=TWO_PI,
        tol=tol,
        panel_multiple=_panel_multiple_for(family.solid.profile),
        hermitian=True,
    )


# ---------------------------------------------------------------------------
# closed-form assemblies
# ---------------------------------------------------------------------------


def _interval_pair_integral(interval: MultiInterval, domega: float) -> complex:
    total = 0.0 + 0.0j
    for a, b in interval.segments:
        total += complex(segment_exp_integral(domega, a, b))
    return total


def _multiinterval_gram(family: MultiIntervalFamily) -> np.ndarray:
    omegas = TWO_PI * np.asarray(family.frequencies)
    size = len(omegas)
    amp2 = family.amplitude**2
    G = np.zeros((size, size), dtype=complex)
    for i in range(size):
        for j in range(i, size):
            val = amp2 * _interval_pair_integral(family.interval, omegas[i] - omegas[j])
            G[i, j] = val
            G[j, i] = np.conj(val)
    return G


def _product_gram(family: ProductFamily) -> np.ndarray:
    size = len(family.pairs)
    G = np.zeros((size, size), dtype=complex)
    for i, (_, xi, yi) in enumerate(family.pairs):
        for j, (_, xj, yj) in enumerate(family.pairs):
            if j < i:
                continue
            xval = (
                xi.amplitude
                * xj.amplitude
                * _interval_pair_integral(family.x_domain, xi.omega - xj.omega)
            )
            yval = (
                yi.amplitude
                * yj.amplitude
                * _interval_pair_integral(family.y_domain, yi.omega - yj.omega)
            )
            G[i, j] = xval * yval
            G[j, i] = np.conj(G[i, j])
    return G


def _multirect_pair_integral(
    step, dwx: float, dwy: float, phases_i, phases_j
) -> complex:
    cells = step.cells
    total = 0.0 + 0.0j
    for c in range(cells):
        b = step.values[c]
        xpart = complex(segment_exp_integral(dwx, -b, b))
        ypart = complex(segment_exp_integral(dwy, c / cells, (c + 1) / cells))
        total += phases_i[c] * np.conj(phases_j[c]) * xpart * ypart
    return total


def _multirect_gram(family: MultiRectFamily) -> np.ndarray:
    elems = [family.element(i) for i in range(len(family.entries))]
    size = len(elems)
    G = np.zeros((size, size), dtype=complex)
    for i, ei in enumerate(elems):
        for j in range(i, size):
            ej = elems[j]
            val = (
                ei.amplitude
                * ej.amplitude
                * _multirect_pair_integral(
                    family.step,
                    ei.omega_x - ej.omega_x,
                    ei.omega_y - ej.omega_y,
                    ei.phases,
                    ej.phases,
                )
            )
            G[i, j] = val
            G[j, i] = np.conj(val)
    return G


# ---------------------------------------------------------------------------
# public assembly
# ---------------------------------------------------------------------------


def gram_matrix(family, *, tol: float = 1e-9, method: str = "auto") -> GramReport:
    """Truncated Gram matrix of a basis family with spectral summary.

    ``method`` selects the assembly path for trapezoid families over step
    profiles: ``closed`` (exact), ``quadrature``, or ``auto`` (closed when
    available).  Desk-scale guard: matrix dimension must stay below 4096.
    """
    if isinstance(family, TrapezoidFamily):
        size = len(family.indices)
        _check_size(size)
        closed_ok = family.profile.step is not None and family.perturbation is None
        if method == "closed" and not closed_ok:
            raise DomainError("closed-form path needs an unperturbed step profile")
        if closed_ok and method in ("auto", "closed"):
            matrix = _step_trapezoid_gram_closed(family)
            return _finalize(matrix, family.indices, 0.0, _label(family))
        matrix = _trapezoid_gram_quadrature(family, tol)
        return _finalize(matrix, family.indices, tol, _label(family))
    if isinstance(family, BoxHarmonicsFamily):
        _check_size(len(family.indices))
        if family.restricted_to is None:
            matrix = family.area * np.eye(len(family.indices), dtype=complex)
            return _finalize(matrix, family.indices, 0.0, "box harmonics")
        ns, ms = _x_windows(family)
        matrix = _separable_blocks(
            ns,
            ns,
            ms,
            ms,
            family.alpha,
            family.alpha,
            lambda n, n2: _trapezoid_density(family, family, n, n2),
            beta_unit=TWO_PI / family.widths[1],
            tol=tol,
            panel_multiple=_panel_multiple_for(family.restricted_to.profile),
            hermitian=True,
        )
        return _finalize(matrix, family.indices, tol, "restricted box harmonics")
    if isinstance(family, RadialFamily):
        _check_size(len(family.indices))
        matrix = _radial_gram(family, tol)
        return _finalize(matrix, family.indices, tol, "radial family")
    if isinstance(family, MultiIntervalFamily):
        _check_size(len(family.indices))
        return _finalize(
            _multiinterval_gram(family), family.indices, 0.0, "multi-interval"
        )
    if isinstance(family, ProductFamily):
        _check_size(len(family.pairs))
        return _finalize(_product_gram(family), family.indices, 0.0, "product family")
    if isinstance(family, MultiRectFamily):
        _check_size(len(family.entries))
        return _finalize(
            _multirect_gram(family), family.indices, 0.0, "multi-rectangle family"
        )
    raise DomainError(f"unsupported family type {type(family).__name__}")


def _check_size(size: int):
    if size > 4096:
        raise DomainError(f"truncation dimension {size} exceeds the desk-scale cap")


def _label(family: TrapezoidFamily) -> str:
    tag = "weighted" if family.weighted else "unweighted"
    pert = (
        "unperturbed"
        if family.perturbation is None
        else family.perturbation.describe()
    )
    return f"{tag} trapezoid family ({pert})"


def cross_gram(family_a: TrapezoidFamily, family_b: TrapezoidFamily, *, tol=1e-9):
    """Rectangular matrix of pairings ``<a_p, b_q>`` between two families.

    Both families must live on the same trapezoid and share the phase
    convention; used for difference-family norms and perturbation studies.
    """
    if not isinstance(family_a, TrapezoidFamily) or not isinstance(
        family_b, TrapezoidFamily
    ):
        raise DomainError("cross_gram expects two trapezoid families")
    if family_a.convention != family_b.convention:
        raise DomainError("phase conventions differ")
    if family_a.trapezoid.profile is not family_b.trapezoid.profile:
        pa, pb = family_a.profile, family_b.profile
        probe = np.linspace(0.0, 1.0, 17)
        if not np.allclose(pa(probe), pb(probe), atol=1e-12):
            raise DomainError("families live on different trapezoids")
    ns_a, ks_a = _x_windows(family_a)
    ns_b, ks_b = _x_windows(family_b)
    return _separable_blocks(
        ns_a,
        ns_b,
        ks_a,
        ks_b,
        family_a.alpha,
        family_b.alpha,
        lambda n, n2: _trapezoid_density(family_a, family_b, n, n2),
        beta_unit=TWO_PI,
        tol=tol,
        panel_multiple=_panel_multiple_for(family_a.profile),
        hermitian=False,
    )


# ---------------------------------------------------------------------------
# single-pair inner products
# ---------------------------------------------------------------------------


def inner_product(elem1, elem2, domain, *, tol: float = 1e-9) -> complex:
    """L2 pairing ``<elem1, elem2>`` over the given domain.

    Dispatches on element and domain kinds; elements must share a phase
    convention and the domain they were built for.
    """
    if isinstance(elem1, SeparableElement) and isinstance(elem2, SeparableElement):
        if not isinstance(domain, Trapezoid):
            raise DomainError("separable elements pair over a trapezoid")
        profile = domain.profile

        def density(y):
            w1 = 1.0 if elem1.weight is None else elem1.weight(y)
            w2 = 1.0 if elem2.weight is None else elem2.weight(y)
            return (
                w1
                * w2
                * symmetric_exp_integral(elem1.alpha(y) - elem2.alpha(y), profile(y))
            )

        osc = _oscillation_estimate(
            lambda y: elem1.alpha(y) - elem2.alpha(y), profile
        )
        return complex(
            oscillatory_coefficients(
                density,
                [elem1.beta - elem2.beta],
                tol=tol,
                oscillation=osc,
                panel_multiple=_panel_multiple_for(profile),
            )[0]
        )
    if isinstance(elem1, CellExponentialElement) and isinstance(
        elem2, CellExponentialElement
    ):
        if elem1.step != elem2.step:
            raise DomainError("cell elements live on different multi-rectangles")
        return complex(
            elem1.amplitude
            * elem2.amplitude
            * _multirect_pair_integral(
                elem1.step,
                elem1.omega_x - elem2.omega_x,
                elem1.omega_y - elem2.omega_y,
                elem1.phases,
                elem2.phases,
            )
        )
    if isinstance(elem1, Exponential1D) and isinstance(elem2, Exponential1D):
        if not isinstance(domain, MultiInterval):
            raise DomainError("one-dimensional exponentials pair over a multi-interval")
        return complex(
            elem1.amplitude
            * elem2.amplitude
            * _interval_pair_integral(domain, elem1.omega - elem2.omega)
        )
    if isinstance(elem1, RadialElement) and isinstance(elem2, RadialElement):
        if not isinstance(domain, SphericalTrapezoid):
            raise DomainError("radial elements pair over a spherical trapezoid")
        if elem1.weighted != elem2.weighted:
            raise DomainError("mixed weighted/unweighted radial pairs unsupported")
        fam = RadialFamily(domain, 0, 0, elem1.weighted)
        dens = _radial_density_for(fam, elem1, elem2)
        osc = _oscillation_estimate(
            lambda y: elem1.alpha(y) - elem2.alpha(y), domain.profile
        )
        return complex(
            oscillatory_coefficients(
                dens,
                [elem1.beta - elem2.beta],
                tol=tol,
                oscillation=osc,
                panel_multiple=_panel_multiple_for(domain.profile),
            )[0]
        )
    raise DomainError(
        f"unsupported element pairing {type(elem1).__name__} / {type(elem2).__name__}"
    )


def _radial_density_for(family: RadialFamily, e1: RadialElement, e2: RadialElement):
    prof = family.solid.profile
    d = family.solid.dimension
    measure = family.solid.sphere_measure

    def density(y):
        y = np.asarray(y, dtype=float)
        f = prof(y)
        da = e1.alpha(y) - e2.alpha(y)
        if e1.weighted:
            return segment_exp_integral(da, 0.0, f) / f
        return measure * power_exp_integral(da, f, d - 2)

    return _PairDensity(density, prof)


# ---------------------------------------------------------------------------
# frame bounds
# ---------------------------------------------------------------------------


def frame_bounds(report: GramReport) -> tuple[float, float]:
    """Finite-section frame-bound estimates ``(A_est, B_est)``.

    ``A_est`` upper-bounds the true lower constant and ``B_est`` lower-bounds
    the true upper constant, because truncation eigenvalues interlace into
    the full family's Riesz interval: evidence, not proof.
    """
    return (report.eigen_min, report.eigen_max)


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoxTarget:
    """Indicator ``value * chi([x0,x1] x [y0,y1])`` intersected with the domain."""

    x0: float
    x1: float
    y0: float
    y1: float
    value: float = 1.0

    @property
    def label(self) -> str:
        return (
            f"{self.value:g}*chi([{self.x0:g},{self.x1:g}]x[{self.y0:g},{self.y1:g}])"
        )


@dataclass(frozen=True)
class ElementTarget:
    """A family element used as its own reconstruction target."""

    position: int

    @property
    def label(self) -> str:
        return f"element #{self.position}"


@dataclass(frozen=True)
class ReconstructionReport:
    """Dual-frame coefficients from the truncated Gram system ``G c = b``."""

    target_label: str
    coefficients: np.ndarray
    relative_residual: float
    truncation: tuple
    condition_number: float
    target_norm: float

    def to_dict(self) -> dict:
        return {
            "target": self.target_label,
            "relative_residual": self.relative_residual,
            "condition_number": self.condition_number
            if math.isfinite(self.condition_number)
            else None,
            "target_norm": self.target_norm,
            "coefficients_re": np.real(self.coefficients).tolist(),
            "coefficients_im": np.imag(self.coefficients).tolist(),
        }


def _box_moments_trapezoid(target: BoxTarget, family: TrapezoidFamily, tol: float):
    profile = family.profile
    y_lo = max(target.y0, 0.0)
    y_hi = min(target.y1, 1.0)
    ns, ks = _x_windows(family)
    deltas = -TWO_PI * np.asarray(ks, dtype=float)
    moments = np.zeros(len(family.indices), dtype=complex)
    if y_hi <= y_lo:
        return moments
    p = len(ks)
    for i, n in enumerate(ns):

        def density(y, _n=n):
            f = profile(y)
            lo = np.maximum(target.x0, -f)
            hi = np.minimum(target.x1, f)
            width_ok = hi > lo
            seg = segment_exp_integral(
                -family.alpha(_n, y), np.where(width_ok, lo, 0.0), np.where(width_ok, hi, 0.0)
            )
            w = family.weight_values(y) if family.weighted else np.ones(np.shape(y))
            return target.value * w * np.where(width_ok, seg, 0.0)

        osc = _oscillation_estimate(lambda y: family.alpha(n, y), profile)
        vals = oscillatory_coefficients(
            density,
            deltas,
            y0=y_lo,
            y1=y_hi,
            tol=tol,
            oscillation=osc,
            panel_multiple=_panel_multiple_for(profile),
        )
        moments[i * p : (i + 1) * p] = vals
    return moments


def _box_norm_sq_trapezoid(target: BoxTarget, family: TrapezoidFamily, tol: float):
    profile = family.profile
    y_lo = max(target.y0, 0.0)
    y_hi = min(target.y1, 1.0)
    if y_hi <= y_lo:
        return 0.0

    def width(y):
        f = profile(y)
        return np.maximum(
            0.0, np.minimum(target.x1, f) - np.maximum(target.x0, -f)
        )

    val = oscillatory_coefficients(
        width,
        [0.0],
        y0=y_lo,
        y1=y_hi,
        tol=tol,
        panel_multiple=_panel_multiple_for(profile),
    )[0]
    return float(np.real(val)) * target.value**2


def _box_moments_multirect(target: BoxTarget, family: MultiRectFamily):
    step = family.step
    cells = step.cells
    moments = np.zeros(len(family.entries), dtype=complex)
    for pos in range(len(family.entries)):
        e = family.element(pos)
        total = 0.0 + 0.0j
        for c in range(cells):
            b = step.values[c]
            xlo, xhi = max(target.x0, -b), min(target.x1, b)
            ylo = max(target.y0, c / cells)
            yhi = min(target.y1, (c + 1) / cells)
            if xhi <= xlo or yhi <= ylo:
                continue
            total += complex(
                segment_exp_integral(-e.omega_x, xlo, xhi)
            ) * complex(segment_exp_integral(-e.omega_y, ylo, yhi))
        moments[pos] = target.value * e.amplitude * total
    return moments


def _box_norm_sq_multirect(target: BoxTarget, family: MultiRectFamily):
    step = family.step
    cells = step.cells
    total = 0.0
    for c in range(cells):
        b = step.values[c]
        w = max(0.0, min(target.x1, b) - max(target.x0, -b))
        h = max(0.0, min(target.y1, (c + 1) / cells) - max(target.y0, c / cells))
        total += w * h
    return total * target.value**2


def target_moments(target, family, *, tol: float = 1e-9, gram: GramReport | None = None):
    """Vector ``b_j = <target, e_j>`` over the family's index order."""
    if isinstance(target, ElementTarget):
        if gram is None:
            gram = gram_matrix(family, tol=tol)
        return gram.matrix[:, target.position].conj()
    if isinstance(target, BoxTarget):
        if isinstance(family, TrapezoidFamily):
            return _box_moments_trapezoid(target, family, tol)
        if isinstance(family, MultiRectFamily):
            return _box_moments_multirect(target, family)
    raise DomainError(
        f"unsupported target {type(target).__name__} for {type(family).__name__}"
    )


def target_norm_sq(target, family, *, tol: float = 1e-9, gram: GramReport | None = None):
    if isinstance(target, ElementTarget):
        if gram is None:
            gram = gram_matrix(family, tol=tol)
        return float(np.real(gram.matrix[target.position, target.position]))
    if isinstance(target, BoxTarget):
        if isinstance(family, TrapezoidFamily):
            return _box_norm_sq_trapezoid(target, family, tol)
        if isinstance(family, MultiRectFamily):
            return _box_norm_sq_multirect(target, family)
    raise DomainError(f"unsupported target {type(target).__name__}")


def reconstruct(
    target,
    family,
    *,
    tol: float = 1e-9,
    gram: GramReport | None = None,
) -> ReconstructionReport:
    """Best least-squares expansion of ``target`` in the truncated family.

    Solves the normal equations ``G c = b`` and reports the relative
    residual; refuses Gram systems with condition number above 1e10.
    """
    if gram is None:
        gram = gram_matrix(family, tol=tol)
    if not math.isfinite(gram.condition_number) or gram.condition_number > MAX_SOLVE_CONDITION:
        raise IllConditionedError(
            f"Gram condition number {gram.condition_number:.3e} exceeds "
            f"{MAX_SOLVE_CONDITION:.0e}; solve would be meaningless"
        )
    b = target_moments(target, family, tol=tol, gram=gram)
    norm_sq = target_norm_sq(target, family, tol=tol, gram=gram)
    H = 0.5 * (gram.matrix + gram.matrix.conj().T)
    coeffs = np.linalg.solve(H, b)
    # residual^2 = |t|^2 - 2 Re(c* b) + c* G c, with G c = b at the solution
    quad = float(np.real(np.vdot(coeffs, H @ coeffs)))
    cross = float(np.real(np.vdot(coeffs, b)))
    residual_sq = max(norm_sq - 2.0 * cross + quad, 0.0)
    norm = math.sqrt(max(norm_sq, 0.0))
    rel = math.sqrt(residual_sq) / norm if norm > 0 else 0.0
    trunc = getattr(family, "n_window", None), getattr(family, "k_window", None)
    return ReconstructionReport(
        target_label=target.label,
        coefficients=coeffs,
        relative_residual=rel,
        truncation=trunc,
        condition_number=gram.condition_number,
        target_norm=norm,
    )


# ---------------------------------------------------------------------------
# restricted-frame probe
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RestrictedFrameReport:
    """Frame-ratio probe of box harmonics restricted to a subdomain.

    For random finite combinations supported in the domain, the ratio
    ``sum |<f, e_j>|^2 / |f|^2`` over the truncation is recorded; the
    truncated lower ratio only estimates the true lower frame bound.
    """

    gram: GramReport
    tight_constant: float
    min_ratio: float
    max_ratio: float
    ratios: tuple[float, ...]
    trials: int
    probe_window: int

    def to_dict(self) -> dict:
        return {
            "tight_constant": self.tight_constant,
            "min_ratio": self.min_ratio,
            "max_ratio": self.max_ratio,
            "trials": self.trials,
            "probe_window": self.probe_window,
            "gram": self.gram.to_dict(),
        }


def restricted_frame_check(
    box: tuple[tuple[float, float], tuple[float, float]],
    domain: Trapezoid | None,
    truncation: int,
    *,
    trials: int = 32,
    probe_window: int | None = None,
    seed: int = 0,
    tol: float = 1e-9,
) -> RestrictedFrameReport:
    """Probe the frame inequality for box harmonics restricted to a domain.

    ``domain=None`` means the box itself (a tight frame with constant equal
    to the box area).  Probe functions are random combinations of harmonics
    with indices inside ``probe_window`` (default ``truncation // 2``) so
    the box case reproduces the tight constant exactly at finite truncation.
    """
    family = BoxHarmonicsFamily(box, truncation, truncation, restricted_to=domain)
    report = gram_matrix(family, tol=tol)
    if probe_window is None:
        probe_window = max(truncation // 2, 0)
    if probe_window > truncation:
        raise DomainError("probe window exceeds the truncation")
    probe_positions = [
        i
        for i, (n, m) in enumerate(family.indices)
        if abs(n) <= probe_window and abs(m) <= probe_window
    ]
    K = 0.5 * (report.matrix + report.matrix.conj().T)
    Kp = K[:, probe_positions]
    Kpp = K[np.ix_(probe_positions, probe_positions)]
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(trials):
        c = rng.standard_normal(len(probe_positions)) + 1j * rng.standard_normal(
            len(probe_positions)
        )
        c /= np.linalg.norm(c)
        den = float(np.real(np.vdot(c, Kpp @ c)))
        if den <= 0:
            continue
        num = float(np.linalg.norm(Kp @ c) ** 2)
        ratios.append(num / den)
    if not ratios:
        raise DomainError("all probe functions vanished on the domain")
    return RestrictedFrameReport(
        gram=report,
        tight_constant=family.area,
        min_ratio=min(ratios),
        max_ratio=max(ratios),
        ratios=tuple(ratios),
        trials=trials,
        probe_window=probe_window,
    )


# ---------------------------------------------------------------------------
# matrix export
# ---------------------------------------------------------------------------

GRAM_MAGIC = b"GRAM"
GRAM_FLAG_HERMITIAN = 1


def write_gram_csv(matrix: np.ndarray, path) -> None:
    """Interleaved re/im CSV: row p holds re(G[p,0]), im(G[p,0]), ..."""
    matrix = np.asarray(matrix, dtype=complex)
    dim = matrix.shape[0]
    inter = np.empty((dim, 2 * matrix.shape[1]))
    inter[:, 0::2] = matrix.real
    inter[:, 1::2] = matrix.imag
    with open(path, "w", encoding="utf-8") as fh:
        for row in inter:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_gram_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    return data[:, 0::2] + 1j * data[:, 1::2]


def write_gram_binary(matrix: np.ndarray, path, flags: int = GRAM_FLAG_HERMITIAN) -> None:
    """Compact layout: 16-byte header (magic ``GRAM``, u32 dim, u32 flags,
    4 reserved bytes), then row-major little-endian complex64 entries."""
    matrix = np.asarray(matrix, dtype=complex)
    dim = matrix.shape[0]
    if matrix.shape != (dim, dim):
        raise DomainError("binary export expects a square matrix")
    header = GRAM_MAGIC + struct.pack("<II", dim, flags) + b"\x00" * 4
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(matrix.astype("<c8")).tobytes())


def read_gram_binary(path) -> tuple[np.ndarray, int]:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != GRAM_MAGIC:
            raise DomainError("not a Gram binary file")
        dim, flags = struct.unpack("<II", header[4:12])
        payload = fh.read(dim * dim * 8)
    matrix = np.frombuffer(payload, dtype="<c8").reshape(dim, dim).astype(complex)
    return matrix, flags
