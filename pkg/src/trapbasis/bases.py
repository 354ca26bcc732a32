"""Exponential-type basis families and the isometries that transport them.

Two phase conventions coexist and are recorded per family: trapezoid
families use ``exp(i*pi*(n x / g_n(y) + 2 k y))`` on height-one trapezoids,
while multi-rectangle and radial families use ``exp(2*pi*i*(...))``.  All
element frequencies are stored internally in raw angular form (radians per
unit length), so mixing conventions is impossible downstream: only the
constructors here convert.

The ``n = 0`` column is always x-independent: perturbations never apply at
``n = 0``, sidestepping the undefined ratio there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .domains import (
    MultiInterval,
    ProfileFunction,
    SphericalTrapezoid,
    StepProfile,
    Trapezoid,
    UNIT_INTERVAL,
)
from .errors import DomainError

TWO_PI = 2.0 * math.pi


def window_indices(n_window: int, k_window: int) -> tuple[tuple[int, int], ...]:
    """Lexicographic truncation ``{(n, k): |n| <= N, |k| <= K}``, n outer."""
    return tuple(
        (n, k)
        for n in range(-n_window, n_window + 1)
        for k in range(-k_window, k_window + 1)
    )


# ---------------------------------------------------------------------------
# perturbation families g_n
# ---------------------------------------------------------------------------


class PerturbationFamily:
    """Per-column replacement ``g_n`` for the profile in the x-frequency.

    Subclasses implement ``g(n, y)`` for ``n != 0``; the ``n = 0`` element is
    defined to be x-independent and never consults ``g``.
    """

    label = "perturbation"

    def g(self, n: int, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> str:
        return self.label


@dataclass(frozen=True)
class CallablePerturbation(PerturbationFamily):
    fn: Callable[[int, np.ndarray], np.ndarray]
    label: str = "custom"

    def g(self, n, y):
        return np.asarray(self.fn(n, np.asarray(y, dtype=float)), dtype=float)


@dataclass(frozen=True)
class RatioPerturbation(PerturbationFamily):
    """``g_n / f``: pulls a perturbed family back to the unit rectangle.

    If a family on the trapezoid uses frequencies ``n / g_n(y)``, its image
    under the inverse boundary-straightening isometry uses
    ``n f(y) / g_n(y) = n / (g_n(y)/f(y))`` on the rectangle.
    """

    profile: ProfileFunction
    inner: PerturbationFamily

    def g(self, n, y):
        y = np.asarray(y, dtype=float)
        return self.inner.g(n, y) / self.profile(y)

    def describe(self):
        return f"{self.inner.describe()} / profile"


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeparableElement:
    """``w(y) * exp(i*(alpha(y)*x + beta*y))`` with a y-only weight.

    ``alpha`` maps a y-array to raw x angular frequencies; ``beta`` is the
    raw y angular frequency.  ``weight=None`` means weight one.
    """

    index: tuple
    alpha: Callable[[np.ndarray], np.ndarray]
    beta: float
    weight: Callable[[np.ndarray], np.ndarray] | None
    convention: str = "pi"

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        w = 1.0 if self.weight is None else self.weight(y)
        return w * np.exp(1j * (self.alpha(y) * x + self.beta * y))


@dataclass(frozen=True)
class Exponential1D:
    """``amplitude * exp(i*omega*x)`` on a one-dimensional domain."""

    label: int
    omega: float  # raw angular frequency
    amplitude: float = 1.0

    def evaluate(self, x):
        return self.amplitude * np.exp(1j * self.omega * np.asarray(x, dtype=float))


@dataclass(frozen=True)
class CellExponentialElement:
    """Plane exponential restricted to a multi-rectangle, one gain per cell.

    Evaluates to ``amplitude * phases[j] * exp(i*(omega_x x + omega_y y))``
    on cell ``j`` and to zero outside the region.
    """

    index: tuple
    omega_x: float
    omega_y: float
    step: StepProfile
    phases: tuple[complex, ...]
    amplitude: float = 1.0

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        cells = self.step.cell_of(y)
        inside = (y >= 0) & (y <= 1) & (np.abs(x) <= np.asarray(self.step.values)[cells])
        gain = np.asarray(self.phases)[cells]
        wave = np.exp(1j * (self.omega_x * x + self.omega_y * y))
        return np.where(inside, self.amplitude * gain * wave, 0.0)


@dataclass(frozen=True)
class RadialElement:
    """Radial-coordinate element ``w(r, y) * exp(i*(alpha(y) r + beta y))``.

    With the weight enabled this is ``(|S| f(y))^{-1/2} r^{-(d-2)/2}`` times
    the exponential; inner products pair it with the measure
    ``|S| r^{d-2} dr dy``.
    """

    index: tuple
    profile: ProfileFunction
    dimension: int
    sphere_measure: float
    n: int
    beta: float
    weighted: bool

    def alpha(self, y):
        y = np.asarray(y, dtype=float)
        if self.n == 0:
            return np.zeros(y.shape)
        return TWO_PI * self.n / self.profile(y)

    def evaluate(self, r, y):
        r = np.asarray(r, dtype=float)
        y = np.asarray(y, dtype=float)
        wave = np.exp(1j * (self.alpha(y) * r + self.beta * y))
        if not self.weighted:
            return wave
        w = (self.sphere_measure * self.profile(y)) ** -0.5
        w = w * r ** (-(self.dimension - 2) / 2.0)
        return w * wave


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrapezoidFamily:
    """Doubly indexed family ``w(y) exp(i pi (n x / g_n(y) + 2 k y))``.

    ``weighted=True`` applies ``(2 f(y))^{-1/2}``, which orthonormalizes the
    unperturbed family.  Without a perturbation, ``g_n = f`` and the
    x-frequency satisfies ``freq_x(n, y) * f(y) = n`` exactly.
    """

    trapezoid: Trapezoid
    n_window: int
    k_window: int
    weighted: bool = False
    perturbation: PerturbationFamily | None = None
    convention: str = field(default="pi", init=False)

    def __post_init__(self):
        if self.n_window < 0 or self.k_window < 0:
            raise DomainError("truncation windows must be nonnegative")
        if self.perturbation is not None:
            self._reject_vanishing_g()

    def _reject_vanishing_g(self):
        y = np.linspace(0.0, 1.0, 257)
        for n in range(-self.n_window, self.n_window + 1):
            if n == 0:
                continue
            g = self.perturbation.g(n, y)
            if np.min(np.abs(g)) < 1e-12 * max(1.0, self.trapezoid.profile.upper):
                raise DomainError(f"perturbation g_{n} has (near-)zeros")

    @property
    def profile(self) -> ProfileFunction:
        return self.trapezoid.profile

    @property
    def indices(self) -> tuple[tuple[int, int], ...]:
        return window_indices(self.n_window, self.k_window)

    def x_frequency(self, n: int, y) -> np.ndarray:
        """The function multiplying ``pi * x`` in the phase: ``n / g_n(y)``."""
        y = np.asarray(y, dtype=float)
        if n == 0:
            return np.zeros(y.shape)
        g = (
            self.profile(y)
            if self.perturbation is None
            else self.perturbation.g(n, y)
        )
        return n / g

    def alpha(self, n: int, y) -> np.ndarray:
        return math.pi * self.x_frequency(n, y)

    def beta(self, k: int) -> float:
        return TWO_PI * k

    def weight_values(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if not self.weighted:
            return np.ones(y.shape)
        return (2.0 * self.profile(y)) ** -0.5

    def element(self, n: int, k: int) -> SeparableElement:
        weight = self.weight_values if self.weighted else None
        return SeparableElement(
            index=(n, k),
            alpha=lambda y, _n=n: self.alpha(_n, y),
            beta=self.beta(k),
            weight=weight,
            convention=self.convention,
        )

    def restrict(self, n_window: int, k_window: int) -> "TrapezoidFamily":
        if n_window > self.n_window or k_window > self.k_window:
            raise DomainError("restriction must shrink the truncation")
        return TrapezoidFamily(
            self.trapezoid, n_window, k_window, self.weighted, self.perturbation
        )

    def to_dict(self, sample_grid: int = 65) -> dict:
        y = np.linspace(0.0, 1.0, sample_grid)
        table = {}
        if self.perturbation is not None:
            for n in range(-self.n_window, self.n_window + 1):
                if n != 0:
                    table[str(n)] = self.perturbation.g(n, y).tolist()
        return {
            "kind": "trapezoid",
            "convention": self.convention,
            "n_window": self.n_window,
            "k_window": self.k_window,
            "weighted": self.weighted,
            "profile": self.profile.label,
            "perturbation": None
            if self.perturbation is None
            else self.perturbation.describe(),
            "perturbation_table_grid": sample_grid if table else None,
            "perturbation_table": table or None,
        }


def trapezoid_basis(
    trapezoid: Trapezoid | ProfileFunction,
    n_window: int,
    k_window: int,
    *,
    perturbation: PerturbationFamily | None = None,
    weighted: bool = False,
) -> TrapezoidFamily:
    """Family ``exp(i pi (n x / g_n(y) + 2 k y))`` over a trapezoid.

    With ``perturbation=None`` the frequencies are ``n / f(y)``; weighted,
    that family is orthonormal.  Perturbations with essential zeros are
    rejected up front.
    """
    if isinstance(trapezoid, ProfileFunction):
        trapezoid = Trapezoid(trapezoid)
    return TrapezoidFamily(trapezoid, n_window, k_window, weighted, perturbation)


@dataclass(frozen=True)
class BoxHarmonicsFamily:
    """Periodic harmonics of a bounding box, optionally restricted.

    Elements ``exp(i*(2 pi n x / W + 2 pi m y / H))`` over the box
    ``[x0, x1] x [y0, y1]``; ``restricted_to`` replaces the integration
    region by a trapezoid inside the box.
    """

    box: tuple[tuple[float, float], tuple[float, float]]
    n_window: int
    m_window: int
    restricted_to: Trapezoid | None = None

    def __post_init__(self):
        (x0, x1), (y0, y1) = self.box
        if not (x0 < x1 and y0 < y1):
            raise DomainError("degenerate bounding box")
        if self.restricted_to is not None:
            prof = self.restricted_to.profile
            if prof.upper > min(-x0, x1) + 1e-12 or y0 > 0.0 or y1 < 1.0:
                raise DomainError("trapezoid is not contained in the box")

    @property
    def widths(self) -> tuple[float, float]:
        (x0, x1), (y0, y1) = self.box
        return (x1 - x0, y1 - y0)

    @property
    def area(self) -> float:
        w, h = self.widths
        return w * h

    @property
    def indices(self) -> tuple[tuple[int, int], ...]:
        return window_indices(self.n_window, self.m_window)

    def alpha(self, n: int, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.full(y.shape, TWO_PI * n / self.widths[0])

    def beta(self, m: int) -> float:
        return TWO_PI * m / self.widths[1]

    def element(self, n: int, m: int) -> SeparableElement:
        return SeparableElement(
            index=(n, m),
            alpha=lambda y, _n=n: self.alpha(_n, y),
            beta=self.beta(m),
            weight=None,
            convention="raw",
        )


@dataclass(frozen=True)
class RadialFamily:
    """Family ``exp(2 pi i (n r / f(y) + k y))`` on a spherical trapezoid."""

    solid: SphericalTrapezoid
    n_window: int
    k_window: int
    weighted: bool = True

    @property
    def indices(self) -> tuple[tuple[int, int], ...]:
        return window_indices(self.n_window, self.k_window)

    def element(self, n: int, k: int) -> RadialElement:
        return RadialElement(
            index=(n, k),
            profile=self.solid.profile,
            dimension=self.solid.dimension,
            sphere_measure=self.solid.sphere_measure,
            n=n,
            beta=TWO_PI * k,
            weighted=self.weighted,
        )

    def restrict(self, n_window: int, k_window: int) -> "RadialFamily":
        if n_window > self.n_window or k_window > self.k_window:
            raise DomainError("restriction must shrink the truncation")
        return RadialFamily(self.solid, n_window, k_window, self.weighted)


def spherical_basis(
    solid: SphericalTrapezoid, n_window: int, k_window: int, *, weighted: bool = True
) -> RadialFamily:
    """Radial exponential family on a spherical trapezoid.

    The weighted form ``(|S| f(y))^{-1/2} r^{-(d-2)/2} exp(2 pi i (n r/f + k y))``
    is orthonormal under the measure ``|S| r^{d-2} dr dy``.
    """
    return RadialFamily(solid, n_window, k_window, weighted)


@dataclass(frozen=True)
class MultiIntervalFamily:
    """Exponentials ``exp(2 pi i lambda_k x)`` on a multi-interval.

    ``normalized=True`` scales elements to unit L2 norm, so the Gram of an
    orthogonal selection is exactly the identity.
    """

    interval: MultiInterval
    labels: tuple[int, ...]
    frequencies: tuple[float, ...]  # cycles per unit length
    normalized: bool = True

    def __post_init__(self):
        if len(self.labels) != len(self.frequencies):
            raise DomainError("labels and frequencies must align")

    @property
    def amplitude(self) -> float:
        return self.interval.total_length ** -0.5 if self.normalized else 1.0

    @property
    def indices(self) -> tuple[int, ...]:
        return self.labels

    def element(self, position: int) -> Exponential1D:
        return Exponential1D(
            label=self.labels[position],
            omega=TWO_PI * self.frequencies[position],
            amplitude=self.amplitude,
        )

    def elements(self) -> tuple[Exponential1D, ...]:
        return tuple(self.element(i) for i in range(len(self.labels)))


@dataclass(frozen=True)
class ProductFamily:
    """Tensor products ``v_n(x) * w_{n,m}(y)`` with a per-column y-family."""

    x_domain: MultiInterval
    y_domain: MultiInterval
    pairs: tuple[tuple[tuple[int, int], Exponential1D, Exponential1D], ...]
    selector_label: str = "selector"

    @property
    def indices(self) -> tuple[tuple[int, int], ...]:
        return tuple(idx for idx, _, _ in self.pairs)

    def element(self, position: int):
        idx, ex, ey = self.pairs[position]

        def evaluate(x, y):
            return ex.evaluate(x) * ey.evaluate(y)

        return SeparableProductView(index=idx, x=ex, y=ey, evaluate=evaluate)


@dataclass(frozen=True)
class SeparableProductView:
    index: tuple
    x: Exponential1D
    y: Exponential1D
    evaluate: Callable


def tensor_basis(
    x_family: MultiIntervalFamily,
    y_frequencies: Callable[[int], Sequence[tuple[int, float]]] | Mapping[int, Sequence[tuple[int, float]]],
    *,
    y_domain: MultiInterval = UNIT_INTERVAL,
    normalized: bool = True,
    selector_label: str = "selector",
) -> ProductFamily:
    """Assemble ``{v_n(x) w_{n,m}(y)}`` from a selector of y-frequencies.

    ``y_frequencies`` maps each x-label ``n`` to ``(m_label, cycles)`` pairs;
    it must be defined for every label in the truncation.  The per-column
    dependence is kept explicit in the family metadata.
    """
    if isinstance(y_frequencies, Mapping):
        mapping = y_frequencies
        selector = mapping.__getitem__
    else:
        selector = y_frequencies
    y_amp = y_domain.total_length ** -0.5 if normalized else 1.0
    pairs = []
    for pos, label in enumerate(x_family.labels):
        try:
            rows = list(selector(label))
        except KeyError as exc:
            raise DomainError(f"selector undefined for column {label}") from exc
        if not rows:
            raise DomainError(f"selector returned no frequencies for column {label}")
        ex = x_family.element(pos)
        for m_label, cycles in rows:
            ey = Exponential1D(label=m_label, omega=TWO_PI * cycles, amplitude=y_amp)
            pairs.append(((label, m_label), ex, ey))
    return ProductFamily(
        x_domain=x_family.interval,
        y_domain=y_domain,
        pairs=tuple(pairs),
        selector_label=selector_label,
    )


@dataclass(frozen=True)
class MultiRectFamily:
    """Plane exponentials on a multi-rectangle produced by the tiling lift.

    Elements ``exp(2 pi i (lambda_k x + m y))`` where ``m`` runs over the
    residue class of ``n_k`` mod N; the per-cell phases are all one exactly
    when the residue rule holds, which construction enforces.
    """

    step: StepProfile
    entries: tuple[tuple[int, int, float, int], ...]  # (n_k, h, lambda_k, m)
    normalized: bool = True

    @property
    def area(self) -> float:
        return 2.0 * sum(self.step.values) / self.step.cells

    @property
    def amplitude(self) -> float:
        return self.area**-0.5 if self.normalized else 1.0

    @property
    def indices(self) -> tuple[tuple[int, int], ...]:
        return tuple((nk, h) for nk, h, _, _ in self.entries)

    def element(self, position: int) -> CellExponentialElement:
        nk, h, lam, m = self.entries[position]
        ones = tuple(1.0 + 0.0j for _ in range(self.step.cells))
        return CellExponentialElement(
            index=(nk, h),
            omega_x=TWO_PI * lam,
            omega_y=TWO_PI * m,
            step=self.step,
            phases=ones,
            amplitude=self.amplitude,
        )


# ---------------------------------------------------------------------------
# residue rule for the tiling lift
# ---------------------------------------------------------------------------


def remainder_shift(n_k: int, cells: int, h: int) -> int:
    """Y-frequency ``m = (n_k mod N) + h*N`` compatible with the tiling lift.

    These are exactly the integers congruent to ``n_k`` mod ``N``; the exact
    phase identity ``(j-1)(n_k - m) = 0 (mod N)`` for every cell ``j`` is
    asserted in integer arithmetic before returning.
    """
    if cells < 1:
        raise DomainError("cell count must be a positive integer")
    m = (n_k % cells) + h * cells
    assert phase_identity_holds(n_k, m, cells)
    return m


def phase_identity_holds(n_k: int, m: int, cells: int) -> bool:
    """Exact integer check that every cell's lift phase is a full turn."""
    return all(((j - 1) * (n_k - m)) % cells == 0 for j in range(1, cells + 1))


# ---------------------------------------------------------------------------
# isometries
# ---------------------------------------------------------------------------


def _evaluator_of(source):
    if callable(source):
        return source
    evaluate = getattr(source, "evaluate", None)
    if evaluate is None:
        raise DomainError("source must be callable or expose .evaluate")
    return evaluate


@dataclass(frozen=True)
class RectangleToTrapezoidMap:
    """Boundary straightening ``psi(x, y) -> f(y)^{-1/2} psi(x/f(y), y)``.

    An invertible isometry from L2 of the rectangle [-1,1]x[0,1] onto L2 of
    the trapezoid; evaluation outside the trapezoid is rejected.
    """

    profile: ProfileFunction
    kind: str = field(default="rectangle_to_trapezoid", init=False)

    def apply(self, source) -> Callable:
        psi = _evaluator_of(source)

        def lifted(x, y):
            x = np.asarray(x, dtype=float)
            y = np.asarray(y, dtype=float)
            f = self.profile(y)
            if np.any((y < 0) | (y > 1) | (np.abs(x) > f)):
                raise DomainError("evaluation outside the trapezoid")
            return f**-0.5 * psi(x / f, y)

        return lifted


@dataclass(frozen=True)
class MultiRectTilingMap:
    """Cell-translation lift from ``I x (0,1)`` onto a multi-rectangle.

    Composes the per-cell translations with the height dilation ``1/N -> 1``
    (Jacobian ``sqrt(N)``), so it is an exact isometry onto L2 of the
    un-dilated multi-rectangle.  Points outside the region evaluate to zero.
    """

    step: StepProfile
    kind: str = field(default="multirect_tiling", init=False)

    @property
    def jacobian(self) -> float:
        return math.sqrt(self.step.cells)

    def apply(self, source) -> Callable:
        psi = _evaluator_of(source)
        n = self.step.cells
        values = np.asarray(self.step.values)

        def lifted(x, y):
            x = np.asarray(x, dtype=float)
            y = np.asarray(y, dtype=float)
            cells = self.step.cell_of(np.clip(y, 0.0, 1.0))
            inside = (y >= 0) & (y <= 1) & (np.abs(x) <= values[cells])
            u = x + 2.0 * cells
            t = n * y - cells
            out = self.jacobian * psi(u, np.clip(t, 0.0, 1.0))
            return np.where(inside, out, 0.0)

        return lifted


@dataclass(frozen=True)
class RadialLiftMap:
    """Radial straightening onto a spherical trapezoid.

    ``psi(u, y) -> (|S| f(y))^{-1/2} r^{-(d-2)/2} psi(r/f(y), y)`` evaluated
    at radius ``r``; an isometry onto the radial L2 space under the measure
    ``|S| r^{d-2} dr dy``.
    """

    solid: SphericalTrapezoid
    kind: str = field(default="radial", init=False)

    def apply(self, source) -> Callable:
        psi = _evaluator_of(source)
        prof = self.solid.profile
        d = self.solid.dimension
        measure = self.solid.sphere_measure

        def lifted(r, y):
            r = np.asarray(r, dtype=float)
            y = np.asarray(y, dtype=float)
            f = prof(y)
            if np.any((y < 0) | (y > 1) | (r < 0) | (r > f)):
                raise DomainError("evaluation outside the spherical trapezoid")
            w = (measure * f) ** -0.5 * r ** (-(d - 2) / 2.0)
            return w * psi(r / f, y)

        return lifted


IsometryMap = RectangleToTrapezoidMap | MultiRectTilingMap | RadialLiftMap


def lift_by_isometry(isometry: IsometryMap, source) -> Callable:
    """Evaluator of the isometric image of ``source`` on the target domain."""
    return isometry.apply(source)
