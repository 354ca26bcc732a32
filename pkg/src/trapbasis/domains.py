"""Domain types: trapezoids, step profiles, multi-intervals, spherical trapezoids.

A trapezoid here is the plane region ``{|x| <= f(y), 0 <= y <= 1}`` bounded
by a positive profile ``f`` with certified bounds ``0 < lower <= f <= upper``.
Regular step profiles (equal-length cells, half-open on the left, last cell
closed) bound multi-rectangles, which unfold into multi-intervals under the
cell translations returned by :func:`translation_plan`.

All types are immutable value objects; the operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import AdmissibilityError, ApproximationError, DomainError
from .expressions import compile_expression

#: default number of audit samples for sup-norm certification
DEFAULT_AUDIT_GRID = 10_000

#: largest denominator tried when aligning declared jump points to cells
MAX_JUMP_DENOMINATOR = 128


def _as_vectorized(fn: Callable) -> Callable:
    """Return ``fn`` if it maps arrays to arrays, else a vectorized wrapper."""
    probe = np.array([0.25, 0.75])
    try:
        out = np.asarray(fn(probe), dtype=float)
        if out.shape == probe.shape:
            return fn
    except Exception:
        pass
    vec = np.vectorize(lambda t: float(fn(float(t))), otypes=[float])

    def wrapped(y):
        return vec(np.asarray(y, dtype=float))

    return wrapped


@dataclass(frozen=True)
class StepProfile:
    """Regular step function on [0, 1]: value ``values[j-1]`` on cell ``j``.

    Cells are ``[(j-1)/N, j/N)`` for ``j < N`` and ``[(N-1)/N, 1]`` for the
    last one, so evaluation is right-continuous at interior boundaries.
    """

    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise DomainError("step profile needs at least one cell")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if min(self.values) <= 0.0:
            raise DomainError("step values must be positive")

    @property
    def cells(self) -> int:
        return len(self.values)

    def cell_of(self, y) -> np.ndarray:
        """Zero-based cell index per sample, honoring the half-open rule."""
        y = np.asarray(y, dtype=float)
        idx = np.floor(y * self.cells).astype(int)
        return np.clip(idx, 0, self.cells - 1)

    def __call__(self, y):
        arr = np.asarray(self.values)[self.cell_of(y)]
        return arr if np.ndim(y) else float(arr)

    def cell_bounds(self, j: int) -> tuple[float, float]:
        """(y_lo, y_hi) of one-based cell ``j``."""
        n = self.cells
        return ((j - 1) / n, j / n)

    def to_profile(self, label: str = "step") -> "ProfileFunction":
        vals = np.asarray(self.values)
        jumps = tuple(
            j / self.cells
            for j in range(1, self.cells)
            if self.values[j] != self.values[j - 1]
        )
        return ProfileFunction(
            evaluator=self.__call__,
            lower=float(vals.min()),
            upper=float(vals.max()),
            jumps=jumps,
            label=label,
            step=self,
        )


@dataclass(frozen=True)
class ProfileFunction:
    """Boundary profile with certified positive bounds.

    ``evaluator`` must accept numpy arrays of points in [0, 1].  At declared
    jump points the evaluator is expected to be right-continuous (the step
    profile convention); declared jumps let the approximation routine align
    cell boundaries.
    """

    evaluator: Callable
    lower: float
    upper: float
    jumps: tuple[float, ...] = ()
    label: str = "profile"
    step: StepProfile | None = None

    def __post_init__(self):
        if not (0.0 < self.lower <= self.upper) or not math.isfinite(self.upper):
            raise AdmissibilityError(
                f"bounds must satisfy 0 < lower <= upper < inf, got "
                f"({self.lower}, {self.upper})"
            )
        object.__setattr__(
            self, "jumps", tuple(sorted(float(p) for p in self.jumps))
        )
        for p in self.jumps:
            if not 0.0 < p < 1.0:
                raise DomainError(f"jump point {p} outside (0, 1)")
        object.__setattr__(self, "evaluator", _as_vectorized(self.evaluator))

    def __call__(self, y):
        out = np.asarray(self.evaluator(np.asarray(y, dtype=float)), dtype=float)
        return out if np.ndim(y) else float(out)

    @property
    def is_continuous(self) -> bool:
        return not self.jumps

    @property
    def continuity_class(self) -> str:
        return "continuous" if self.is_continuous else "piecewise_continuous"

    # --- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, value: float, label: str | None = None) -> "ProfileFunction":
        value = float(value)
        step = StepProfile((value,))
        return cls(
            evaluator=lambda y: np.full(np.shape(y), value),
            lower=value,
            upper=value,
            label=label or f"constant {value:g}",
            step=step,
        )

    @classmethod
    def from_expression(
        cls, text: str, lower: float | None = None, upper: float | None = None
    ) -> "ProfileFunction":
        fn = compile_expression(text)
        if lower is None or upper is None:
            probe = fn(np.linspace(0.0, 1.0, 4097))
            lower = float(probe.min()) if lower is None else lower
            upper = float(probe.max()) if upper is None else upper
        return cls(evaluator=fn, lower=lower, upper=upper, label=text)

    @classmethod
    def from_samples(
        cls,
        ys: Sequence[float],
        fs: Sequence[float],
        lower: float | None = None,
        upper: float | None = None,
    ) -> "ProfileFunction":
        ys = np.asarray(ys, dtype=float)
        fs = np.asarray(fs, dtype=float)
        if ys.ndim != 1 or ys.shape != fs.shape or ys.size < 2:
            raise DomainError("samples need matching 1-d arrays of length >= 2")
        if np.any(np.diff(ys) <= 0):
            raise DomainError("sample abscissae must be strictly increasing")
        lo = float(fs.min()) if lower is None else lower
        hi = float(fs.max()) if upper is None else upper
        return cls(
            evaluator=lambda y: np.interp(np.asarray(y, dtype=float), ys, fs),
            lower=lo,
            upper=hi,
            label="interpolated samples",
        )

    @classmethod
    def from_config(cls, cfg: dict) -> "ProfileFunction":
        kind = cfg.get("kind")
        if kind == "closed_form":
            return cls.from_expression(
                cfg["expr"], cfg.get("lower"), cfg.get("upper")
            )
        if kind == "step":
            return StepProfile(tuple(cfg["values"])).to_profile()
        if kind == "samples":
            return cls.from_samples(
                cfg["ys"], cfg["fs"], cfg.get("lower"), cfg.get("upper")
            )
        raise DomainError(f"unknown profile kind {kind!r}")


@dataclass(frozen=True)
class Trapezoid:
    """Plane region ``{|x| <= f(y), 0 <= y <= 1}`` bounded by ``profile``."""

    profile: ProfileFunction

    @property
    def area(self) -> float:
        if self.profile.step is not None:
            vals = self.profile.step.values
            return 2.0 * sum(vals) / len(vals)
        grid, w = np.polynomial.legendre.leggauss(64)
        y = 0.5 * (grid + 1.0)
        return float(np.sum(w * self.profile(y)))  # = ∫ 2 f(y) dy

    def contains(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (y >= 0.0) & (y <= 1.0) & (np.abs(x) <= self.profile(np.clip(y, 0, 1)))


def unit_rectangle() -> Trapezoid:
    """The rectangle [-1, 1] x [0, 1] as a trapezoid with unit profile."""
    return Trapezoid(ProfileFunction.constant(1.0, label="rectangle"))


@dataclass(frozen=True)
class MultiInterval:
    """Ordered, pairwise-disjoint open segments of the real line."""

    segments: tuple[tuple[float, float], ...]

    def __post_init__(self):
        segs = tuple((float(a), float(b)) for a, b in self.segments)
        if not segs:
            raise DomainError("multi-interval needs at least one segment")
        for a, b in segs:
            if not a < b:
                raise DomainError(f"segment ({a}, {b}) is empty")
        for (_, b), (a2, _) in zip(segs, segs[1:]):
            if b > a2 + 1e-12:
                raise DomainError("segments must be disjoint and ordered")
        object.__setattr__(self, "segments", segs)

    @property
    def total_length(self) -> float:
        return sum(b - a for a, b in self.segments)

    @property
    def bounds(self) -> tuple[float, float]:
        return (self.segments[0][0], self.segments[-1][1])

    @property
    def centered_half_width(self) -> float:
        lo, hi = self.bounds
        return 0.5 * (hi - lo)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = np.zeros(x.shape, dtype=bool)
        for a, b in self.segments:
            inside |= (x > a) & (x < b)
        return inside


UNIT_INTERVAL = MultiInterval(((0.0, 1.0),))


def sphere_surface_measure(dimension: int) -> float:
    """Surface measure of the unit sphere in ``R^(d-1)``, with the d = 2
    convention that the 0-sphere carries measure 1."""
    if dimension == 2:
        return 1.0
    m = dimension - 1  # sphere S^(d-2) sits in R^(d-1)
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


@dataclass(frozen=True)
class SphericalTrapezoid:
    """Solid of revolution ``{|x'| <= f(y), 0 <= y <= 1}`` in dimension d."""

    profile: ProfileFunction
    dimension: int
    sphere_measure: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 2:
            raise DomainError("dimension must be an integer >= 2")
        object.__setattr__(self, "dimension", int(self.dimension))
        expected = sphere_surface_measure(self.dimension)
        if self.sphere_measure is None:
            object.__setattr__(self, "sphere_measure", expected)
        elif not math.isclose(self.sphere_measure, expected, rel_tol=1e-12):
            raise DomainError(
                f"sphere measure {self.sphere_measure} does not match the "
                f"closed form {expected} for dimension {self.dimension}"
            )


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProfileValidation:
    """Empirical min/max of a profile plus samples outside [lower, upper]."""

    minimum: float
    maximum: float
    violations: tuple[tuple[float, float], ...]
    grid_size: int

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "minimum": self.minimum,
            "maximum": self.maximum,
            "grid_size": self.grid_size,
            "violations": [list(v) for v in self.violations],
            "ok": self.ok,
        }


def validate_profile(profile: ProfileFunction, grid_size: int = 2048) -> ProfileValidation:
    """Sample the profile on a dense grid and audit its declared bounds.

    Raises :class:`AdmissibilityError` (with the report attached) when the
    empirical minimum is nonpositive; bound violations are merely listed.
    """
    if grid_size < 2:
        raise DomainError("grid_size must be at least 2")
    grid = np.linspace(0.0, 1.0, grid_size)
    vals = profile(grid)
    slack = 1e-12 * max(1.0, profile.upper)
    bad = (vals < profile.lower - slack) | (vals > profile.upper + slack)
    report = ProfileValidation(
        minimum=float(vals.min()),
        maximum=float(vals.max()),
        violations=tuple(zip(grid[bad].tolist(), vals[bad].tolist())),
        grid_size=grid_size,
    )
    if report.minimum <= 0.0:
        raise AdmissibilityError(
            f"profile min {report.minimum:g} is nonpositive on the grid", report
        )
    return report


@dataclass(frozen=True)
class StepApproximation:
    """A certified regular step approximation of a profile.

    ``scale`` records the internal normalization constant (the empirical sup
    of the profile); both reported sup errors are measured in the original
    scale on the audit grid and certified strictly below ``bound``.
    """

    step: StepProfile
    order: int
    partitions: int
    scale: float
    sup_inverse_error: float
    sup_value_error: float
    bound: float
    audit_grid_size: int

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "partitions": self.partitions,
            "scale": self.scale,
            "sup_inverse_error": self.sup_inverse_error,
            "sup_value_error": self.sup_value_error,
            "bound": self.bound,
            "audit_grid_size": self.audit_grid_size,
            "values": list(self.step.values),
        }


def _jump_aligned_base(jumps: Sequence[float]) -> int:
    """Smallest cell count whose boundaries hit every declared jump."""
    for q in range(1, MAX_JUMP_DENOMINATOR + 1):
        if all(abs(p * q - round(p * q)) < 1e-9 for p in jumps):
            return q
    raise ApproximationError(
        "declared jump points cannot be aligned with cell boundaries "
        f"(denominators up to {MAX_JUMP_DENOMINATOR} tried)"
    )


def approximate_profile(
    profile: ProfileFunction,
    order: int,
    *,
    audit_grid_size: int = DEFAULT_AUDIT_GRID,
    max_partitions: int = 1 << 20,
) -> StepApproximation:
    """Certified regular step approximation with sup errors below ``1/(4n)``.

    Cell values sample the profile at cell left endpoints.  The partition
    count doubles (starting from the jump-aligned base) until both
    ``sup |1/s - 1/f|`` and ``sup |s - f|`` fall strictly below ``1/(4n)``
    on the audit grid, in the profile's original scale.
    """
    if order < 1:
        raise DomainError("approximation order must be a positive integer")
    grid = np.linspace(0.0, 1.0, audit_grid_size)
    fvals = profile(grid)
    if fvals.min() <= 0.0:
        raise AdmissibilityError("profile is nonpositive on the audit grid")
    scale = float(fvals.max())
    bound = 1.0 / (4.0 * order)
    inv_f = 1.0 / fvals

    base = 1 if profile.is_continuous else _jump_aligned_base(profile.jumps)
    partitions = base
    while partitions <= max_partitions:
        lefts = np.arange(partitions) / partitions
        step = StepProfile(tuple(profile(lefts)))
        svals = np.asarray(step.values)[step.cell_of(grid)]
        err_inv = float(np.max(np.abs(1.0 / svals - inv_f)))
        err_val = float(np.max(np.abs(svals - fvals)))
        if err_inv < bound and err_val < bound:
            return StepApproximation(
                step=step,
                order=order,
                partitions=partitions,
                scale=scale,
                sup_inverse_error=err_inv,
                sup_value_error=err_val,
                bound=bound,
                audit_grid_size=audit_grid_size,
            )
        partitions *= 2
    raise ApproximationError(
        f"no partition count up to {max_partitions} certifies the 1/(4n) "
        f"bound for order {order}; profile may be under-resolved or have "
        "mishandled jump points"
    )


def build_multiinterval(step: StepProfile) -> MultiInterval:
    """Unfold a multi-rectangle's cells into the disjoint union
    ``I = U_j (-b_j + 2(j-1), b_j + 2(j-1))``.

    Requires every ``b_j <= 1``; adjacent segments may touch but not overlap,
    and the union sits inside ``(-1, 2N - 1)``.
    """
    vals = step.values
    if max(vals) > 1.0 + 1e-12:
        raise DomainError("multi-interval construction needs all values <= 1")
    segments = tuple(
        (-b + 2.0 * j, b + 2.0 * j) for j, b in enumerate(vals)
    )
    interval = MultiInterval(segments)
    lo, hi = interval.bounds
    n = step.cells
    if lo < -1.0 - 1e-12 or hi > 2.0 * n - 1.0 + 1e-12:
        raise DomainError("unfolded interval escaped (-1, 2N - 1)")
    return interval


def translation_plan(step: StepProfile) -> tuple[tuple[float, float], ...]:
    """Cell translations ``v_j = (2(j-1), -(j-1))`` in unit-height scaling.

    Applying ``v_j`` to the (height-dilated) cell ``(-b_j, b_j) x (j-1, j)``
    lands it on ``(-b_j + 2(j-1), b_j + 2(j-1)) x (0, 1)``.
    """
    return tuple((2.0 * j, -float(j)) for j in range(step.cells))
