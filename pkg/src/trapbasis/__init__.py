"""Exponential-type Riesz bases on trapezoid domains, with numerical
certification via truncated Gram spectra, quarter-threshold stability
checks, and dual-frame reconstruction experiments."""

from .bases import (
    BoxHarmonicsFamily,
    CallablePerturbation,
    Exponential1D,
    MultiIntervalFamily,
    MultiRectFamily,
    MultiRectTilingMap,
    PerturbationFamily,
    ProductFamily,
    RadialFamily,
    RadialLiftMap,
    RectangleToTrapezoidMap,
    SeparableElement,
    TrapezoidFamily,
    lift_by_isometry,
    phase_identity_holds,
    remainder_shift,
    spherical_basis,
    tensor_basis,
    trapezoid_basis,
    window_indices,
)
from .domains import (
    MultiInterval,
    ProfileFunction,
    SphericalTrapezoid,
    StepApproximation,
    StepProfile,
    Trapezoid,
    approximate_profile,
    build_multiinterval,
    sphere_surface_measure,
    translation_plan,
    unit_rectangle,
    validate_profile,
)
from .errors import (
    AdmissibilityError,
    ApproximationError,
    ConfigError,
    DomainError,
    ExpressionError,
    GridRefinementError,
    IllConditionedError,
    QuadratureError,
    SelectionSearchError,
    TrapBasisError,
)
from .gram import (
    BoxTarget,
    ElementTarget,
    GramReport,
    ReconstructionReport,
    RestrictedFrameReport,
    cross_gram,
    frame_bounds,
    gram_matrix,
    inner_product,
    read_gram_binary,
    read_gram_csv,
    reconstruct,
    restricted_frame_check,
    write_gram_binary,
    write_gram_csv,
)
from .multirect import (
    BasisSelection,
    MultiRectBuild,
    build_multirect_basis,
    search_interval_basis,
    tensor_counterpart,
)
from .stability import (
    InghamPerturbation,
    KadecReport,
    MarginPerturbation,
    PwInequalityResult,
    ingham_family,
    kadec_check,
    pw_bound,
    pw_inequality_test,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
