"""Exception hierarchy for trapbasis.

Every exception carries a short machine-readable ``code`` so the CLI can
emit structured error payloads.  Honest mathematical negatives (a search
that misses its threshold, a boundary stability verdict) are *not* raised
as errors; they travel through reports and exit codes instead.
"""


class TrapBasisError(Exception):
    """Base class for all package errors."""

    code = "error"


class AdmissibilityError(TrapBasisError):
    """Profile violates positivity on the validation grid."""

    code = "inadmissible-profile"

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ExpressionError(TrapBasisError):
    """Rejected closed-form profile expression."""

    code = "bad-expression"


class ApproximationError(TrapBasisError):
    """Step approximation could not be certified within the partition cap."""

    code = "approximation-failed"


class GridRefinementError(TrapBasisError):
    """Grid sup estimates changed too much under one refinement."""

    code = "grid-too-coarse"


class QuadratureError(TrapBasisError):
    """Adaptive quadrature hit its refinement cap before converging."""

    code = "quadrature-failed"

    def __init__(self, message, estimate=None, values=None):
        super().__init__(message)
        self.estimate = estimate
        self.values = values


class IllConditionedError(TrapBasisError):
    """Gram system too ill-conditioned for a meaningful solve."""

    code = "ill-conditioned"


class SelectionSearchError(TrapBasisError):
    """No frequency selection met the requested condition-number bound."""

    code = "search-miss"

    def __init__(self, message, best_condition=None, best_indices=None):
        super().__init__(message)
        self.best_condition = best_condition
        self.best_indices = tuple(best_indices) if best_indices is not None else None


class DomainError(TrapBasisError):
    """Mismatched domains, conventions, or element provenance."""

    code = "domain-mismatch"


class ConfigError(TrapBasisError):
    """Config file failed schema validation or refers to unknown kinds."""

    code = "bad-config"
