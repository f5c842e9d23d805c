"""Exception types raised across the toolkit."""


class MaslovKitError(Exception):
    """Base class; every error carries a short machine-readable code."""
    code = "error"


class AmbiguousRank(MaslovKitError):
    code = "ambiguous_rank"


class OrderExceeded(MaslovKitError):
    code = "order_exceeded"


class NonIsolated(MaslovKitError):
    code = "non_isolated"


class NotNilpotent(MaslovKitError):
    code = "not_nilpotent"


class NotGSymmetric(MaslovKitError):
    code = "not_g_symmetric"


class NotAnEigenvalue(MaslovKitError):
    code = "not_an_eigenvalue"


class NotTransversal(MaslovKitError):
    code = "not_transversal"


class RefinementExhausted(MaslovKitError):
    code = "refinement_exhausted"


class EntirelySingular(MaslovKitError):
    code = "entirely_singular"


class NotSymplectic(MaslovKitError):
    code = "not_symplectic"


class NotStabilized(MaslovKitError):
    code = "not_stabilized"


class M0TooSmall(MaslovKitError):
    code = "m0_too_small"


class DimensionMismatch(MaslovKitError, ValueError):
    code = "dimension_mismatch"


class InconsistentData(MaslovKitError, ValueError):
    code = "inconsistent_data"
