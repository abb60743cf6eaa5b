"""Error hierarchy for the Floquet laboratory.

Domain errors do not derive from ValueError; raised inside a pydantic validator
they propagate with their own type.
"""
from typing import List, Tuple


class FloquetLabError(Exception):
    """Base class for every laboratory error."""

    pass


# Linear algebra
class NonHermitianInput(FloquetLabError):
    """Raised when a matrix fails the Hermiticity invariant."""

    pass


class ConvergenceFailure(FloquetLabError):
    """Raised when an eigensolver stalls or fails its reconstruction check."""

    pass


class NonUnitaryInput(FloquetLabError):
    """Raised when a matrix fails the unitarity invariant."""

    pass


class SingularInput(FloquetLabError):
    """Raised when a polar factor is requested for a (numerically) singular matrix."""

    pass


# Models
class GeneratorNotAvailable(FloquetLabError):
    """Raised when a model exposes no pointwise H(t)."""

    pass


class KickInstant(FloquetLabError):
    """Raised when H(t) is requested exactly at a delta kick."""

    pass


class NoClosedForm(FloquetLabError):
    """Raised when a model has no exact propagator."""

    pass


class IndexOutOfSequence(FloquetLabError):
    """Raised when a kick index lies outside the supplied kick sequence."""

    pass


class NotPeriodic(FloquetLabError):
    """Raised when a periodic-only operation is applied to an aperiodic model."""

    pass


class DerivativeNotAvailable(FloquetLabError):
    """Raised when V'(t) is requested from a model that does not expose it."""

    pass


# Propagation
class NormDriftExceeded(FloquetLabError):
    """Raised when an orbit loses norm beyond the drift limit (step too large)."""

    pass


class TimeNotOnGrid(FloquetLabError):
    """Raised when a requested time is not a node of the sampling grid."""

    pass


class NotAnEigenvector(FloquetLabError):
    """Raised when an eigen-relation residual exceeds its tolerance."""

    pass


# Spectral analysis
class IncompleteBasis(FloquetLabError):
    """Raised when an expansion basis does not span the space."""

    pass


class AliasedQuadrature(FloquetLabError):
    """Raised when too few quadrature points are requested for the Fourier cutoff."""

    pass


class ExpansionResidualTooLarge(FloquetLabError):
    """Raised when a vector is not captured by the retained eigenbasis."""

    pass


# Diagnostics
class GridTooCoarse(FloquetLabError):
    """Raised when a sampling grid could miss the deviations being measured."""

    pass


class GridMismatch(FloquetLabError):
    """Raised when two series or states live on different grids."""

    pass


class HorizonTooShort(FloquetLabError):
    """Raised when a series does not span enough decades of time."""

    pass


# Enlarged space
class ShiftMismatch(FloquetLabError):
    """Raised when the torus shift and the sampled data disagree."""

    pass


class DimensionTooLarge(FloquetLabError):
    """Raised when an enlarged-space operator exceeds the dense size limit."""

    pass


# Configuration
class ConfigInvalid(FloquetLabError):
    """Raised when a scenario configuration fails validation."""

    def __init__(self, problems: List[Tuple[str, str]]):
        self.problems = problems
        summary = "; ".join(f"{path}: {message}" for path, message in problems)
        super().__init__(f"Invalid configuration: {summary}")
