"""Exception hierarchy shared by all torsionkit modules."""


class TorsionKitError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(TorsionKitError):
    """Matrix dimensions do not match the requested operation."""


class NotAComplexError(TorsionKitError):
    """A pair of consecutive boundary maps does not compose to zero."""


class GramError(TorsionKitError):
    """A Gram matrix is not symmetric positive definite."""


class NonAnalyticCurveError(TorsionKitError):
    """A Newton polygon edge has fractional slope: the eigenvalue curves
    are not analytic in the deformation parameter."""


class OddVanishingOrderError(TorsionKitError):
    """A Newton polygon edge has odd integer slope, impossible for
    eigenvalue curves of a positive semidefinite family."""


class InternalConsistencyError(TorsionKitError):
    """Two independent computation routes disagreed.  Always a bug or a
    violated structural assumption, never a user input problem."""


class FiltrationError(TorsionKitError):
    """A filtration is not an increasing chain of boundary-stable subspaces."""


class GeometryRequiredError(TorsionKitError):
    """A geometric integral is required but was neither supplied nor
    covered by a sanctioned vanishing default."""


class SpectralGapError(TorsionKitError):
    """Float eigenvalues straddle the zero-mode threshold too closely to
    classify reliably."""


class ConvergenceError(TorsionKitError):
    """The iterative eigensolver did not converge."""


class InputError(TorsionKitError):
    """An input file or JSON document does not match its schema."""
