"""Exception types shared across the package."""


class RobustmapsError(Exception):
    """Base class for all package-specific errors."""


class InvalidCardinality(RobustmapsError):
    """A state space was given a cardinality below 1 or too few nodes."""


class InvalidK(RobustmapsError):
    """Robustness level k outside the range 0..n."""


class InvalidNode(RobustmapsError):
    """Node id outside 1..n."""


class InvalidValue(RobustmapsError):
    """State value outside the node's alphabet."""


class NotCoherent(RobustmapsError):
    """Operation requires a coherent robustness specification."""


class NotSaturated(RobustmapsError):
    """Operation requires a saturated robustness specification."""


class StateSpaceTooLarge(RobustmapsError):
    """Exhaustive routine refused to run on a space above its guard size."""


class EnumerationTimeout(RobustmapsError):
    """Exhaustive enumeration exceeded its time budget."""


class NotBinary(RobustmapsError):
    """Operation requires all input alphabets to be binary."""


class InconsistentStructure(RobustmapsError):
    """Blocks do not equal the connected components of the induced graph."""


class NonPositiveEntry(RobustmapsError):
    """A kernel entry expected to be strictly positive is zero or negative.

    Attributes carry the offending location when available.
    """

    def __init__(self, message, *, domain=None, state=None, output=None):
        super().__init__(message)
        self.domain = domain
        self.state = state
        self.output = output


class NotConstantOnBlock(RobustmapsError):
    """A kernel expected to be constant on a block takes two distinct rows.

    ``witness`` is a pair of input-state indices with differing rows.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class IndexMismatch(RobustmapsError):
    """Parameter shapes do not line up with the structure's blocks."""


class InvalidWitness(RobustmapsError):
    """Approximation witness data is inconsistent with the distribution."""


class EmptyDistribution(RobustmapsError):
    """A distribution with empty support where support is required."""
