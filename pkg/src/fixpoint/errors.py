"""Exception types shared across the toolkit."""


class FixpointError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatchError(FixpointError):
    """Operand shapes are incompatible."""


class NotSquareError(FixpointError):
    """Operation requires a square matrix."""


class NotContractiveError(FixpointError):
    """No computed norm certifies contraction and forcing was not requested."""


class NotSelfMapError(FixpointError):
    """A sampled function value left the interval it must map into."""


class ZeroDiagonalError(FixpointError):
    """Jacobi scaling hit a zero diagonal entry."""

    def __init__(self, index: int):
        super().__init__(f"zero diagonal entry at index {index}")
        self.index = index


class SingularMatrixError(FixpointError):
    """Elimination found no usable pivot."""


class InsufficientDataError(FixpointError):
    """Not enough usable data to compute the requested estimate."""


class TooLargeError(FixpointError):
    """Problem size exceeds the limit for this dense operation."""


class NonFiniteError(FixpointError):
    """A function evaluation produced NaN or infinity."""


class ParseError(FixpointError):
    """Malformed input file; carries a 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnsupportedFormatError(FixpointError):
    """The file is well formed but uses an unsupported variant."""


class ExpressionError(FixpointError):
    """A command-line function expression could not be compiled."""
