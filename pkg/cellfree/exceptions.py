"""
Exceptions raised by the cell-free numerics.
"""


class CellFreeError(Exception):
    """Base class for every error raised by the cellfree package"""


class ParameterError(CellFreeError, ValueError):
    """Invalid dimensions, out-of-range parameters or malformed identifiers"""


class DegenerateInputError(CellFreeError):
    """A linear system that must be positive definite is singular"""


class PropagationError(CellFreeError):
    """A link distance came out non-positive or non-finite"""
