"""Exception hierarchy shared by every qsdlearn module."""


class QSDError(Exception):
    """Base class for all errors raised by qsdlearn."""


class NotHermitianError(QSDError, ValueError):
    pass


class NotPSDError(QSDError, ValueError):
    pass


class ShapeError(QSDError, ValueError):
    pass


class CapacityError(QSDError, ValueError):
    """A Kronecker product or copy encoding would exceed the dimension cap."""

    def __init__(self, required_dim, max_dim):
        self.required_dim = required_dim
        self.max_dim = max_dim
        super().__init__(
            f"required dimension {required_dim} exceeds the capacity cap {max_dim}"
        )


class EncodingError(QSDError, ValueError):
    pass


class DegenerateClassError(QSDError, ValueError):
    """A class has no members, or a dataset has fewer than two classes."""


class InvalidEnsembleError(QSDError, ValueError):
    pass


class DataError(QSDError, ValueError):
    """Malformed input data (CSV cells, labels, dataset parameters)."""


class NumericalIntegrityError(QSDError, ArithmeticError):
    """A guaranteed numerical property was violated (e.g. a copy bound decreased)."""
