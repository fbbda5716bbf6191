"""Exception hierarchy.

Two families: ``ConstraintError`` for inputs that violate a mathematical
precondition, and ``NumericalError`` for computations that ran but missed a
tolerance. The command-line front end maps them to distinct exit codes.
"""


class ConstraintError(ValueError):
    """An input violates a precondition (parameter bounds, window, ...)."""


class DomainError(ConstraintError):
    """A frequency sample or parameter lies outside its admissible domain."""


class RangeError(ConstraintError):
    """Evaluation requested outside the construction window."""


class PoleError(ConstraintError):
    """A hypergeometric lower parameter is a non-positive integer."""


class BranchError(ConstraintError):
    """A square-root radicand went non-positive (invalid amplitude)."""


class SingularSolutionError(ConstraintError):
    """A solution that must be nodeless has a real zero or pole."""


class NumericalError(ArithmeticError):
    """A computation completed but failed an accuracy requirement."""


class RecurrenceError(NumericalError):
    """An exact polynomial division left a remainder."""


class ResolutionError(NumericalError):
    """Grid too coarse for the sampled function."""


class AccuracyError(NumericalError):
    """Residual above tolerance (e.g. after repeated raising)."""


class BoundaryError(NumericalError):
    """Wavefunction amplitude reached the edge of the spatial window."""
