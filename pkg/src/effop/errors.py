"""Exception hierarchy shared by every module.

Two families matter to callers: :class:`InputError` for malformed input
(bad shapes, unparseable files, invalid arguments) and
:class:`ComputationError` for well-formed input on which a computation or a
mathematical hypothesis fails.  The command line maps them to exit codes 2
and 1 respectively.
"""

from __future__ import annotations


class EffopError(Exception):
    """Base class for all library errors."""


class InputError(EffopError, ValueError):
    """Malformed input: wrong shapes, bad arguments, unparseable files."""


class DimensionError(InputError):
    """Operands have incompatible dimensions."""


class ParseError(InputError):
    """A document could not be parsed.

    Parameters
    ----------
    message : str
        Human readable description.
    field : str, optional
        Dotted path of the offending field, e.g. ``edges[2].tail``.
    line : int, optional
        Line number in the source document when known.
    """

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class ComputationError(EffopError):
    """A computation on valid input could not be completed."""


class NumericalFailure(ComputationError):
    """A LAPACK routine (SVD, eigensolver) did not converge."""


class HypothesisViolation(ComputationError):
    """A hypothesis required by an operation does not hold.

    Parameters
    ----------
    hypotheses : sequence of str
        Names of the failed hypotheses, e.g. ``("ker s11 in ker s01",)``.
    message : str, optional
        Extra context.
    """

    def __init__(self, hypotheses, message: str = ""):
        if isinstance(hypotheses, str):
            hypotheses = (hypotheses,)
        self.hypotheses = tuple(hypotheses)
        text = "hypothesis violated: " + ", ".join(self.hypotheses)
        if message:
            text += f" ({message})"
        super().__init__(text)


class ConditionViolation(ComputationError):
    """A defining algebraic condition (such as ``T U = 0``) fails.

    The measured residual is kept in :attr:`residual`.
    """

    def __init__(self, message: str, residual: float):
        self.residual = float(residual)
        super().__init__(f"{message} (residual {self.residual:.3e})")


class UnsolvableError(ComputationError):
    """The Z-problem has no solution at the requested input vector.

    :attr:`nearest` holds the orthogonal projection of the input onto the
    solvable subspace, as a diagnostic.
    """

    def __init__(self, message: str, nearest=None, distance: float | None = None):
        self.nearest = nearest
        self.distance = distance
        if distance is not None:
            message = f"{message} (distance to solvable subspace {distance:.3e})"
        super().__init__(message)


class ConnectivityError(ComputationError):
    """The operation requires a connected graph."""


class PreconditionError(ComputationError):
    """A structural precondition other than a named hypothesis fails."""
