"""Shared error taxonomy.

Every error raised by this package derives from GaugeForcingError and carries
an exit code used by the command line front end.  The codes partition
failures into five stable classes:

    2  parse error       (malformed files, unknown kinds, bad literals)
    3  validation error  (a value violates a type invariant)
    4  horizon exhausted (a search or construction ran out of represented depth)
    5  precondition      (well-formed inputs that an operation cannot accept)
    6  infeasible        (a requested object provably does not exist)
"""

from __future__ import annotations


class GaugeForcingError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ParseError(GaugeForcingError):
    """Malformed input file or literal."""

    exit_code = 2


class ValidationError(GaugeForcingError):
    """A constructed value violates one of its type invariants."""

    exit_code = 3


class HorizonExhaustedError(GaugeForcingError):
    """A construction needed more depth than the represented horizon."""

    exit_code = 4


class PreconditionError(GaugeForcingError):
    """Inputs are individually valid but the operation does not apply."""

    exit_code = 5


class RangeError(PreconditionError):
    """A depth or window falls outside the represented range."""


class NotPerfectError(PreconditionError):
    """A tree has a dead-end branch where a continuation is required."""


class NonUniformError(PreconditionError):
    """A tree lacks the uniform split-schedule structure required here."""


class InsufficientDataError(PreconditionError):
    """Input is too short to produce any output (e.g. fewer than two 1s)."""


class InfeasibleError(GaugeForcingError):
    """No object satisfying the request exists (e.g. no admissible cover)."""

    exit_code = 6
