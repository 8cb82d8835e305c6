"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures
onto its documented status codes without a lookup table.
"""

from __future__ import annotations


class AirnetError(Exception):
    exit_code = 4


class ConfigError(AirnetError):
    exit_code = 2


class ParseError(AirnetError):
    """Malformed input file. ``location`` is ``path:line`` when known."""

    exit_code = 3

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class IngestError(ParseError):
    """Raw records that parse but cannot be resolved (e.g. unmapped codes)."""


class ComputationError(AirnetError):
    exit_code = 4


class DegenerateError(ComputationError):
    pass


class InsufficientDataError(ComputationError):
    pass


class DomainError(ComputationError):
    pass


class FitFailedError(ComputationError):
    def __init__(self, message: str, best=None):
        self.best = best
        super().__init__(message)


class OrderingError(ComputationError):
    pass


class JoinError(ComputationError):
    def __init__(self, message: str, codes=()):
        self.codes = tuple(codes)
        super().__init__(message)


class AlignmentError(ComputationError):
    pass


class MappingError(ComputationError):
    pass
