"""Typed errors shared across the toolkit."""


class CantorDimError(Exception):
    """Base class for all toolkit errors."""


class SpecFormatError(CantorDimError):
    """An input file or spec dictionary is malformed.

    Carries an optional ``location`` (JSON-ish path) to point at the offender.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{message} (at {location})"
        super().__init__(message)


class ResourceLimitError(CantorDimError):
    """A computation exceeded its node budget.

    Sumset/product/union oracles can be exponential in depth; the budget turns
    blowups into a typed error instead of silent truncation.
    """


class DepthExceededError(CantorDimError):
    """A gauge table or word prefix is too short for the requested depth."""


class BuildError(CantorDimError):
    """A constructive builder could not realize its postcondition."""
