"""
Exception hierarchy for selfnorm.

Every error raised on purpose by the package derives from SelfnormError, so
the CLI can map it onto an exit code without catching unrelated bugs.
"""

from typing import Optional, Tuple


class SelfnormError(Exception):
    """Base class for all selfnorm errors."""

    exit_code = 3


class UsageError(SelfnormError):
    """A precondition of an operation was violated by the caller."""


class ConfigError(SelfnormError):
    """An environment variable holds an invalid value."""


class FieldError(SelfnormError):
    """gf_make cannot build the field, or field arithmetic is undefined."""


class ParseError(SelfnormError):
    """Malformed catalog spec or input file."""

    def __init__(self, message: str, position: Optional[int] = None, source: Optional[str] = None):
        self.position = position
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}"
        if position is not None:
            where += f"{':' if where else 'at '}{position}"
        super().__init__(f"{message} ({where})" if where else message)


class ValidationError(SelfnormError):
    """Group axioms (closure, identity, inverses, associativity) fail, or a record is malformed."""

    def __init__(self, message: str, witness: Optional[Tuple[int, ...]] = None):
        self.witness = witness
        if witness is not None:
            message = f"{message}: {witness}"
        super().__init__(message)


class AutomorphismError(ValidationError):
    """A proposed action is not an automorphism of the required order."""


class ResourceError(SelfnormError):
    """A hard size cap was exceeded."""

    exit_code = 2


class BudgetRefusal(SelfnormError):
    """A decider refuses to certify because the subgroup lattice is truncated."""

    exit_code = 2


class DeciderDisagreement(SelfnormError):
    """Structural and brute-force deciders returned different answers."""

    exit_code = 4

    def __init__(self, message: str, structural=None, bruteforce=None):
        self.structural = structural
        self.bruteforce = bruteforce
        super().__init__(message)
