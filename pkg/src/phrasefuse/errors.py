"""Error taxonomy shared by all modules.

Two families, matching the CLI exit codes: bad input data (exit 1) and
violated internal contracts (exit 2).
"""


class PhraseFuseError(Exception):
    """Base class for all errors raised by this package."""


class InputError(PhraseFuseError):
    """Malformed or missing input: files, records, CLI arguments."""

    exit_code = 1


class InvariantError(PhraseFuseError):
    """A structural contract was violated (duplicate ids, bad shapes, ...)."""

    exit_code = 2
