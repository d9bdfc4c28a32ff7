"""Exception types mapped to CLI exit codes."""


class UsageError(Exception):
    """Bad flags or arguments. Exit code 1."""

    exit_code = 1


class DataValidationError(Exception):
    """Malformed or inconsistent input data. Exit code 2."""

    exit_code = 2


class NumericalError(Exception):
    """Non-finite values or failed numerical routines. Exit code 3."""

    exit_code = 3
