"""Exception hierarchy; each class carries the CLI exit status it maps to."""


class CoarseLabError(Exception):
    exit_status = 1


class InputError(CoarseLabError, ValueError):
    """Bad arguments, violated preconditions, malformed files."""

    exit_status = 2


class ResourceError(CoarseLabError):
    """A vertex, subset or enumeration budget was exceeded."""

    exit_status = 3

    def __init__(self, message, budget=None, stage=None):
        super().__init__(message)
        self.budget = budget
        self.stage = stage


class NumericError(CoarseLabError):
    exit_status = 4

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
