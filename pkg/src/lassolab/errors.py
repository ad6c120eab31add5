"""Exception types shared across the package.

The CLI maps each class onto a process exit code, so keep the hierarchy flat.
"""


class LassoLabError(Exception):
    exit_code = 1


class PreconditionError(LassoLabError, ValueError):
    """An input violates a documented precondition."""

    exit_code = 2


class ParseError(PreconditionError):
    """A CSV input could not be parsed."""

    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column


class InfeasibleError(PreconditionError):
    """The constraint set of a problem is empty."""


class RefusalError(LassoLabError):
    """An enumeration would exceed its configured cap."""

    exit_code = 3


class ConvergenceError(LassoLabError):
    exit_code = 4
