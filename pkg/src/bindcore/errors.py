"""Exception hierarchy shared by every subpackage.

The CLI maps these onto exit codes: configuration problems exit 2, bad data or
files exit 3, and violated internal contracts exit 4.
"""


class BindcoreError(Exception):
    exit_code = 4


class ContractError(BindcoreError, ValueError):
    """A documented precondition of an operation was violated."""


class DimensionError(ContractError):
    pass


class DegenerateInputError(ContractError):
    pass


class EmptyPoolError(ContractError):
    pass


class NumericalError(ContractError):
    """Non-finite values produced from finite inputs (debug guard)."""


class ConfigError(BindcoreError):
    exit_code = 2


class DataError(BindcoreError):
    exit_code = 3


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(DataError):
    def __init__(self, message, offenders=()):
        self.offenders = list(offenders)
        if self.offenders:
            shown = "; ".join(str(o) for o in self.offenders[:10])
            more = f" (+{len(self.offenders) - 10} more)" if len(self.offenders) > 10 else ""
            message = f"{message}: {shown}{more}"
        super().__init__(message)


class CheckpointError(DataError):
    pass
