"""Exception types. Each carries a short machine-readable code and a CLI exit status."""


class RGSError(Exception):
    exit_code = 1

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code

    def line(self) -> str:
        return f"error[{self.code}]: {self}"


class UsageError(RGSError, ValueError):
    exit_code = 2


class DataError(RGSError, ValueError):
    exit_code = 3


class NumericalError(RGSError, ArithmeticError):
    exit_code = 4
