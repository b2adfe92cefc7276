"""
Exception hierarchy for gibbssat.
Library code raises these; the command-line front end maps them to exit codes.
"""


class GibbsSatError(Exception):
    """Base class for every domain error raised by the package."""


class InvalidParameterError(GibbsSatError, ValueError):
    """A generator or solver argument is outside its allowed range."""


class LengthMismatchError(GibbsSatError, ValueError):
    """An assignment or spin vector does not match the formula size."""

    def __init__(self, expected: int, got: int):
        super().__init__(f"Assignment has {got} bits, formula has {expected} variables")
        self.expected = expected
        self.got = got

    def __reduce__(self):
        return (type(self), (self.expected, self.got))


class DimacsError(GibbsSatError):
    """Malformed DIMACS CNF input."""

    def __init__(self, message: str, line: int = 0):
        if line:
            message = f"Line {line}: {message}"
        super().__init__(message)
        self.line = line


class MalformedHeaderError(DimacsError):
    pass


class LiteralOutOfRangeError(DimacsError):
    pass


class WrongClauseWidthError(DimacsError):
    pass


class WidthError(GibbsSatError):
    """Clause width not supported by the requested operation."""


class TooLargeError(GibbsSatError):
    """Exhaustive scan requested over more variables than the configured limit."""

    def __init__(self, n_vars: int, limit: int):
        super().__init__(f"{n_vars} variables exceeds the exhaustive limit of {limit}")
        self.n_vars = n_vars
        self.limit = limit

    def __reduce__(self):
        return (type(self), (self.n_vars, self.limit))


class InvalidThresholdError(GibbsSatError, ValueError):
    pass


class EmptySweepError(GibbsSatError):
    pass


class ConfigError(GibbsSatError):
    """Sweep configuration failed schema validation."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("Invalid sweep config: " + "; ".join(self.problems))

    def __reduce__(self):
        return (type(self), (self.problems,))


class ResumeMismatchError(GibbsSatError):
    """Checkpoint on disk was written by a different sweep config."""


class OutputError(GibbsSatError):
    """Reading or writing an artifact failed."""

    def __init__(self, path, reason):
        super().__init__(f"{path}: {reason}")
        self.path = str(path)
        self.reason = reason

    # Worker exceptions cross process boundaries
    def __reduce__(self):
        return (type(self), (self.path, self.reason))


class SolverDisagreementError(GibbsSatError):
    """Two complete solvers returned different verdicts for one formula."""
