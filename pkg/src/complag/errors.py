"""Exception types raised across the package."""


class ComplagError(Exception):
    """Base class for all package errors."""


class CyclicBinding(ComplagError):
    pass


class UnboundSymbol(ComplagError):
    def __init__(self, symbol):
        super().__init__(f"unbound symbol: {symbol}")
        self.symbol = symbol


class DivisionByZero(ComplagError, ZeroDivisionError):
    pass


class DomainError(ComplagError, ValueError):
    pass


class ParseError(ComplagError):
    """Malformed expression or system text.

    ``offset`` is the byte offset of the offending token inside the input and
    ``expected`` the set of token descriptions that would have been accepted.
    """

    def __init__(self, message, offset=0, expected=(), line=None):
        self.offset = offset
        self.expected = frozenset(expected)
        self.line = line
        where = f"offset {offset}" if line is None else f"line {line}, offset {offset}"
        detail = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{message} at {where}{detail}")
        self.message = message


class UnknownIdentifier(ComplagError):
    pass


class MissingParameter(UnknownIdentifier):
    pass


class IndexOutOfRange(ComplagError):
    pass


class OrderOverflow(ComplagError):
    pass


class DimensionMismatch(ComplagError):
    pass


class AllSamplesRejected(ComplagError):
    pass


class SingularMassMatrix(ComplagError):
    pass


class SingularLocus(ComplagError):
    def __init__(self, message, locus=None):
        super().__init__(message)
        self.locus = locus


class IntegrationAborted(ComplagError):
    """A step failed mid-integration; ``trajectory`` holds the samples so far."""

    def __init__(self, cause, t, trajectory, stage=None):
        stage_txt = f" (RK4 stage {stage})" if stage is not None else ""
        super().__init__(f"integration aborted at t={t!r}{stage_txt}: {cause}")
        self.cause = cause
        self.t = t
        self.trajectory = trajectory
        self.stage = stage
