"""Exception types shared across the package."""


class RspError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(RspError):
    pass


class RankDeficient(RspError):
    pass


class OriginNotInZ(RspError):
    pass


class UnsupportedSet(RspError):
    pass


class NoConvergence(RspError):
    pass


class NotBiaffine(RspError):
    pass


class NotStrictlyFeasible(RspError):
    pass


class OracleFailure(RspError):
    pass


class RequiresPessimizer(RspError):
    pass


class InvalidSteps(RspError):
    pass


class BudgetExhausted(RspError):
    pass


class MasterFailure(RspError):
    pass


class NonpositiveEps(RspError):
    pass


class Unbounded(RspError):
    pass
