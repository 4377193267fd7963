"""Exception hierarchy. The CLI maps these onto exit codes."""


class NetlabError(Exception):
    pass


class ConfigError(NetlabError, ValueError):
    """Invalid configuration or usage."""


class DataError(NetlabError, ValueError):
    """Input data is missing, malformed or insufficient for the requested analysis."""


class InsufficientDataError(DataError):
    pass


class DegenerateMetricError(DataError):
    def __init__(self, metric):
        super().__init__(f"metric {metric!r} has zero variance")
        self.metric = metric


class UndefinedRatioError(DataError, ZeroDivisionError):
    pass


class NumericError(NetlabError, ArithmeticError):
    """Non-finite values or a convergence failure."""
