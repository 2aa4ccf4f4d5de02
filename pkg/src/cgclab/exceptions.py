"""Exception types raised across the package."""


class CgcLabError(Exception):
    """Base class for all package errors."""


class ZeroVector(CgcLabError, ValueError):
    """A vector (or matrix row) with zero norm where a direction is required."""

    def __init__(self, message="zero-norm vector", row=None):
        if row is not None:
            message = f"{message} (row {row})"
        super().__init__(message)
        self.row = row


class ConfigError(CgcLabError, ValueError):
    pass


class SplitError(CgcLabError, ValueError):
    pass


class EmptyInput(CgcLabError, ValueError):
    pass


class SingletonCluster(CgcLabError):
    """Intra-cluster distance requested for a cluster of size one."""


class SingleClusterPartition(CgcLabError):
    """Nearest-other-cluster distance requested when only one cluster exists."""


class EmptyPartition(CgcLabError, ValueError):
    pass


class EmptyBank(CgcLabError, ValueError):
    pass


class LabelError(CgcLabError, ValueError):
    pass


class EvalError(CgcLabError, ValueError):
    pass


class ICSUndefined(CgcLabError):
    """The boundary set of a cluster is empty, so its ICS is undefined."""
