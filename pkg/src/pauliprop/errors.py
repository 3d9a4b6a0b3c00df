"""Exception hierarchy shared by all modules."""


class PauliPropError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(PauliPropError):
    """Operands act on different qubit counts."""


class ContractViolationError(PauliPropError):
    """An operation was called outside its precondition."""


class ConfigError(PauliPropError):
    """Invalid configuration (maps to CLI exit code 1)."""


class RunError(PauliPropError):
    """Runtime failure while executing a run (maps to CLI exit code 2)."""


class ConvergenceError(RunError):
    """An iterative solver exhausted its budget without converging."""


class UndefinedMetricError(PauliPropError):
    """A metric is mathematically undefined for the given inputs."""
