"""Exception hierarchy shared across the package.

The CLI maps these onto its exit codes: ConfigError -> 1, DataError -> 2,
anything else (including ContractViolation) -> 3.
"""


class ConformixError(Exception):
    pass


class ConfigError(ConformixError):
    """Bad experiment configuration (unknown keys, invalid values)."""


class DataError(ConformixError):
    """Bad dataset file: missing, unparsable, or failing validation."""


class ContractViolation(ConformixError):
    """An operation was called with arguments violating its preconditions."""
