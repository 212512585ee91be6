"""Exception types shared across the package."""


class ContractError(Exception):
    """An action, shape, or invariant contract was violated by a caller."""


class ConfigError(Exception):
    """A configuration file or value is invalid."""
