"""Exception types shared across the package."""


class DomainError(ValueError):
    """A scalar or array value lies outside the valid domain of an operation."""


class ContractError(ValueError):
    """Arguments violate an operation's structural contract (shapes, params, alignment)."""
