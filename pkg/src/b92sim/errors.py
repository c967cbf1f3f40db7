"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A caller-supplied parameter is outside its allowed range."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularityError(DomainError):
    """A computation hit a (near-)singular denominator."""


class ConsistencyError(RuntimeError):
    """An internal invariant failed; indicates corrupted inputs or a bug."""
