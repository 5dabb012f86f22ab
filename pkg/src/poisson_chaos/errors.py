"""Exception types shared across the package."""


class ContractViolationError(ValueError):
    """An argument violates an operation's stated precondition."""


class UnsupportedArityError(ContractViolationError):
    """A kernel or tuple arity exceeds the configured cap."""


class BudgetError(RuntimeError):
    """An exact-enumeration request exceeds the configured state budget."""


class EvaluationError(RuntimeError):
    """A functional evaluation produced a non-finite value."""


class ConfigError(ValueError):
    """A configuration document is malformed or internally inconsistent."""
