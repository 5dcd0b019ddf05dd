class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class BudgetExceeded(RuntimeError):
    """Estimated work exceeds the configured budget and --force was not given."""
