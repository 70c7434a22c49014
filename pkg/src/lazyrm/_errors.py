class BudgetExhausted(RuntimeError):
    """A lazy operator was probed more times than its construction allows."""


class OracleCapExceeded(MemoryError):
    """A dense oracle matrix would exceed the configured size cap."""
