"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Bad dimensions, infeasible scenarios or invalid config entries.

    ``key`` names the offending config key when one is known.
    """

    def __init__(self, message, key=None):
        if key is not None and key not in message:
            message = f"{message} (key: {key})"
        super().__init__(message)
        self.key = key


class NumericError(ArithmeticError):
    """Numerical breakdown (failed factorization, non-finite values).

    Carries whatever iteration context was available at the failure site.
    """

    def __init__(self, message, *, em_iteration=None, inner_iteration=None, index=None):
        ctx = []
        if em_iteration is not None:
            ctx.append(f"k={em_iteration}")
        if inner_iteration is not None:
            ctx.append(f"t={inner_iteration}")
        if index is not None:
            ctx.append(f"i={index}")
        if ctx:
            message = f"{message} ({', '.join(ctx)})"
        super().__init__(message)
        self.em_iteration = em_iteration
        self.inner_iteration = inner_iteration
        self.index = index


class OutputError(OSError):
    """Output location cannot be written; raised before any computation starts."""
