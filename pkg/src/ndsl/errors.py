"""Exception hierarchy shared across the package."""


class ProblemError(ValueError):
    """Problem data is malformed or violates a standing hypothesis."""


class NumericalError(RuntimeError):
    """A numerical stage failed (step underflow, budget exhausted, ...)."""

    def __init__(self, message: str, stage: str = ""):
        super().__init__(f"[{stage}] {message}" if stage else message)
        self.stage = stage


class PreconditionError(ValueError):
    """An operation was asked for outside the situation it is defined for."""
