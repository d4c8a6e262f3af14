"""Exception types shared across the package."""


class DimensionMismatch(ValueError):
    """A vector or matrix does not match the game's player dimensions."""


class GameConstructionError(ValueError):
    """Invalid player count, dimensions, or edge set."""


class ConfigurationError(ValueError):
    """A run or experiment configuration is inconsistent or incomplete."""


class PreconditionError(ValueError):
    """A numerical precondition (e.g. invertibility) failed its guard."""


class EigensolverError(RuntimeError):
    """The dense eigensolver did not converge; carries a matrix dump path."""

    def __init__(self, message: str, dump_path: str | None = None):
        super().__init__(message)
        self.dump_path = dump_path
