"""Exception types shared across the toolkit."""


class ParseError(ValueError):
    """Instance document is not syntactically valid JSON."""


class SchemaError(ValueError):
    """Instance document violates the schema (missing field, unknown key, bad reference)."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class UnknownId(KeyError):
    """A node or commodity id does not exist in the instance."""


class PathExplosion(RuntimeError):
    """Path enumeration for one commodity exceeded the configured cap."""

    def __init__(self, commodity: str, cap: int):
        self.commodity = commodity
        self.cap = cap
        super().__init__(f"more than {cap} paths enumerated for commodity {commodity!r}")


class InfeasibleCommodity(RuntimeError):
    """A commodity with positive load has no surviving path."""

    def __init__(self, commodity: str):
        self.commodity = commodity
        super().__init__(f"commodity {commodity!r} has no surviving path")


class KeyMismatch(ValueError):
    """Assignment variables do not match the model's variables."""


class BoundExceedsIncumbent(ValueError):
    """Lower bound above the incumbent (or negative inputs) in gap computation."""


class SizeMismatch(ValueError):
    """Bit vector length does not match the QUBO size."""
