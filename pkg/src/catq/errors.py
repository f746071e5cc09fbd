"""Exception types shared across the library."""


class CatqError(Exception):
    """Base class for all catq errors."""


class SortMismatch(CatqError):
    """A term or equation is not well-sorted."""


class UnboundVariable(CatqError):
    """A substitution was asked to replace a variable it has no binding for."""


class UnknownSymbol(CatqError):
    """A term references a symbol outside the theory's signature."""


class ResourceLimit(CatqError):
    """A saturation or enumeration exceeded its configured limits."""


class SchemaMismatch(CatqError):
    """Two objects that must live over the same schema (or composable schemas) do not."""


class EqualityNotPreserved(CatqError):
    """A mapping fails to preserve a provable equality of its source."""

    def __init__(self, constraint, message=""):
        self.constraint = constraint
        super().__init__(message or f"mapping does not preserve constraint {constraint}")


class NoMorphismExists(CatqError):
    """A canonical morphism construction has no valid image for some class."""


class NoPathForSymbol(CatqError):
    """Schema matching found no target symbol or path for a source symbol."""
