class ZeroVarianceColumn(ValueError):
    """A column has zero variance and cannot be standardized."""

    def __init__(self, column: int, name: str | None = None):
        self.column = column
        self.name = name
        label = name if name is not None else f"#{column}"
        super().__init__(f"column {label} has zero variance")


class DegenerateDesign(ValueError):
    """Design matrix is rank deficient beyond the ridge rescue."""


class DimensionMismatch(ValueError):
    """Input dimension does not match the fitted model."""


class BadK(ValueError):
    """Requested component count outside 1..d."""


class ConstantInput(ValueError):
    """Correlation is undefined for a constant vector."""
