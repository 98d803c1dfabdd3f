"""Exception types shared across the package."""


class GridGnnError(Exception):
    """Base class for all package errors."""


class FormatError(GridGnnError):
    """A file or byte stream does not match its declared format."""


class ValidationError(GridGnnError):
    """Data violates a documented invariant (negative pixels, bad labels, ...)."""


class ConfigError(GridGnnError):
    """A configuration value is outside its supported range."""


class ShapeError(GridGnnError):
    """Operand dimensions are inconsistent with the layer or kernel."""


class LayoutError(GridGnnError):
    """A kernel received a feature matrix in the wrong data layout."""


class SchemaError(GridGnnError):
    """A model file is malformed or structurally incomplete."""


class LoweringError(GridGnnError):
    """A model cannot be lowered to a kernel schedule."""


class PartitionError(GridGnnError):
    """A kernel update targets a destination with no owning bank."""


class TrainingError(GridGnnError):
    """Training diverged (non-finite loss)."""

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch


class OracleSizeError(GridGnnError):
    """An exhaustive oracle was asked to solve an instance above its cap."""
