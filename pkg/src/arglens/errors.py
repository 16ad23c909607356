"""Exception types shared across the package."""


class ArglensError(Exception):
    """Base class for all library errors."""


class ModelFormatError(ArglensError):
    """A model bundle violates the documented JSON format."""


class ArchitectureError(ArglensError):
    """The network does not have the architecture an operation requires."""


class InvalidStrataError(ArglensError):
    """A strata choice violates the disjointness or adjacency constraints."""


class ExtractionError(ArglensError):
    """Argument extraction failed, e.g. two relation tests both claimed an edge."""


class TrainingDivergedError(ArglensError):
    """Training aborted because the loss became non-finite."""

    def __init__(self, epoch: int):
        super().__init__(f"training diverged at epoch {epoch}: non-finite loss")
        self.epoch = epoch
