"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid dataset, model, or experiment configuration."""


class DataIntegrityError(ValueError):
    """A persisted dataset row disagrees with its recomputed digit counts."""


class TrainingDiverged(RuntimeError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch, loss):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"non-finite training loss {loss!r} at epoch {epoch}")


class StaleCacheError(RuntimeError):
    """A backward pass received an activation cache from an outdated forward pass."""
