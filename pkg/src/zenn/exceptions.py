class DimensionError(ValueError):
    """Input or parameter shapes do not match a layer or model contract."""


class ModelFormatError(ValueError):
    """A serialized model document is malformed or truncated."""


class ModelVersionError(ModelFormatError):
    """A serialized model document has an unsupported format version."""


class ModelDimensionError(ModelFormatError, DimensionError):
    """A serialized model document declares inconsistent dimensions."""


class TrainingDivergedError(RuntimeError):
    """The training loss became non-finite.

    ``epoch`` is the update count at which the loss was first non-finite and
    ``trace`` holds the records logged before that point.
    """

    def __init__(self, epoch: int, trace=None):
        super().__init__(f"training diverged at epoch {epoch}: loss is not finite")
        self.epoch = epoch
        self.trace = trace


class ConfigError(ValueError):
    """An experiment configuration failed validation."""
