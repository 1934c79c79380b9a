"""Exception types shared across the package."""


class FaceMotionError(Exception):
    """Base class for all package errors."""


class RejectedInputError(FaceMotionError):
    """Input violates a documented precondition (shape, range, emptiness)."""


class StateError(FaceMotionError):
    """Operation requires state that is absent (e.g. an untrained codec)."""


class TrainingDivergedError(FaceMotionError):
    """Training produced a non-finite loss; carries diagnostics."""

    def __init__(self, message: str, *, epoch: int | None = None, step: int | None = None,
                 diagnostics: dict | None = None):
        super().__init__(message)
        self.epoch = epoch
        self.step = step
        self.diagnostics = diagnostics or {}


class TemplateError(FaceMotionError):
    """A prompt template placeholder could not be bound."""


class TransientClientError(FaceMotionError):
    """Retryable transport failure from an LLM client."""


class TransportError(FaceMotionError):
    """LLM client failed after exhausting its retry policy."""


class DegenerateOutputError(FaceMotionError):
    """LLM client returned an unusable (e.g. empty) completion."""


class JudgeParseError(FaceMotionError):
    """Judge output could not be parsed as a candidate ranking."""


class ConfigurationError(FaceMotionError):
    """Invalid or incomplete configuration (schema violation, unmapped component)."""


class DependencyError(FaceMotionError):
    """A pipeline stage input is missing or stale; names the producing stage."""


class PipelineStageError(FaceMotionError):
    """A composite operation failed inside one of its stages.

    Wraps the original exception (available as ``__cause__``) and records
    which stage raised it.
    """

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
