"""Exception types shared across the package."""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(EngineError):
    """Missing or unusable configuration (files, environment variables)."""


class ValidationError(EngineError):
    """An argument violates a documented precondition."""


class IntegrityError(EngineError):
    """Internal state is inconsistent (unknown ids, missing vectors, ...)."""


class ManifestError(EngineError):
    """A corpus manifest entry could not be parsed or is malformed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"manifest line {line}: {message}"
        super().__init__(message)


class CorpusIOError(EngineError):
    """A source file referenced by the corpus could not be read."""

    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"cannot read {path}: {reason}")


class DuplicateIdError(EngineError):
    """One or more function ids collide."""

    def __init__(self, ids: list[str]):
        self.ids = sorted(ids)
        super().__init__(f"duplicate function id(s): {', '.join(self.ids)}")


class RepositoryFormatError(EngineError):
    """A persisted repository file is corrupt or structurally invalid."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)


class MalformedResponseError(EngineError):
    """An extraction response is missing one of the required sections."""

    def __init__(self, missing_label: str, raw_response: str):
        self.missing_label = missing_label
        self.raw_response = raw_response
        super().__init__(f"response is missing the '{missing_label}' section")


class ExtractionFailedError(EngineError):
    """Extraction kept producing malformed responses until retries ran out."""

    def __init__(self, subject_id: str, attempts: int, last_response: str):
        self.subject_id = subject_id
        self.attempts = attempts
        self.last_response = last_response
        super().__init__(
            f"extraction failed for '{subject_id}' after {attempts} attempts"
        )


class DimensionMismatchError(EngineError):
    """An embedding does not have the configured dimensionality."""


class ProviderError(EngineError):
    """Base class for remote-provider transport failures."""


class ProviderPermanentError(ProviderError):
    """The provider rejected the request; retrying will not help."""


class ProviderExhaustedError(ProviderError):
    """Retryable failures persisted past the configured retry budget."""

    def __init__(self, message: str, retries: int):
        self.retries = retries
        super().__init__(f"{message} (after {retries} retries)")


class EvaluationError(EngineError):
    """An evaluation repetition aborted; carries the failing query id."""

    def __init__(self, query_id: str, cause: Exception):
        self.query_id = query_id
        self.cause = cause
        super().__init__(f"query '{query_id}' failed: {cause}")
