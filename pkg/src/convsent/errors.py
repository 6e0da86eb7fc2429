"""Exception hierarchy shared by every stage of the package."""


class ConvsentError(Exception):
    """Base class for all errors raised by convsent."""


# audio
class InputFormatError(ConvsentError):
    """The input audio cannot be read as 16-bit mono PCM WAV."""


class UnsupportedFormat(InputFormatError):
    pass


class CorruptFile(InputFormatError):
    pass


class SpanOutOfRange(ConvsentError):
    pass


# features
class InvalidConfig(ConvsentError, ValueError):
    pass


class NegativeFrequency(ConvsentError, ValueError):
    pass


class NegativeMel(ConvsentError, ValueError):
    pass


class InvalidLength(ConvsentError, ValueError):
    pass


class ChunkTooShort(ConvsentError):
    pass


# alignment
class DimensionMismatch(ConvsentError, ValueError):
    pass


class EmptySequence(ConvsentError, ValueError):
    pass


# diarize
class TooFewChunks(ConvsentError):
    pass


class LengthMismatch(ConvsentError, ValueError):
    pass


# transcribe
class BackendError(ConvsentError):
    """Anything that went wrong while talking to a transcription backend."""


class MissingOracleEntry(BackendError):
    pass


class BackendUnreachable(BackendError):
    pass


class MalformedResponse(BackendError):
    pass


class InvalidBackendConfig(BackendError, ValueError):
    pass


class EmptyEvaluation(ConvsentError, ValueError):
    pass


# sentiment
class EmptyLexicon(ConvsentError):
    pass


class SingleClassCorpus(ConvsentError, ValueError):
    pass


class EmptyCorpus(ConvsentError, ValueError):
    pass


# pipeline
class SchemaVersionMismatch(ConvsentError):
    pass


class PipelineError(ConvsentError):
    """A stage failure, tagged with the stage name and the chunk being processed."""

    def __init__(self, stage, cause, chunk_id=None):
        self.stage = stage
        self.chunk_id = chunk_id
        self.cause = cause
        where = f"stage '{stage}'"
        if chunk_id is not None:
            where += f", chunk {chunk_id}"
        super().__init__(f"{where}: {cause}")
