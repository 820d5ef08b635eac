"""Exception types shared across the package.

Every domain error derives from :class:`GreekRagError` so callers can catch
the whole family at the CLI / service boundary while tests assert the
specific class.
"""

from __future__ import annotations


class GreekRagError(Exception):
    """Base class for all errors raised by this package."""


# --- corpus / segmentation ------------------------------------------------


class InvalidEncoding(GreekRagError):
    """Input bytes are not valid UTF-8."""


class UnknownModel(GreekRagError):
    """Chunking model id outside the supported 1..6 range."""

    def __init__(self, model_id: object):
        super().__init__(f"unknown chunking model {model_id!r} (valid ids: 1..6)")
        self.model_id = model_id


# --- embedding ------------------------------------------------------------


class EmptyText(GreekRagError):
    """Text is empty (or whitespace only) where content is required."""


class DegenerateText(GreekRagError):
    """Text too short / self-cancelling: the hashing embedder produced a zero vector."""


class RemoteUnavailable(GreekRagError):
    """A remote embedding or generation service could not be reached or refused us."""


class DimensionMismatch(GreekRagError):
    """Vector length differs from the configured / indexed dimension."""


class CacheCorrupt(GreekRagError):
    """An embedding cache entry does not decode to a vector of its declared dimension."""


# --- index ----------------------------------------------------------------


class EmptyCorpus(GreekRagError):
    """Index build requested over zero chunks."""


class ZeroVector(GreekRagError):
    """Cosine similarity is undefined for a zero-norm vector."""


class FormatVersionUnsupported(GreekRagError):
    """Index file carries a format version this code does not read."""


class ChecksumMismatch(GreekRagError):
    """Index file entries do not hash to the checksum in the header."""


class TruncatedFile(GreekRagError):
    """Index file is shorter/longer than its header declares, or malformed."""


# --- pipeline -------------------------------------------------------------


class EmptyContext(GreekRagError):
    """Prompt assembly called with no retrieval hits."""


class UnknownChunk(GreekRagError):
    """A retrieval hit references a chunk id missing from the chunk store."""


class GeneratorRefused(GreekRagError):
    """The generator returned an empty or blocked completion."""


class PipelineStageError(GreekRagError):
    """Wraps a component failure with the pipeline stage it occurred in."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


# --- evaluation harness ---------------------------------------------------


class ScoresFormatError(GreekRagError):
    """Base for score-CSV ingestion failures; carries the offending row number."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class MissingColumn(ScoresFormatError):
    """Score CSV header lacks (or adds) required columns."""


class BadInteger(ScoresFormatError):
    """A numeric CSV field does not parse as an integer."""


class OutOfRange(ScoresFormatError):
    """An integer field is outside its allowed range."""


class DuplicateKey(ScoresFormatError):
    """Two score rows share the same (domain, model, top_k, question, version) key."""


class EmptyGroup(GreekRagError):
    """Aggregation requested over an empty score group."""


# --- service --------------------------------------------------------------


class UnknownCorpus(GreekRagError):
    """Requested corpus id is not registered."""


class StillIndexing(GreekRagError):
    """The corpus/model index is being built; retry shortly."""
