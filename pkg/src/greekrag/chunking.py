"""The six corpus chunking strategies.

Models 1-4 pack whole sentences greedily into chunks of at most ``max_len``
code points (200 / 400 / 500 / 800); model 5 groups a fixed number of
sentences per chunk (3); model 6 splits on blank lines, keeping the source's
own paragraphs.  Sentences are never split: a single sentence longer than
``max_len`` becomes its own oversized chunk.

Lengths count Unicode code points of the rejoined chunk text (sentences are
joined with a single space).  Chunk offsets are code-point spans into the
normalized source, so every chunk can be traced back to its document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from .corpus import NormalizedDoc, normalize_text
from .errors import UnknownModel
from .sentences import Sentence, split_sentences

# Catalog of supported strategies: model id -> bound parameter.
FIXED_MAX_LEN = {1: 200, 2: 400, 3: 500, 4: 800}
SENTENCE_GROUP_MODEL = 5
BLANK_LINE_MODEL = 6
DEFAULT_GROUP_SIZE = 3
MODEL_IDS = (1, 2, 3, 4, 5, 6)

SENTENCE_JOINER = " "
PARAGRAPH_JOINER = "\n\n"


@dataclass(frozen=True)
class Chunk:
    """A contiguous text segment; the unit of embedding and retrieval."""

    chunk_id: int
    doc_id: str
    model_id: int
    start: int
    end: int
    text: str


@dataclass(frozen=True)
class ChunkingSpec:
    """A validated choice of chunking strategy plus its bound parameter."""

    model_id: int
    max_len: int | None = None
    group_size: int | None = None

    def __post_init__(self):
        if self.model_id not in MODEL_IDS:
            raise UnknownModel(self.model_id)
        if self.model_id in FIXED_MAX_LEN:
            if self.max_len is None or self.max_len < 1:
                raise ValueError(f"model {self.model_id} requires max_len >= 1")
            if self.group_size is not None:
                raise ValueError("group_size applies only to model 5")
        elif self.model_id == SENTENCE_GROUP_MODEL:
            if self.group_size is None or self.group_size < 1:
                raise ValueError("model 5 requires group_size >= 1")
            if self.max_len is not None:
                raise ValueError("max_len applies only to models 1-4")
        else:  # blank-line model takes no parameter
            if self.max_len is not None or self.group_size is not None:
                raise ValueError("model 6 takes no parameters")

    @classmethod
    def for_model(cls, model_id: int) -> "ChunkingSpec":
        """Spec with the catalog's default parameter for ``model_id``."""
        if model_id in FIXED_MAX_LEN:
            return cls(model_id=model_id, max_len=FIXED_MAX_LEN[model_id])
        if model_id == SENTENCE_GROUP_MODEL:
            return cls(model_id=model_id, group_size=DEFAULT_GROUP_SIZE)
        if model_id == BLANK_LINE_MODEL:
            return cls(model_id=model_id)
        raise UnknownModel(model_id)

    @property
    def joiner(self) -> str:
        return PARAGRAPH_JOINER if self.model_id == BLANK_LINE_MODEL else SENTENCE_JOINER


def _chunk_from_sentences(sentences: Sequence[Sentence], chunk_id: int, doc_id: str, model_id: int) -> Chunk:
    text = SENTENCE_JOINER.join(s.text for s in sentences)
    return Chunk(chunk_id=chunk_id, doc_id=doc_id, model_id=model_id,
                 start=sentences[0].start, end=sentences[-1].end, text=text)


def chunk_fixed(text: str, max_len: int, *, doc_id: str = "", model_id: int = 0,
                abbreviations: frozenset[str] | None = None) -> list[Chunk]:
    """Greedy sentence packing under a code-point budget.

    A sentence joins the current chunk iff ``current + 1 + len(sentence)``
    stays within ``max_len``; otherwise the chunk is emitted and a new one
    starts.  An oversized sentence is emitted alone rather than split.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    chunks: list[Chunk] = []
    group: list[Sentence] = []
    length = 0
    for sentence in split_sentences(text, abbreviations):
        if group and length + 1 + len(sentence.text) > max_len:
            chunks.append(_chunk_from_sentences(group, len(chunks), doc_id, model_id))
            group, length = [], 0
        group.append(sentence)
        length += len(sentence.text) + (1 if length else 0)
    if group:
        chunks.append(_chunk_from_sentences(group, len(chunks), doc_id, model_id))
    return chunks


def chunk_by_sentence_groups(text: str, group_size: int, *, doc_id: str = "",
                             model_id: int = SENTENCE_GROUP_MODEL,
                             abbreviations: frozenset[str] | None = None) -> list[Chunk]:
    """Consecutive runs of exactly ``group_size`` sentences; the last run may be short."""
    if group_size < 1:
        raise ValueError("group_size must be >= 1")
    sentences = split_sentences(text, abbreviations)
    chunks = []
    for i in range(0, len(sentences), group_size):
        chunks.append(_chunk_from_sentences(sentences[i:i + group_size], len(chunks), doc_id, model_id))
    return chunks


def chunk_by_blank_lines(text: str, *, doc_id: str = "", model_id: int = BLANK_LINE_MODEL) -> list[Chunk]:
    """Split at maximal runs of blank lines (lines holding only whitespace).

    Each non-empty segment, trimmed of leading/trailing whitespace, becomes a
    chunk; internal single newlines survive untouched.
    """
    chunks: list[Chunk] = []
    seg_start: int | None = None
    seg_end = 0

    pos = 0
    for line in text.split("\n"):
        line_start, line_end = pos, pos + len(line)
        pos = line_end + 1  # skip the newline
        if line.strip() == "":
            if seg_start is not None:
                chunks.append(_trimmed_segment(text, seg_start, seg_end, len(chunks), doc_id, model_id))
                seg_start = None
            continue
        if seg_start is None:
            seg_start = line_start
        seg_end = line_end
    if seg_start is not None:
        chunks.append(_trimmed_segment(text, seg_start, seg_end, len(chunks), doc_id, model_id))
    return chunks


def _trimmed_segment(text: str, start: int, end: int, chunk_id: int, doc_id: str, model_id: int) -> Chunk:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return Chunk(chunk_id=chunk_id, doc_id=doc_id, model_id=model_id,
                 start=start, end=end, text=text[start:end])


def chunk_with_spec(text: str, spec: ChunkingSpec, *, doc_id: str = "",
                    abbreviations: frozenset[str] | None = None) -> list[Chunk]:
    """Dispatch over the strategy catalog; chunks carry the spec's model id."""
    if spec.model_id in FIXED_MAX_LEN:
        return chunk_fixed(text, spec.max_len, doc_id=doc_id, model_id=spec.model_id,
                           abbreviations=abbreviations)
    if spec.model_id == SENTENCE_GROUP_MODEL:
        return chunk_by_sentence_groups(text, spec.group_size, doc_id=doc_id,
                                        model_id=spec.model_id, abbreviations=abbreviations)
    if spec.model_id == BLANK_LINE_MODEL:
        return chunk_by_blank_lines(text, doc_id=doc_id, model_id=spec.model_id)
    raise UnknownModel(spec.model_id)


def chunk_corpus(docs: Iterable[NormalizedDoc], spec: ChunkingSpec, *,
                 abbreviations: frozenset[str] | None = None) -> list[Chunk]:
    """Chunk every document and assign corpus-wide ordinal chunk ids (ingestion order)."""
    chunks: list[Chunk] = []
    for doc in docs:
        for chunk in chunk_with_spec(doc.text, spec, doc_id=doc.doc_id, abbreviations=abbreviations):
            chunks.append(replace(chunk, chunk_id=len(chunks)))
    return chunks


def chunk_to_dict(chunk: Chunk) -> dict:
    return {"chunk_id": chunk.chunk_id, "doc_id": chunk.doc_id, "model_id": chunk.model_id,
            "start": chunk.start, "end": chunk.end, "text": chunk.text}


def chunk_from_dict(obj: dict) -> Chunk:
    return Chunk(chunk_id=int(obj["chunk_id"]), doc_id=str(obj["doc_id"]),
                 model_id=int(obj["model_id"]), start=int(obj["start"]),
                 end=int(obj["end"]), text=str(obj["text"]))


def dump_chunks_jsonl(chunks: Iterable[Chunk]) -> str:
    """One JSON object per line: chunk_id, doc_id, model_id, start, end, text."""
    return "".join(
        json.dumps(chunk_to_dict(c), ensure_ascii=False, separators=(",", ":")) + "\n"
        for c in chunks
    )


class TextChunker(BaseEstimator, TransformerMixin):
    """Chunking strategies behind the scikit-learn transformer protocol.

    ``transform`` maps each input document (a string) to its chunk list, so
    the splitter drops into pipelines next to vectorizers and estimators.
    ``max_len`` / ``group_size`` default to the catalog binding for
    ``model_id`` when left as None.

    >>> TextChunker(model_id=6).transform(["Α.\\n\\nΒ."])
    [[Chunk(...), Chunk(...)]]
    """

    def __init__(self, model_id: int = SENTENCE_GROUP_MODEL, max_len: int | None = None,
                 group_size: int | None = None, abbreviations: frozenset[str] | None = None):
        self.model_id = model_id
        self.max_len = max_len
        self.group_size = group_size
        self.abbreviations = abbreviations

    def _spec(self) -> ChunkingSpec:
        default = ChunkingSpec.for_model(self.model_id)
        max_len = self.max_len if self.max_len is not None else default.max_len
        group_size = self.group_size if self.group_size is not None else default.group_size
        return ChunkingSpec(model_id=self.model_id, max_len=max_len, group_size=group_size)

    def fit(self, X=None, y=None):
        self.spec_ = self._spec()
        return self

    def transform(self, X: Iterable[str]) -> list[list[Chunk]]:
        spec = getattr(self, "spec_", None) or self._spec()
        return [
            chunk_with_spec(normalize_text(doc), spec, doc_id=f"doc{i}",
                            abbreviations=self.abbreviations)
            for i, doc in enumerate(X)
        ]
