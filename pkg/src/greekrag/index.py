"""Exact cosine-similarity top-K retrieval over embedded chunks.

The index is an exhaustive scan, not an approximate structure: corpora here
are a few thousand chunks, so exactness is cheap and keeps results
reproducible.  Similarities are computed in float64 even though vectors are
stored float32, then clamped into [-1, 1]; ties are broken by ascending
chunk id so reruns produce identical rankings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from ._hash import fnv1a64
from ._validation import check_matrix, check_nonzero_norm, check_vector
from .chunking import Chunk, chunk_from_dict, chunk_to_dict
from .embedding import EmbedderConfig, EmbeddingCache, EmbeddingClient, vector_from_b64, vector_to_b64
from .errors import (
    ChecksumMismatch,
    DimensionMismatch,
    EmptyCorpus,
    FormatVersionUnsupported,
    GreekRagError,
    TruncatedFile,
    ZeroVector,
)

INDEX_FORMAT_VERSION = 1


@dataclass(frozen=True)
class RetrievalHit:
    """One ranked retrieval result."""

    chunk_id: int
    similarity: float


@dataclass(frozen=True)
class RetrievalConfig:
    """Retrieval depth; the study's presets are 20 and 50."""

    top_k: int = 20

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass(frozen=True)
class IndexEntry:
    chunk_id: int
    vector: np.ndarray
    norm: float


def cosine_similarity(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> float:
    """dot(a, b) / (|a| |b|), clamped to [-1, 1].

    Computed in float64 from an elementwise product so the result is exactly
    symmetric in its arguments.
    """
    va = check_vector(a)
    vb = check_vector(b, dim=len(va))
    na = check_nonzero_norm(va)
    nb = check_nonzero_norm(vb)
    dot = float(np.sum(va * vb))
    return min(1.0, max(-1.0, dot / (na * nb)))


def _row_norms(matrix64: np.ndarray) -> np.ndarray:
    """Per-row L2 norms through one scratch buffer, so equal rows get equal norms."""
    n, dim = matrix64.shape
    scratch = np.empty(dim, dtype=np.float64)
    norms = np.empty(n, dtype=np.float64)
    for i in range(n):
        np.copyto(scratch, matrix64[i])
        norms[i] = np.sqrt(scratch @ scratch)
    return norms


def _rank_similarities(sims: np.ndarray, top_k: int) -> np.ndarray:
    """Indices of the ``top_k`` best similarities, ordered by (sim desc, index asc)."""
    order = np.lexsort((np.arange(len(sims)), -sims))
    return order[:top_k]


def top_k_search(matrix64: np.ndarray, norms: np.ndarray, query: Sequence[float] | np.ndarray,
                 top_k: int) -> list[RetrievalHit]:
    """Exhaustive cosine scan of ``matrix64`` rows against ``query``.

    Row dot products go through one reused scratch buffer instead of a BLAS
    matrix-vector product: gemv can differ in the last ulp between equal rows
    at different alignments, which would silently break the exact-tie
    contract (bit-identical vectors must tie, lower chunk id first).
    """
    q = check_vector(query, dim=matrix64.shape[1])
    qnorm = check_nonzero_norm(q)
    n, dim = matrix64.shape
    scratch = np.empty(dim, dtype=np.float64)
    sims = np.empty(n, dtype=np.float64)
    for i in range(n):
        np.copyto(scratch, matrix64[i])
        sims[i] = scratch @ q
    np.divide(sims, norms * qnorm, out=sims)
    np.clip(sims, -1.0, 1.0, out=sims)
    picked = _rank_similarities(sims, top_k)
    return [RetrievalHit(chunk_id=int(i), similarity=float(sims[i])) for i in picked]


class CosineTopK(BaseEstimator):
    """Exact cosine nearest-neighbour search in scikit-learn style.

    ``fit`` ingests the row matrix; ``kneighbors`` returns ``(similarities,
    indices)`` for each query row, both shaped ``(n_queries, k)``.
    """

    def __init__(self, top_k: int = 20):
        self.top_k = top_k

    def fit(self, X, y=None):
        matrix = check_matrix(X)
        norms = _row_norms(matrix)
        if np.any(norms == 0.0):
            raise ZeroVector("fit matrix contains a zero row")
        self.matrix_ = matrix
        self.norms_ = norms
        return self

    def kneighbors(self, X, top_k: int | None = None):
        if not hasattr(self, "matrix_"):
            raise GreekRagError("CosineTopK.kneighbors called before fit")
        k = self.top_k if top_k is None else top_k
        if k < 1:
            raise ValueError("top_k must be >= 1")
        queries = check_matrix(X, dim=self.matrix_.shape[1])
        sims_out, idx_out = [], []
        for row in queries:
            hits = top_k_search(self.matrix_, self.norms_, row, k)
            sims_out.append([h.similarity for h in hits])
            idx_out.append([h.chunk_id for h in hits])
        return np.asarray(sims_out, dtype=np.float64), np.asarray(idx_out, dtype=np.int64)


class VectorIndex:
    """Immutable store of embedded chunks with exact top-K search."""

    def __init__(self, dim: int, embedder_id: str, chunks: Sequence[Chunk],
                 vectors: Sequence[np.ndarray]):
        if len(chunks) == 0:
            raise EmptyCorpus("an index needs at least one chunk")
        if len(chunks) != len(vectors):
            raise ValueError("chunks and vectors must align")
        for position, chunk in enumerate(chunks):
            if chunk.chunk_id != position:
                raise ValueError(f"chunk ids must be 0..n-1 in order; saw {chunk.chunk_id} at {position}")
        matrix32 = np.vstack([np.asarray(v, dtype=np.float32) for v in vectors])
        if matrix32.shape[1] != dim:
            raise DimensionMismatch(f"vectors have dim {matrix32.shape[1]}, expected {dim}")
        self.dim = dim
        self.embedder_id = embedder_id
        self.chunks: tuple[Chunk, ...] = tuple(chunks)
        self._matrix32 = matrix32
        self._matrix64 = matrix32.astype(np.float64)
        self._norms = _row_norms(self._matrix64)
        if np.any(self._norms == 0.0):
            raise ZeroVector("index contains a zero embedding")

    def __len__(self) -> int:
        return len(self.chunks)

    @property
    def entries(self) -> list[IndexEntry]:
        return [
            IndexEntry(chunk_id=c.chunk_id, vector=self._matrix32[i], norm=float(self._norms[i]))
            for i, c in enumerate(self.chunks)
        ]

    def chunk(self, chunk_id: int) -> Chunk:
        return self.chunks[chunk_id]

    @property
    def chunk_store(self) -> dict[int, Chunk]:
        return {c.chunk_id: c for c in self.chunks}

    def vector(self, chunk_id: int) -> np.ndarray:
        return self._matrix32[chunk_id]

    def search(self, query: Sequence[float] | np.ndarray,
               cfg: RetrievalConfig | int = RetrievalConfig()) -> list[RetrievalHit]:
        """Top-K hits sorted by (similarity desc, chunk_id asc); exhaustive and exact."""
        top_k = cfg if isinstance(cfg, int) else cfg.top_k
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        return top_k_search(self._matrix64, self._norms, query, top_k)


def build_index(chunks: Sequence[Chunk], cfg: EmbedderConfig,
                cache: EmbeddingCache | None = None,
                client: EmbeddingClient | None = None) -> VectorIndex:
    """Embed every chunk (through the cache) and assemble the index.

    Chunk ids are (re)assigned by input order, 0..n-1.  Embedding failures
    surface with the offending chunk id.
    """
    chunks = [
        Chunk(chunk_id=i, doc_id=c.doc_id, model_id=c.model_id, start=c.start, end=c.end, text=c.text)
        for i, c in enumerate(chunks)
    ]
    if not chunks:
        raise EmptyCorpus("no chunks to index")

    # embed_batch labels failures with the item index, which here IS the chunk id
    owns_client = client is None
    if owns_client:
        client = EmbeddingClient(cfg, cache=cache)
    try:
        vectors = client.embed_batch([c.text for c in chunks])
    finally:
        if owns_client:
            client.close()

    dim = len(vectors[0])
    return VectorIndex(dim=dim, embedder_id=cfg.embedder_id, chunks=chunks, vectors=vectors)


# --- persistence ------------------------------------------------------------
#
# File layout: one UTF-8 JSON header line {version, dim, embedder_id, count,
# checksum}, then one JSON line per entry {chunk_id, doc_id, model_id, start,
# end, text, vector_b64}.  checksum is 64-bit FNV-1a over the entry lines
# (each including its trailing newline), so any byte damage is detected.


def _entry_line(chunk: Chunk, vector: np.ndarray) -> str:
    obj = chunk_to_dict(chunk)
    obj["vector_b64"] = vector_to_b64(vector)
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n"


def save_index(index: VectorIndex, path: str | Path) -> Path:
    """Write the index; loading the file restores bit-identical vectors."""
    path = Path(path)
    entry_lines = [_entry_line(c, index.vector(c.chunk_id)) for c in index.chunks]
    checksum = fnv1a64(b"".join(line.encode("utf-8") for line in entry_lines))
    header = {
        "version": INDEX_FORMAT_VERSION,
        "dim": index.dim,
        "embedder_id": index.embedder_id,
        "count": len(index),
        "checksum": f"{checksum:016x}",
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fp:
        fp.write(json.dumps(header, ensure_ascii=False, separators=(",", ":")) + "\n")
        fp.writelines(entry_lines)
    return path


def load_index(path: str | Path) -> VectorIndex:
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fp:
        header_line = fp.readline()
        if not header_line.strip():
            raise TruncatedFile(f"{path}: empty file")
        try:
            header = json.loads(header_line)
            version = int(header["version"])
            dim = int(header["dim"])
            embedder_id = str(header["embedder_id"])
            count = int(header["count"])
            declared_checksum = str(header["checksum"])
        except (KeyError, ValueError, TypeError) as exc:
            raise TruncatedFile(f"{path}: unreadable header ({exc})") from exc
        if version != INDEX_FORMAT_VERSION:
            raise FormatVersionUnsupported(
                f"{path}: format version {version}, this build reads {INDEX_FORMAT_VERSION}"
            )
        entry_lines = fp.readlines()

    if len(entry_lines) != count:
        raise TruncatedFile(f"{path}: header declares {count} entries, found {len(entry_lines)}")
    checksum = fnv1a64(b"".join(line.encode("utf-8") for line in entry_lines))
    if f"{checksum:016x}" != declared_checksum:
        raise ChecksumMismatch(f"{path}: entry checksum {checksum:016x} != declared {declared_checksum}")

    chunks, vectors = [], []
    for lineno, line in enumerate(entry_lines, start=2):
        try:
            obj = json.loads(line)
            vec = vector_from_b64(obj.pop("vector_b64"))
            chunk = chunk_from_dict(obj)
        except (KeyError, ValueError, TypeError) as exc:
            raise TruncatedFile(f"{path}:{lineno}: unreadable entry ({exc})") from exc
        chunks.append(chunk)
        vectors.append(vec)
    return VectorIndex(dim=dim, embedder_id=embedder_id, chunks=chunks, vectors=vectors)
