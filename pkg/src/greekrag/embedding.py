"""Text embedding: remote sentence-transformer service or built-in hashing embedder.

Production embeds through a JSON-over-HTTP service (``POST {endpoint}/embed``
with ``{"model": ..., "texts": [...]}``, answering ``{"dim": n, "vectors":
[[...], ...]}``).  For tests and fully offline runs, ``endpoint="reference"``
selects a deterministic character-3-gram hashing embedder, so the whole
pipeline works with no network and no model weights.

Vectors are float32 numpy arrays.  A content-addressed cache (append-only
JSON Lines) makes re-embedding identical text free; keys cover the embedder
id, so switching models never aliases entries.
"""

from __future__ import annotations

import base64
import json
import threading
import time
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import httpx
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._hash import content_digest, fnv1a64
from ._validation import check_text
from .errors import CacheCorrupt, DegenerateText, DimensionMismatch, EmptyText, RemoteUnavailable

DEFAULT_EMBEDDER_ID = "dimitriz/st-greek-media-bert-base-uncased"
REFERENCE_ENDPOINT = "reference"
DEFAULT_REFERENCE_DIM = 256

_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class EmbedderConfig:
    """How to turn text into vectors.

    ``endpoint`` is either a service base URL or the literal ``"reference"``
    for the offline hashing embedder.  ``dim`` may be None in remote mode, in
    which case the first response fixes it; later mismatches are errors.
    ``seed`` (reference mode) defaults to a hash of ``embedder_id`` so that
    distinct model ids produce distinct vector spaces.
    """

    embedder_id: str = DEFAULT_EMBEDDER_ID
    dim: int | None = DEFAULT_REFERENCE_DIM
    endpoint: str = REFERENCE_ENDPOINT
    timeout_ms: int = 10_000
    seed: int | None = None
    retries: int = 3
    retry_base_ms: int = 250
    max_in_flight: int = 4

    def __post_init__(self):
        if not self.endpoint:
            raise ValueError("endpoint must be non-empty")
        if self.dim is not None and self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.is_reference and self.dim is None:
            raise ValueError("reference mode requires an explicit dim")

    @property
    def is_reference(self) -> bool:
        return self.endpoint == REFERENCE_ENDPOINT

    @property
    def effective_seed(self) -> int:
        if self.seed is not None:
            return self.seed & _MASK64
        return fnv1a64(self.embedder_id.encode("utf-8"))


def reference_embed(text: str, dim: int = DEFAULT_REFERENCE_DIM, seed: int = 0) -> np.ndarray:
    """Deterministic character-3-gram hashing embedder with unit L2 norm.

    Every 3-gram of the NFC text is FNV-1a hashed together with the seed; the
    hash picks a bucket (``hash % dim``) and a sign (top bit), and the signed
    counts are accumulated exactly in integers before the single floating
    normalization.  Equal inputs therefore give bit-equal vectors on every
    platform.
    """
    check_text(text)
    if dim < 2:
        raise ValueError("dim must be >= 2")
    normalized = unicodedata.normalize("NFC", text)
    seeded_state = fnv1a64((seed & _MASK64).to_bytes(8, "little"))
    counts = [0] * dim
    for i in range(len(normalized) - 2):
        h = fnv1a64(normalized[i:i + 3].encode("utf-8"), state=seeded_state)
        counts[h % dim] += 1 if (h >> 63) == 0 else -1
    accum = np.asarray(counts, dtype=np.float64)
    norm = float(np.sqrt(sum(c * c for c in counts)))
    if norm == 0.0:
        raise DegenerateText(
            "hashing embedder accumulated a zero vector (text shorter than 3 code points?)"
        )
    return (accum / norm).astype(np.float32)


# --- cache ------------------------------------------------------------------


def vector_to_b64(vec: np.ndarray) -> str:
    """Base64 of little-endian float32 bytes; round-trips bit-exactly."""
    return base64.b64encode(np.asarray(vec, dtype="<f4").tobytes()).decode("ascii")


def vector_from_b64(data: str) -> np.ndarray:
    return np.frombuffer(base64.b64decode(data), dtype="<f4").copy()


class EmbeddingCache:
    """Append-only JSON Lines store of ``{digest_hex, dim, vector_b64}`` entries.

    Writes are serialized with a lock; readers see a plain dict.  With
    ``path=None`` the cache lives in memory only.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self._entries: dict[str, np.ndarray] = {}
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        with self.path.open(encoding="utf-8") as fp:
            for lineno, line in enumerate(fp, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    vec = vector_from_b64(obj["vector_b64"])
                    declared = int(obj["dim"])
                    digest = str(obj["digest_hex"])
                except (KeyError, ValueError, TypeError) as exc:
                    raise CacheCorrupt(f"{self.path}:{lineno}: unreadable entry ({exc})") from exc
                if len(vec) != declared:
                    raise CacheCorrupt(
                        f"{self.path}:{lineno}: vector length {len(vec)} != declared dim {declared}"
                    )
                self._entries[digest] = vec

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, digest: str, expected_dim: int | None = None) -> np.ndarray | None:
        vec = self._entries.get(digest)
        if vec is not None and expected_dim is not None and len(vec) != expected_dim:
            raise CacheCorrupt(
                f"cache entry {digest} has dim {len(vec)}, expected {expected_dim}"
            )
        return vec

    def put(self, digest: str, vec: np.ndarray) -> None:
        with self._lock:
            if digest in self._entries:
                return
            self._entries[digest] = np.asarray(vec, dtype=np.float32)
            if self.path is not None:
                entry = {"digest_hex": digest, "dim": int(len(vec)), "vector_b64": vector_to_b64(vec)}
                with self.path.open("a", encoding="utf-8") as fp:
                    fp.write(json.dumps(entry, separators=(",", ":")) + "\n")


# --- client -----------------------------------------------------------------


class EmbeddingClient:
    """Embeds text per an :class:`EmbedderConfig`, with caching and bounded retries.

    Remote transport failures are retried ``cfg.retries`` times with
    exponential backoff (base ``retry_base_ms``); HTTP 4xx is never retried.
    In-flight remote requests are capped at ``cfg.max_in_flight``.
    """

    def __init__(self, cfg: EmbedderConfig, cache: EmbeddingCache | None = None,
                 transport: httpx.BaseTransport | None = None,
                 sleep: Callable[[float], None] = time.sleep):
        self.cfg = cfg
        self.cache = cache
        self._dim = cfg.dim
        self._sleep = sleep
        self._semaphore = threading.Semaphore(cfg.max_in_flight)
        self._http = None
        if not cfg.is_reference:
            self._http = httpx.Client(
                timeout=cfg.timeout_ms / 1000.0,
                transport=transport,
            )

    @property
    def dim(self) -> int | None:
        return self._dim

    def close(self) -> None:
        if self._http is not None:
            self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        """Embed many texts, preserving order; consults the cache per item."""
        for i, text in enumerate(texts):
            try:
                check_text(text)
            except EmptyText as exc:
                raise EmptyText(f"text at index {i} is empty") from exc

        results: list[np.ndarray | None] = [None] * len(texts)
        misses: list[int] = []
        for i, text in enumerate(texts):
            if self.cache is not None:
                digest = content_digest(self.cfg.embedder_id, text)
                hit = self.cache.get(digest, expected_dim=self._dim)
                if hit is not None:
                    results[i] = hit
                    continue
            misses.append(i)

        if misses:
            if self.cfg.is_reference:
                fresh = []
                for i in misses:
                    try:
                        fresh.append(reference_embed(texts[i], self.cfg.dim, self.cfg.effective_seed))
                    except DegenerateText as exc:
                        raise DegenerateText(f"text at index {i}: {exc}") from exc
            else:
                fresh = self._remote_embed([texts[i] for i in misses], first_index=misses[0])
            for i, vec in zip(misses, fresh):
                results[i] = vec
                if self.cache is not None:
                    self.cache.put(content_digest(self.cfg.embedder_id, texts[i]), vec)
        return results  # type: ignore[return-value]

    def _remote_embed(self, texts: list[str], first_index: int) -> list[np.ndarray]:
        payload = {"model": self.cfg.embedder_id, "texts": list(texts)}
        url = self.cfg.endpoint.rstrip("/") + "/embed"
        body = self._post_with_retries(url, payload)

        try:
            dim = int(body["dim"])
            vectors = body["vectors"]
        except (KeyError, TypeError, ValueError) as exc:
            raise RemoteUnavailable(f"malformed embedding response: {exc}") from exc
        if self._dim is None:
            self._dim = dim
        if dim != self._dim:
            raise DimensionMismatch(f"service reported dim {dim}, expected {self._dim}")
        if len(vectors) != len(texts):
            raise RemoteUnavailable(
                f"service returned {len(vectors)} vectors for {len(texts)} texts"
            )
        out = []
        for offset, values in enumerate(vectors):
            vec = np.asarray(values, dtype=np.float32)
            if vec.ndim != 1 or len(vec) != self._dim:
                raise DimensionMismatch(
                    f"vector for item {first_index + offset} has length {vec.shape}, expected {self._dim}"
                )
            out.append(vec)
        return out

    def _post_with_retries(self, url: str, payload: dict) -> dict:
        last_error: Exception | None = None
        for attempt in range(self.cfg.retries):
            if attempt:
                self._sleep(self.cfg.retry_base_ms / 1000.0 * (2 ** (attempt - 1)))
            try:
                with self._semaphore:
                    response = self._http.post(url, json=payload)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code >= 500:
                last_error = RemoteUnavailable(f"{url} -> {response.status_code}")
                continue
            if response.status_code >= 400:
                raise RemoteUnavailable(f"{url} -> {response.status_code}: {response.text[:200]}")
            try:
                return response.json()
            except ValueError as exc:
                raise RemoteUnavailable(f"{url}: non-JSON response") from exc
        raise RemoteUnavailable(
            f"{url}: no response after {self.cfg.retries} attempts ({last_error})"
        )


# --- spec-level convenience functions ----------------------------------------


def embed(text: str, cfg: EmbedderConfig, cache: EmbeddingCache | None = None,
          transport: httpx.BaseTransport | None = None) -> np.ndarray:
    """One-shot embed; prefer :class:`EmbeddingClient` for batches."""
    with EmbeddingClient(cfg, cache=cache, transport=transport) as client:
        return client.embed(text)


def embed_batch(texts: Sequence[str], cfg: EmbedderConfig, cache: EmbeddingCache | None = None,
                transport: httpx.BaseTransport | None = None) -> list[np.ndarray]:
    with EmbeddingClient(cfg, cache=cache, transport=transport) as client:
        return client.embed_batch(texts)


def cache_lookup_or_embed(text: str, cfg: EmbedderConfig, cache: EmbeddingCache,
                          transport: httpx.BaseTransport | None = None) -> np.ndarray:
    """Cache hit returns the stored vector with no remote call; a miss embeds then stores."""
    with EmbeddingClient(cfg, cache=cache, transport=transport) as client:
        return client.embed(text)


class HashingTextEmbedder(BaseEstimator, TransformerMixin):
    """The reference hashing embedder as a scikit-learn transformer.

    Stateless like ``HashingVectorizer``: ``fit`` is a no-op and ``transform``
    maps ``n`` texts to an ``(n, dim)`` float32 matrix of unit-norm rows.
    """

    def __init__(self, dim: int = DEFAULT_REFERENCE_DIM, seed: int = 0):
        self.dim = dim
        self.seed = seed

    def fit(self, X=None, y=None):
        return self

    def transform(self, X: Sequence[str]) -> np.ndarray:
        rows = [reference_embed(text, self.dim, self.seed) for text in X]
        if not rows:
            return np.empty((0, self.dim), dtype=np.float32)
        return np.vstack(rows)
