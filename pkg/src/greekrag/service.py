"""HTTP facade: ask, corpus listing, health, and static serving of the web UI.

The service is stateless across requests — no conversation memory — so
identical requests against offline backends return identical bodies.
Indexes load from files written by ``greekrag index`` when present;
otherwise they are built in the background on first use and requests answer
503 until the build lands.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

import httpx

from . import __version__
from .chunking import MODEL_IDS, ChunkingSpec, chunk_corpus
from .config import ServiceConfig
from .corpus import INDEX_SUBDIR, MANIFEST_NAME, NormalizedDoc, load_corpus
from .embedding import EmbeddingCache, EmbeddingClient
from .errors import (
    DegenerateText,
    EmptyText,
    GreekRagError,
    PipelineStageError,
    RemoteUnavailable,
    StillIndexing,
    UnknownCorpus,
)
from .index import VectorIndex, build_index, load_index
from .pipeline import GeneratorClient, Query, generate_versions

EXCERPT_MAX_CODEPOINTS = 300


class AskRequest(BaseModel):
    question: str
    corpus_id: str
    model_id: int = 5
    top_k: int = 20


class HitPayload(BaseModel):
    chunk_id: int
    similarity: float
    excerpt: str


class AskResponse(BaseModel):
    answer: str
    hits: list[HitPayload]
    model_id: int
    top_k: int
    generator_id: str


class CorpusRegistry:
    """Loaded corpora and their per-model indexes.

    ``get_index`` returns a ready index, or raises :class:`StillIndexing`
    while a background build is running (kicking one off if needed).
    """

    def __init__(self, cfg: ServiceConfig):
        self.cfg = cfg
        self.embed_cfg = cfg.embedder_config()
        self.gen_cfg = cfg.generator_config()
        self.cache = EmbeddingCache(cfg.cache_path)
        self._corpora: dict[str, tuple[str, list[NormalizedDoc], Path]] = {}
        self._indexes: dict[tuple[str, int], VectorIndex] = {}
        self._building: set[tuple[str, int]] = set()
        self._failures: dict[tuple[str, int], str] = {}
        self._lock = threading.Lock()
        self._scan()

    def _scan(self) -> None:
        root = Path(self.cfg.corpus_dir)
        if not root.is_dir():
            return
        for manifest in sorted(root.glob(f"*/{MANIFEST_NAME}")):
            corpus_dir = manifest.parent
            corpus_id, title, docs = load_corpus(corpus_dir)
            self._corpora[corpus_id] = (title, docs, corpus_dir)
            index_dir = corpus_dir / INDEX_SUBDIR
            for model_id in MODEL_IDS:
                path = index_dir / f"model_{model_id}.idx"
                if path.is_file():
                    self._indexes[(corpus_id, model_id)] = load_index(path)

    @property
    def corpus_ids(self) -> list[str]:
        return sorted(self._corpora)

    def corpus(self, corpus_id: str) -> tuple[str, list[NormalizedDoc], Path]:
        try:
            return self._corpora[corpus_id]
        except KeyError:
            raise UnknownCorpus(f"corpus {corpus_id!r} is not loaded") from None

    def describe(self) -> list[dict]:
        out = []
        for corpus_id in self.corpus_ids:
            title, _docs, _dir = self._corpora[corpus_id]
            counts = {
                str(model_id): len(self._indexes[(corpus_id, model_id)])
                for model_id in MODEL_IDS
                if (corpus_id, model_id) in self._indexes
            }
            out.append({
                "corpus_id": corpus_id,
                "title": title,
                "chunk_counts": counts,
                "embedder_id": self.embed_cfg.embedder_id,
            })
        return out

    def get_index(self, corpus_id: str, model_id: int) -> VectorIndex:
        key = (corpus_id, model_id)
        with self._lock:
            index = self._indexes.get(key)
            if index is not None:
                return index
            if key in self._failures:
                raise GreekRagError(f"index build failed: {self._failures[key]}")
            if corpus_id not in self._corpora:
                raise UnknownCorpus(f"corpus {corpus_id!r} is not loaded")
            if key not in self._building:
                self._building.add(key)
                thread = threading.Thread(target=self._build, args=(key,), daemon=True)
                thread.start()
        raise StillIndexing(f"index for corpus {corpus_id!r} model {model_id} is being built")

    def _build(self, key: tuple[str, int]) -> None:
        corpus_id, model_id = key
        try:
            _title, docs, _dir = self._corpora[corpus_id]
            chunks = chunk_corpus(docs, ChunkingSpec.for_model(model_id))
            index = build_index(chunks, self.embed_cfg, cache=self.cache)
            with self._lock:
                self._indexes[key] = index
        except Exception as exc:  # failure is reported on the next request
            with self._lock:
                self._failures[key] = str(exc)
        finally:
            with self._lock:
                self._building.discard(key)

    def wait_ready(self, corpus_id: str, model_id: int, timeout: float = 30.0) -> None:
        """Block until a pending build for (corpus, model) finishes; test helper."""
        import time

        deadline = time.monotonic() + timeout
        key = (corpus_id, model_id)
        while time.monotonic() < deadline:
            with self._lock:
                if key in self._indexes or key in self._failures:
                    return
            time.sleep(0.02)


def _probe(url: str) -> str:
    if url in ("reference", "stub"):
        return "ok"
    try:
        httpx.get(url, timeout=2.0)
        return "ok"
    except httpx.HTTPError:
        return "down"


def _excerpt(text: str) -> str:
    if len(text) <= EXCERPT_MAX_CODEPOINTS:
        return text
    return text[:EXCERPT_MAX_CODEPOINTS - 1] + "…"


def create_app(cfg: ServiceConfig, registry: CorpusRegistry | None = None) -> FastAPI:
    app = FastAPI(title="greekrag", version=__version__)
    registry = registry or CorpusRegistry(cfg)
    app.state.registry = registry

    @app.exception_handler(RequestValidationError)
    async def malformed_request(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc.errors()[:3])})

    @app.get("/api/health")
    def health():
        return {
            "status": "ok",
            "version": __version__,
            "embedder": _probe(registry.embed_cfg.endpoint),
            "generator": _probe(registry.gen_cfg.endpoint),
        }

    @app.get("/api/corpora")
    def corpora():
        return registry.describe()

    @app.post("/api/ask")
    def handle_ask(request: AskRequest):
        question = request.question.strip()
        if not question:
            return JSONResponse(status_code=400, content={"detail": "question is empty"})
        if request.model_id not in MODEL_IDS:
            return JSONResponse(status_code=400,
                                content={"detail": f"model_id {request.model_id} outside 1..6"})
        if request.top_k < 1:
            return JSONResponse(status_code=400, content={"detail": "top_k must be >= 1"})

        try:
            index = registry.get_index(request.corpus_id, request.model_id)
        except UnknownCorpus as exc:
            return JSONResponse(status_code=404, content={"detail": str(exc)})
        except StillIndexing as exc:
            return JSONResponse(status_code=503, content={"detail": str(exc)},
                                headers={"Retry-After": "1"})
        except GreekRagError as exc:
            return JSONResponse(status_code=502, content={"detail": str(exc)})

        query = Query(question=question, corpus_id=request.corpus_id,
                      model_id=request.model_id, top_k=request.top_k)
        try:
            with EmbeddingClient(registry.embed_cfg, cache=registry.cache) as embed_client:
                with GeneratorClient(registry.gen_cfg) as gen_client:
                    answers = generate_versions(query, index, registry.embed_cfg,
                                                registry.gen_cfg, n=1,
                                                embed_client=embed_client,
                                                gen_client=gen_client)
        except PipelineStageError as exc:
            if isinstance(exc.cause, RemoteUnavailable):
                return JSONResponse(status_code=502, content={"detail": str(exc)})
            if isinstance(exc.cause, (EmptyText, DegenerateText)):
                return JSONResponse(status_code=400, content={"detail": str(exc)})
            return JSONResponse(status_code=502, content={"detail": str(exc)})

        answer = answers[0]
        store = index.chunk_store
        hits = [
            HitPayload(chunk_id=h.chunk_id, similarity=h.similarity,
                       excerpt=_excerpt(store[h.chunk_id].text))
            for h in answer.hits
        ]
        return AskResponse(answer=answer.text, hits=hits, model_id=request.model_id,
                           top_k=request.top_k, generator_id=answer.generator_id)

    static_dir = cfg.static_dir
    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
