"""End-to-end question answering: embed, retrieve, assemble a grounded prompt, generate.

The prompt is a fixed two-part Greek template: a system directive that
restricts the answer to the supplied excerpts (declining when they are
insufficient), followed by the excerpts as numbered ``[Πηγή i]`` blocks in
retrieval rank order, then the verbatim question.  The template carries a
version string so recorded experiments stay comparable if it ever changes.

Generation goes to a chat-completions-style JSON endpoint
(``POST {endpoint}/generate``); ``endpoint="stub"`` selects a deterministic
offline generator that echoes the question and the chunk ids it saw, which
is what makes the whole flow testable without credentials.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import httpx

from ._validation import check_text
from .errors import (
    EmptyContext,
    GeneratorRefused,
    GreekRagError,
    PipelineStageError,
    RemoteUnavailable,
    UnknownChunk,
)
from .chunking import Chunk
from .embedding import EmbedderConfig, EmbeddingCache, EmbeddingClient
from .index import RetrievalConfig, RetrievalHit, VectorIndex

DEFAULT_GENERATOR_ID = "gemini-flash-2.0"
STUB_ENDPOINT = "stub"
PROMPT_TEMPLATE_VERSION = "v1"

SYSTEM_INSTRUCTION = (
    "Είσαι βοηθός μελέτης για πανεπιστημιακό μάθημα. Απάντησε στα ελληνικά "
    "αποκλειστικά με βάση τα αποσπάσματα που σου δίνονται, χωρίς εξωτερικές "
    "γνώσεις. Αν τα αποσπάσματα δεν επαρκούν για την ερώτηση, δήλωσέ το ρητά "
    "και μην απαντήσεις. Παρέθεσε τις πηγές σου με τη μορφή [Πηγή i]."
)


@dataclass(frozen=True)
class Query:
    """One question against a chunked corpus."""

    question: str
    corpus_id: str = ""
    model_id: int = 5
    top_k: int = 20

    def __post_init__(self):
        check_text(self.question)
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass(frozen=True)
class ContextBlock:
    source_index: int  # 1-based retrieval rank
    chunk_id: int
    text: str
    similarity: float

    @property
    def label(self) -> str:
        return f"[Πηγή {self.source_index}]"

    @property
    def hit(self) -> RetrievalHit:
        return RetrievalHit(chunk_id=self.chunk_id, similarity=self.similarity)


@dataclass(frozen=True)
class PromptBundle:
    system_instruction: str
    context_blocks: tuple[ContextBlock, ...]
    question: str

    def render(self) -> str:
        """Flat text form of the prompt (used for logging and the stub path)."""
        blocks = "\n".join(f"{b.label} {b.text}" for b in self.context_blocks)
        return f"{self.system_instruction}\n\n{blocks}\n\nΕρώτηση: {self.question}"


@dataclass(frozen=True)
class GeneratorConfig:
    """Where and how answers are generated; ``endpoint="stub"`` is fully offline."""

    endpoint: str = STUB_ENDPOINT
    generator_id: str = DEFAULT_GENERATOR_ID
    temperature: float = 0.7
    seed: int = 0
    timeout_ms: int = 30_000
    retries: int = 3
    retry_base_ms: int = 250
    max_in_flight: int = 2
    prompt_version: str = PROMPT_TEMPLATE_VERSION

    def __post_init__(self):
        if not self.endpoint:
            raise ValueError("endpoint must be non-empty")
        if not (self.temperature >= 0.0):
            raise ValueError("temperature must be finite and >= 0")

    @property
    def is_stub(self) -> bool:
        return self.endpoint == STUB_ENDPOINT

    def with_seed(self, seed: int) -> "GeneratorConfig":
        return GeneratorConfig(endpoint=self.endpoint, generator_id=self.generator_id,
                               temperature=self.temperature, seed=seed,
                               timeout_ms=self.timeout_ms, retries=self.retries,
                               retry_base_ms=self.retry_base_ms, max_in_flight=self.max_in_flight,
                               prompt_version=self.prompt_version)


@dataclass(frozen=True)
class GeneratedAnswer:
    text: str
    version_tag: int
    hits: tuple[RetrievalHit, ...]
    generator_id: str
    latency_ms: float


def assemble_prompt(hits: Sequence[RetrievalHit], chunk_store: dict[int, Chunk],
                    question: str, system_instruction: str = SYSTEM_INSTRUCTION) -> PromptBundle:
    """One context block per hit, in rank order, plus the verbatim question."""
    if not hits:
        raise EmptyContext("no retrieval hits to ground the answer on")
    check_text(question)
    blocks = []
    for rank, hit in enumerate(hits, start=1):
        chunk = chunk_store.get(hit.chunk_id)
        if chunk is None:
            raise UnknownChunk(f"hit references chunk {hit.chunk_id} not present in the store")
        blocks.append(ContextBlock(source_index=rank, chunk_id=hit.chunk_id,
                                   text=chunk.text, similarity=hit.similarity))
    return PromptBundle(system_instruction=system_instruction,
                        context_blocks=tuple(blocks), question=question)


def stub_answer(bundle: PromptBundle, seed: int) -> str:
    """Deterministic offline answer: echoes the question and every context chunk id once.

    The seed appears only in the trailing suffix, so two versions of one
    question differ in exactly that suffix.
    """
    ids = ", ".join(str(b.chunk_id) for b in bundle.context_blocks)
    return (
        f"Σύμφωνα με τα αποσπάσματα [{ids}] απαντώ στην ερώτηση: «{bundle.question}» "
        f"(παραλλαγή {seed})"
    )


class GeneratorClient:
    """Calls the generation endpoint with bounded retries and in-flight limit."""

    def __init__(self, cfg: GeneratorConfig, transport: httpx.BaseTransport | None = None,
                 sleep: Callable[[float], None] = time.sleep):
        self.cfg = cfg
        self._sleep = sleep
        self._semaphore = threading.Semaphore(cfg.max_in_flight)
        self._http = None
        if not cfg.is_stub:
            self._http = httpx.Client(timeout=cfg.timeout_ms / 1000.0, transport=transport)

    def close(self) -> None:
        if self._http is not None:
            self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def generate(self, bundle: PromptBundle, cfg: GeneratorConfig | None = None) -> GeneratedAnswer:
        cfg = cfg or self.cfg
        hits = tuple(b.hit for b in bundle.context_blocks)
        if cfg.is_stub:
            return GeneratedAnswer(text=stub_answer(bundle, cfg.seed), version_tag=1,
                                   hits=hits, generator_id=cfg.generator_id, latency_ms=0.0)
        payload = {
            "model": cfg.generator_id,
            "system": bundle.system_instruction,
            "context": [{"i": b.source_index, "text": b.text} for b in bundle.context_blocks],
            "question": bundle.question,
            "temperature": cfg.temperature,
            "seed": cfg.seed,
        }
        url = cfg.endpoint.rstrip("/") + "/generate"
        started = time.perf_counter()
        body = self._post_with_retries(url, payload, cfg)
        latency_ms = (time.perf_counter() - started) * 1000.0
        text = body.get("text") if isinstance(body, dict) else None
        if not text or not str(text).strip():
            raise GeneratorRefused(f"{url}: empty or blocked completion")
        return GeneratedAnswer(text=str(text), version_tag=1, hits=hits,
                               generator_id=cfg.generator_id, latency_ms=latency_ms)

    def _post_with_retries(self, url: str, payload: dict, cfg: GeneratorConfig) -> dict:
        last_error: Exception | None = None
        for attempt in range(cfg.retries):
            if attempt:
                self._sleep(cfg.retry_base_ms / 1000.0 * (2 ** (attempt - 1)))
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
        raise RemoteUnavailable(f"{url}: no response after {cfg.retries} attempts ({last_error})")


def generate(bundle: PromptBundle, cfg: GeneratorConfig,
             transport: httpx.BaseTransport | None = None) -> GeneratedAnswer:
    with GeneratorClient(cfg, transport=transport) as client:
        return client.generate(bundle)


def _stage(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except GreekRagError as exc:
        raise PipelineStageError(stage, exc) from exc


def ask(query: Query, index: VectorIndex, embed_cfg: EmbedderConfig, gen_cfg: GeneratorConfig,
        cache: EmbeddingCache | None = None,
        embed_client: EmbeddingClient | None = None,
        gen_client: GeneratorClient | None = None,
        version_tag: int = 1) -> GeneratedAnswer:
    """Embed the question, retrieve top-K, assemble the prompt, generate.

    Component failures re-raise as :class:`PipelineStageError` with the stage
    name (embed / search / assemble / generate) and the original cause.
    """
    owns_embed = embed_client is None
    owns_gen = gen_client is None
    if owns_embed:
        embed_client = EmbeddingClient(embed_cfg, cache=cache)
    if owns_gen:
        gen_client = GeneratorClient(gen_cfg)
    try:
        query_vec = _stage("embed", embed_client.embed, query.question)
        hits = _stage("search", index.search, query_vec, RetrievalConfig(top_k=query.top_k))
        bundle = _stage("assemble", assemble_prompt, hits, index.chunk_store, query.question)
        answer = _stage("generate", gen_client.generate, bundle, gen_cfg)
    finally:
        if owns_embed:
            embed_client.close()
        if owns_gen:
            gen_client.close()
    return GeneratedAnswer(text=answer.text, version_tag=version_tag, hits=tuple(hits),
                           generator_id=answer.generator_id, latency_ms=answer.latency_ms)


def generate_versions(query: Query, index: VectorIndex, embed_cfg: EmbedderConfig,
                      gen_cfg: GeneratorConfig, n: int = 2,
                      cache: EmbeddingCache | None = None,
                      embed_client: EmbeddingClient | None = None,
                      gen_client: GeneratorClient | None = None) -> list[GeneratedAnswer]:
    """``n`` generations from one retrieval, seeds ``seed, seed+1, ...``, tags ``1..n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    owns_embed = embed_client is None
    owns_gen = gen_client is None
    if owns_embed:
        embed_client = EmbeddingClient(embed_cfg, cache=cache)
    if owns_gen:
        gen_client = GeneratorClient(gen_cfg)
    try:
        query_vec = _stage("embed", embed_client.embed, query.question)
        hits = _stage("search", index.search, query_vec, RetrievalConfig(top_k=query.top_k))
        bundle = _stage("assemble", assemble_prompt, hits, index.chunk_store, query.question)
        answers = []
        for tag in range(1, n + 1):
            cfg = gen_cfg.with_seed(gen_cfg.seed + tag - 1)
            answer = _stage("generate", gen_client.generate, bundle, cfg)
            answers.append(GeneratedAnswer(text=answer.text, version_tag=tag, hits=tuple(hits),
                                           generator_id=answer.generator_id,
                                           latency_ms=answer.latency_ms))
    finally:
        if owns_embed:
            embed_client.close()
        if owns_gen:
            gen_client.close()
    return answers
