"""Greek-language retrieval-augmented question answering over course corpora.

The core is a classic retrieve-then-generate pipeline with six pluggable
chunking strategies, exact cosine top-K retrieval, and a grounded Greek
prompt, plus an experiment harness that replays the evaluation protocol
(Likert scoring, aggregation, ranking) and a small HTTP service for live use.
"""

from .chunking import (
    Chunk,
    ChunkingSpec,
    TextChunker,
    chunk_by_blank_lines,
    chunk_by_sentence_groups,
    chunk_corpus,
    chunk_fixed,
    chunk_with_spec,
)
from .corpus import NormalizedDoc, RawDocument, normalize_text
from .embedding import (
    EmbedderConfig,
    EmbeddingCache,
    EmbeddingClient,
    HashingTextEmbedder,
    embed,
    embed_batch,
    reference_embed,
)
from .index import (
    CosineTopK,
    RetrievalConfig,
    RetrievalHit,
    VectorIndex,
    build_index,
    cosine_similarity,
    load_index,
    save_index,
)
from .pipeline import (
    GeneratedAnswer,
    GeneratorConfig,
    PromptBundle,
    Query,
    ask,
    assemble_prompt,
    generate,
    generate_versions,
)
from .scoring import (
    AggregateRow,
    Criterion,
    ScoreRecord,
    aggregate_scores,
    criterion_means,
    ingest_scores,
    is_satisfactory,
    overall_mean,
    rank_models,
    strongest_criterion,
    version_total,
)
from .sentences import Sentence, split_sentences
from .experiments import ExperimentPlan, Question, ResponseRecord, run_experiment

__version__ = "0.1.0"

__all__ = [
    "Chunk", "ChunkingSpec", "TextChunker",
    "chunk_by_blank_lines", "chunk_by_sentence_groups", "chunk_corpus",
    "chunk_fixed", "chunk_with_spec",
    "NormalizedDoc", "RawDocument", "normalize_text",
    "EmbedderConfig", "EmbeddingCache", "EmbeddingClient", "HashingTextEmbedder",
    "embed", "embed_batch", "reference_embed",
    "CosineTopK", "RetrievalConfig", "RetrievalHit", "VectorIndex",
    "build_index", "cosine_similarity", "load_index", "save_index",
    "GeneratedAnswer", "GeneratorConfig", "PromptBundle", "Query",
    "ask", "assemble_prompt", "generate", "generate_versions",
    "AggregateRow", "Criterion", "ScoreRecord",
    "aggregate_scores", "criterion_means", "ingest_scores", "is_satisfactory",
    "overall_mean", "rank_models", "strongest_criterion", "version_total",
    "Sentence", "split_sentences",
    "ExperimentPlan", "Question", "ResponseRecord", "run_experiment",
    "__version__",
]
