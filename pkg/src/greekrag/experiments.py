"""Experiment grids: run every (chunking model, top_k, question) cell and record answers.

A plan fixes the domain, the chunking models, the retrieval depths, the
questions and the number of answer versions per question.  Running it yields
``models x depths x questions x versions`` response records; a failed cell is
recorded with its error and the grid carries on.  Records serialize as JSON
Lines and are byte-stable across reruns apart from the timestamp field.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .chunking import MODEL_IDS
from .embedding import EmbedderConfig, EmbeddingCache
from .errors import GreekRagError, UnknownModel
from .index import RetrievalHit, VectorIndex
from .pipeline import GeneratedAnswer, GeneratorConfig, Query, generate_versions


@dataclass(frozen=True)
class Question:
    question_id: int
    text: str
    domain: str = ""


@dataclass(frozen=True)
class ExperimentPlan:
    domain: str
    questions: tuple[Question, ...]
    model_ids: tuple[int, ...] = MODEL_IDS
    top_k_values: tuple[int, ...] = (20,)
    versions: int = 2
    corpus_dir: str = ""
    seed: int = 0

    def __post_init__(self):
        if self.versions < 1:
            raise ValueError("versions must be >= 1")
        if not self.model_ids or not self.questions:
            raise ValueError("plan needs at least one model and one question")
        for model_id in self.model_ids:
            if model_id not in MODEL_IDS:
                raise UnknownModel(model_id)

    @property
    def cells(self) -> int:
        return len(self.model_ids) * len(self.top_k_values) * len(self.questions)


@dataclass(frozen=True)
class ResponseRecord:
    """One generated answer version, keyed by (domain, model, top_k, question, version)."""

    domain: str
    model_id: int
    top_k: int
    question_id: int
    version: int
    answer: str
    hits: tuple[RetrievalHit, ...]
    generator_id: str
    seed: int
    timestamp: str
    error: str | None = None

    @property
    def key(self) -> tuple:
        return (self.domain, self.model_id, self.top_k, self.question_id, self.version)

    @property
    def failed(self) -> bool:
        return self.error is not None


def load_plan(path: str | Path) -> ExperimentPlan:
    """Read a plan JSON file (fields mirror :class:`ExperimentPlan`)."""
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    questions = tuple(
        Question(question_id=int(q["question_id"]), text=str(q["text"]),
                 domain=str(q.get("domain", obj["domain"])))
        for q in obj["questions"]
    )
    return ExperimentPlan(
        domain=str(obj["domain"]),
        questions=questions,
        model_ids=tuple(int(m) for m in obj.get("model_ids", MODEL_IDS)),
        top_k_values=tuple(int(k) for k in obj.get("top_k_values", [20])),
        versions=int(obj.get("versions", 2)),
        corpus_dir=str(obj.get("corpus_dir", "")),
        seed=int(obj.get("seed", 0)),
    )


def record_to_dict(record: ResponseRecord) -> dict:
    return {
        "domain": record.domain,
        "model_id": record.model_id,
        "top_k": record.top_k,
        "question_id": record.question_id,
        "version": record.version,
        "answer": record.answer,
        "hits": [{"chunk_id": h.chunk_id, "similarity": h.similarity} for h in record.hits],
        "generator_id": record.generator_id,
        "seed": record.seed,
        "timestamp": record.timestamp,
        "error": record.error,
    }


def record_from_dict(obj: dict) -> ResponseRecord:
    return ResponseRecord(
        domain=str(obj["domain"]), model_id=int(obj["model_id"]), top_k=int(obj["top_k"]),
        question_id=int(obj["question_id"]), version=int(obj["version"]),
        answer=str(obj["answer"]),
        hits=tuple(RetrievalHit(int(h["chunk_id"]), float(h["similarity"])) for h in obj["hits"]),
        generator_id=str(obj["generator_id"]), seed=int(obj["seed"]),
        timestamp=str(obj["timestamp"]), error=obj.get("error"),
    )


def dump_records_jsonl(records: Sequence[ResponseRecord]) -> str:
    return "".join(
        json.dumps(record_to_dict(r), ensure_ascii=False, separators=(",", ":")) + "\n"
        for r in records
    )


def load_records_jsonl(path: str | Path) -> list[ResponseRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(record_from_dict(json.loads(line)))
    return records


def _utc_timestamp(clock: Callable[[], float]) -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(clock()))


def run_experiment(plan: ExperimentPlan,
                   index_builder: Callable[[int], VectorIndex],
                   embed_cfg: EmbedderConfig,
                   gen_cfg: GeneratorConfig,
                   cache: EmbeddingCache | None = None,
                   out_path: str | Path | None = None,
                   clock: Callable[[], float] = time.time) -> list[ResponseRecord]:
    """Execute the full grid.

    ``index_builder(model_id)`` supplies (or builds) the index for one
    chunking model; it runs once per model.  Every (model, top_k, question)
    cell generates ``plan.versions`` answers from a single retrieval.  Cell
    failures are recorded (``error`` set, empty answer) without aborting the
    rest of the grid.
    """
    records: list[ResponseRecord] = []
    for model_id in plan.model_ids:
        try:
            index = index_builder(model_id)
            build_error = None
        except GreekRagError as exc:
            index, build_error = None, f"index: {exc}"
        for top_k in plan.top_k_values:
            for question in plan.questions:
                base_seed = plan.seed
                if build_error is not None:
                    answers: list[GeneratedAnswer] = []
                    cell_error = build_error
                else:
                    try:
                        query = Query(question=question.text, corpus_id=plan.corpus_dir,
                                      model_id=model_id, top_k=top_k)
                        answers = generate_versions(query, index, embed_cfg,
                                                    gen_cfg.with_seed(base_seed),
                                                    n=plan.versions, cache=cache)
                        cell_error = None
                    except GreekRagError as exc:
                        answers, cell_error = [], str(exc)
                timestamp = _utc_timestamp(clock)
                for version in range(1, plan.versions + 1):
                    answer = answers[version - 1] if cell_error is None else None
                    records.append(ResponseRecord(
                        domain=plan.domain, model_id=model_id, top_k=top_k,
                        question_id=question.question_id, version=version,
                        answer=answer.text if answer else "",
                        hits=answer.hits if answer else (),
                        generator_id=answer.generator_id if answer else gen_cfg.generator_id,
                        seed=base_seed + version - 1,
                        timestamp=timestamp,
                        error=cell_error,
                    ))
    if out_path is not None:
        Path(out_path).write_text(dump_records_jsonl(records), encoding="utf-8")
    return records
