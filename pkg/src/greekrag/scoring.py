"""Likert score ingestion and aggregation.

Human judges rate each generated answer version on three criteria (content
accuracy, completeness, clarity), each 1..5, so a version's total lies in
[3, 15]; a version is satisfactory when its total strictly exceeds 8.
Scores enter only through the CSV gate here — nothing in this package ever
auto-scores.

Aggregation per (domain, model, top_k): the per-question mean over versions,
then the mean over questions, per criterion.  All means are computed in exact
rational arithmetic and rounded once on conversion to float, so results like
``(4.20 + 3.90 + 4.20) / 3 == 4.10`` hold exactly and question-then-grand
averaging provably equals the flat grand mean on balanced data.  The overall
mean weighs the three criteria equally.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .errors import BadInteger, DuplicateKey, EmptyGroup, MissingColumn, OutOfRange

SCORE_COLUMNS = (
    "domain",
    "chunking_model",
    "top_k",
    "question_id",
    "version",
    "content_accuracy",
    "completeness",
    "clarity",
)


class Criterion(enum.Enum):
    CONTENT_ACCURACY = "content_accuracy"
    COMPLETENESS = "completeness"
    CLARITY = "clarity"


@dataclass(frozen=True)
class ScoreRecord:
    """One judge's rating of one (model, K, question, version) answer."""

    domain: str
    model_id: int
    top_k: int
    question_id: int
    version: int
    content_accuracy: int
    completeness: int
    clarity: int

    @property
    def key(self) -> tuple:
        return (self.domain, self.model_id, self.top_k, self.question_id, self.version)

    def criterion(self, criterion: Criterion) -> int:
        return getattr(self, criterion.value)


def version_total(record: ScoreRecord) -> int:
    """Sum of the three criteria; always within [3, 15] for valid records."""
    return record.content_accuracy + record.completeness + record.clarity


def is_satisfactory(total: int) -> bool:
    """Satisfactory iff the total strictly exceeds 8 (i.e. >= 9 of 15)."""
    if not 3 <= total <= 15:
        raise OutOfRange(f"version total {total} outside [3, 15]")
    return total > 8


def _parse_int(raw: str, column: str, row: int, low: int, high: int | None = None) -> int:
    try:
        value = int(raw.strip())
    except (ValueError, AttributeError) as exc:
        raise BadInteger(f"column {column}: {raw!r} is not an integer", row=row) from exc
    if value < low or (high is not None and value > high):
        bound = f"{low}..{high}" if high is not None else f">= {low}"
        raise OutOfRange(f"column {column}: {value} outside {bound}", row=row)
    return value


def ingest_scores(path: str | Path) -> list[ScoreRecord]:
    """Read and validate a scores CSV; any invalid row aborts with its row number.

    Header must carry exactly the columns
    ``domain,chunking_model,top_k,question_id,version,content_accuracy,completeness,clarity``.
    """
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fp:
        reader = csv.DictReader(fp)
        header = reader.fieldnames
        if header is None:
            raise MissingColumn("empty file, no header")
        missing = [c for c in SCORE_COLUMNS if c not in header]
        extra = [c for c in header if c not in SCORE_COLUMNS]
        if missing or extra:
            parts = []
            if missing:
                parts.append(f"missing columns {missing}")
            if extra:
                parts.append(f"unexpected columns {extra}")
            raise MissingColumn("; ".join(parts))

        records: list[ScoreRecord] = []
        seen: set[tuple] = set()
        for row_number, row in enumerate(reader, start=2):
            domain = (row["domain"] or "").strip()
            if not domain:
                raise BadInteger("column domain: empty", row=row_number)
            record = ScoreRecord(
                domain=domain,
                model_id=_parse_int(row["chunking_model"], "chunking_model", row_number, 1, 6),
                top_k=_parse_int(row["top_k"], "top_k", row_number, 1),
                question_id=_parse_int(row["question_id"], "question_id", row_number, 1),
                version=_parse_int(row["version"], "version", row_number, 1),
                content_accuracy=_parse_int(row["content_accuracy"], "content_accuracy", row_number, 1, 5),
                completeness=_parse_int(row["completeness"], "completeness", row_number, 1, 5),
                clarity=_parse_int(row["clarity"], "clarity", row_number, 1, 5),
            )
            if record.key in seen:
                raise DuplicateKey(f"key {record.key} already seen", row=row_number)
            seen.add(record.key)
            records.append(record)
    return records


# --- aggregation --------------------------------------------------------------


@dataclass(frozen=True)
class CriterionMeans:
    accuracy: float
    completeness: float
    clarity: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.accuracy, self.completeness, self.clarity)


@dataclass(frozen=True)
class AggregateRow:
    """Per-(domain, model, top_k) aggregate; means carry full precision."""

    domain: str
    model_id: int
    top_k: int
    mean_accuracy: float
    mean_completeness: float
    mean_clarity: float
    overall_mean: float
    satisfactory_rate: float
    rank: int = 0
    strongest: frozenset[Criterion] = frozenset()

    @property
    def means(self) -> CriterionMeans:
        return CriterionMeans(self.mean_accuracy, self.mean_completeness, self.mean_clarity)


def _exact_mean(values: Sequence[Fraction | int]) -> Fraction:
    if not values:
        raise EmptyGroup("mean of an empty sequence")
    return Fraction(sum(Fraction(v) for v in values), len(values))


def _hierarchical_criterion_mean(records: Sequence[ScoreRecord], criterion: Criterion) -> Fraction:
    """Mean over versions within each question, then over questions.

    On balanced data (equal version counts per question) this equals the flat
    grand mean; both are computed and cross-checked when balance holds.
    """
    by_question: dict[int, list[int]] = {}
    for rec in records:
        by_question.setdefault(rec.question_id, []).append(rec.criterion(criterion))
    question_means = [_exact_mean(vals) for vals in by_question.values()]
    result = _exact_mean(question_means)

    counts = {len(vals) for vals in by_question.values()}
    if len(counts) == 1:
        grand = _exact_mean([rec.criterion(criterion) for rec in records])
        assert abs(result - grand) <= Fraction(1, 10**9), "balanced-mean identity violated"
    return result


def criterion_means(records: Sequence[ScoreRecord],
                    group: tuple[str, int, int] | None = None) -> CriterionMeans:
    """The three criterion means for one (domain, model, top_k) group.

    With ``group`` given, records are filtered to that key first; otherwise
    they are assumed to already form one group.
    """
    if group is not None:
        domain, model_id, top_k = group
        records = [r for r in records
                   if (r.domain, r.model_id, r.top_k) == (domain, model_id, top_k)]
    if not records:
        raise EmptyGroup("no score records in group")
    return CriterionMeans(
        accuracy=float(_hierarchical_criterion_mean(records, Criterion.CONTENT_ACCURACY)),
        completeness=float(_hierarchical_criterion_mean(records, Criterion.COMPLETENESS)),
        clarity=float(_hierarchical_criterion_mean(records, Criterion.CLARITY)),
    )


def overall_mean(means: CriterionMeans | tuple[float, float, float]) -> float:
    """Unweighted mean of the three criterion means, rounded once from exact rationals."""
    values = means.as_tuple() if isinstance(means, CriterionMeans) else tuple(means)
    if len(values) != 3:
        raise ValueError("overall_mean takes exactly three criterion means")
    return float(_exact_mean([Fraction(v) for v in values]))


def strongest_criterion(means: CriterionMeans, epsilon: float = 0.005) -> frozenset[Criterion]:
    """Criteria whose mean lies within ``epsilon`` of the maximum (ties give sets)."""
    named = {
        Criterion.CONTENT_ACCURACY: means.accuracy,
        Criterion.COMPLETENESS: means.completeness,
        Criterion.CLARITY: means.clarity,
    }
    top = max(named.values())
    return frozenset(c for c, v in named.items() if top - v <= epsilon)


def aggregate_scores(records: Iterable[ScoreRecord], epsilon: float = 0.005) -> list[AggregateRow]:
    """Group records by (domain, model, top_k), aggregate, and rank within (domain, top_k)."""
    groups: dict[tuple[str, int, int], list[ScoreRecord]] = {}
    for rec in records:
        groups.setdefault((rec.domain, rec.model_id, rec.top_k), []).append(rec)
    if not groups:
        raise EmptyGroup("no score records to aggregate")

    rows = []
    for (domain, model_id, top_k), group in sorted(groups.items()):
        means = criterion_means(group)
        satisfactory = sum(1 for rec in group if is_satisfactory(version_total(rec)))
        rows.append(AggregateRow(
            domain=domain, model_id=model_id, top_k=top_k,
            mean_accuracy=means.accuracy, mean_completeness=means.completeness,
            mean_clarity=means.clarity, overall_mean=overall_mean(means),
            satisfactory_rate=satisfactory / len(group),
            strongest=strongest_criterion(means, epsilon),
        ))

    ranked: list[AggregateRow] = []
    by_panel: dict[tuple[str, int], list[AggregateRow]] = {}
    for row in rows:
        by_panel.setdefault((row.domain, row.top_k), []).append(row)
    for panel in by_panel.values():
        ranked.extend(rank_models(panel))
    ranked.sort(key=lambda r: (r.domain, r.top_k, r.rank))
    return ranked


def rank_models(rows: Sequence[AggregateRow]) -> list[AggregateRow]:
    """Order rows of one (domain, top_k) panel, best first, and stamp ranks 1..n.

    Sort key: overall mean descending, then accuracy descending, then model id.
    """
    if not rows:
        raise EmptyGroup("nothing to rank")
    ordering = sorted(rows, key=lambda r: (-r.overall_mean, -r.mean_accuracy, r.model_id))
    return [
        AggregateRow(domain=r.domain, model_id=r.model_id, top_k=r.top_k,
                     mean_accuracy=r.mean_accuracy, mean_completeness=r.mean_completeness,
                     mean_clarity=r.mean_clarity, overall_mean=r.overall_mean,
                     satisfactory_rate=r.satisfactory_rate, rank=position,
                     strongest=r.strongest)
        for position, r in enumerate(ordering, start=1)
    ]
