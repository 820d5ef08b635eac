"""Acceptance gate: one test per release criterion, at the stated tolerances.

Each test prints a PASS/FAIL line via the conftest hook, so a plain
``pytest tests/test_acceptance.py`` doubles as the release checklist.
"""

import json
import math
import re
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from chunk_props import (
    check_fixed_size_bound,
    check_group_sizes,
    check_no_blank_lines,
    check_ordering,
    check_reconstruction,
)
from conftest import SAMPLE_DOCS
from fixtures import FAMILY_OVERALL_2DP, family_psychology_csv
from textgen import corpus_of_texts

from greekrag.chunking import Chunk, ChunkingSpec, chunk_by_blank_lines, chunk_with_spec
from greekrag.cli import main as cli_main
from greekrag.embedding import EmbedderConfig
from greekrag.index import RetrievalConfig, VectorIndex, load_index, save_index
from greekrag.scoring import (
    ScoreRecord,
    aggregate_scores,
    ingest_scores,
    is_satisfactory,
    overall_mean,
    version_total,
)
from greekrag.index import build_index, cosine_similarity

DEMO_DIR = Path(__file__).parent.parent / "demo"


def test_figure1_arithmetic(tmp_path):
    """Fixture scores reproduce the published per-model overall means at 2 decimals."""
    started = time.perf_counter()

    path = tmp_path / "scores.csv"
    path.write_text(family_psychology_csv(), encoding="utf-8")
    rows = aggregate_scores(ingest_scores(path))
    by_model = {r.model_id: r for r in rows}

    model5 = by_model[5]
    assert (model5.mean_accuracy, model5.mean_completeness, model5.mean_clarity) == (4.40, 3.70, 4.30)
    assert abs(model5.overall_mean - 4.13) <= 0.005
    assert model5.rank == 1

    assert [f"{by_model[m].overall_mean:.2f}" for m in range(1, 7)] == \
        ["3.60", "3.63", "3.70", "4.10", "4.13", "3.77"]

    # the committed demo fixture is the same engineered dataset
    demo_rows = aggregate_scores(ingest_scores(DEMO_DIR / "scores_family_psychology_k20.csv"))
    assert {r.model_id: f"{r.overall_mean:.2f}" for r in demo_rows} == \
        {m: v for m, v in zip(range(1, 7), FAMILY_OVERALL_2DP)}

    assert time.perf_counter() - started < 1.0


def test_model4_consistency_oracle():
    """Implied accuracy 3*4.10 - 3.90 - 4.20 = 4.20; its overall mean is 4.10 exactly."""
    implied = 3 * Fraction("4.10") - Fraction("3.90") - Fraction("4.20")
    assert implied == Fraction("4.20")
    assert overall_mean((4.20, 3.90, 4.20)) == 4.10


def test_protocol_cardinality(tmp_path, monkeypatch):
    """The demo plan (6 models x 5 questions x 2 versions, one K) emits exactly 60 records."""
    monkeypatch.chdir(tmp_path)
    source = tmp_path / "src"
    source.mkdir()
    for doc_id, text in SAMPLE_DOCS.items():
        (source / f"{doc_id}.txt").write_text(text, encoding="utf-8")
    assert cli_main(["ingest", str(source), "--corpus", "family-psychology",
                     "--out", "corpora"]) == 0

    plan = json.loads((DEMO_DIR / "plan_family_psychology.json").read_text(encoding="utf-8"))
    plan["corpus_dir"] = str(tmp_path / "corpora" / "family-psychology")
    plan_path = tmp_path / "plan.json"
    plan_path.write_text(json.dumps(plan, ensure_ascii=False), encoding="utf-8")

    out = tmp_path / "responses.jsonl"
    assert cli_main(["experiment", "run", str(plan_path), "--out", str(out)]) == 0
    records = [json.loads(line) for line in out.read_text(encoding="utf-8").splitlines()]

    assert len(records) == 60
    per_question = {}
    for rec in records:
        key = rec["question_id"]
        per_question[key] = per_question.get(key, 0) + 1
    assert per_question == {q: 12 for q in range(1, 6)}
    assert all(rec["error"] is None for rec in records)
    keys = {(r["model_id"], r["top_k"], r["question_id"], r["version"]) for r in records}
    assert len(keys) == 60


def test_scoring_bounds_exhaustive():
    """All 125 criterion triples: totals within [3, 15]; satisfactory iff total >= 9."""
    checked = 0
    for a in range(1, 6):
        for b in range(1, 6):
            for c in range(1, 6):
                record = ScoreRecord(domain="d", model_id=1, top_k=20, question_id=1,
                                     version=1, content_accuracy=a, completeness=b, clarity=c)
                total = version_total(record)
                assert 3 <= total <= 15
                assert is_satisfactory(total) == (total >= 9)
                checked += 1
    assert checked == 125
    assert is_satisfactory(8) is False
    assert is_satisfactory(9) is True


def test_chunker_property_suite():
    """1000 generated Greek-like texts, all six models, zero property failures."""
    texts = corpus_of_texts(1000)
    assert len(texts) >= 1000
    for text in texts:
        for model_id in (1, 2, 3, 4):
            spec = ChunkingSpec.for_model(model_id)
            chunks = chunk_with_spec(text, spec)
            check_fixed_size_bound(text, chunks, spec.max_len)   # (i) + (ii)
            check_reconstruction(text, chunks, " ")              # (iii)
            check_ordering(chunks)

        chunks5 = chunk_with_spec(text, ChunkingSpec.for_model(5))
        check_group_sizes(text, chunks5, 3)                      # (i) + (iv)
        check_reconstruction(text, chunks5, " ")
        check_ordering(chunks5)

        chunks6 = chunk_with_spec(text, ChunkingSpec.for_model(6))
        check_no_blank_lines(chunks6)                            # (v)
        check_reconstruction(text, chunks6, "\n\n")
        check_ordering(chunks6)
        rejoined = "\n\n".join(c.text for c in chunks6)
        assert [c.text for c in chunk_by_blank_lines(rejoined)] == [c.text for c in chunks6]


def _oracle_ranking(vectors, query):
    """Pure-python stable full sort by (similarity desc, id asc)."""
    sims = []
    qn = math.sqrt(math.fsum(float(x) * float(x) for x in query))
    for vec in vectors:
        dot = math.fsum(float(x) * float(y) for x, y in zip(vec, query))
        n = math.sqrt(math.fsum(float(x) * float(x) for x in vec))
        sims.append(max(-1.0, min(1.0, dot / (n * qn))))
    order = sorted(range(len(vectors)), key=lambda i: (-sims[i], i))
    return order, sims


def test_retrieval_oracle():
    """search() equals the brute-force sorted prefix on 100 random corpora, under 10 s."""
    started = time.perf_counter()
    rng = np.random.default_rng(20250810)
    for corpus_no in range(100):
        n = int(rng.integers(1, 501))
        dim = int(rng.integers(2, 65))
        matrix = rng.normal(size=(n, dim)).astype(np.float32)
        if n >= 4:  # engineered exact ties
            matrix[n - 1] = matrix[0]
            matrix[n // 2] = matrix[0]
        chunks = [Chunk(chunk_id=i, doc_id="d", model_id=5, start=i, end=i + 1, text=str(i))
                  for i in range(n)]
        index = VectorIndex(dim=dim, embedder_id="oracle", chunks=chunks,
                            vectors=[matrix[i] for i in range(n)])
        query = rng.normal(size=dim)
        order, sims = _oracle_ranking([matrix[i] for i in range(n)], query)

        top50 = None
        for top_k in (1, 20, 50, n, n + 7):
            hits = index.search(query, RetrievalConfig(top_k=top_k))
            expected = order[:min(top_k, n)]
            assert [h.chunk_id for h in hits] == expected, f"corpus {corpus_no}, k={top_k}"
            for h in hits:
                assert abs(h.similarity - sims[h.chunk_id]) < 1e-9
            if top_k == 20:
                top20 = hits
            if top_k == 50:
                top50 = hits
        assert top50[:len(top20)] == top20  # monotone K: top-20 prefixes top-50
    assert time.perf_counter() - started < 10.0


def test_cosine_properties():
    """Self-similarity, exact symmetry, positive-scale invariance, hand-computed value."""
    rng = np.random.default_rng(7)
    for _ in range(200):
        v = rng.normal(size=int(rng.integers(2, 48)))
        assert abs(cosine_similarity(v, v) - 1.0) < 1e-6

    for _ in range(200):
        dim = int(rng.integers(2, 48))
        a, b = rng.normal(size=dim), rng.normal(size=dim)
        assert cosine_similarity(a, b) == cosine_similarity(b, a)
        for alpha in (0.5, 3.0, 1000.0):
            assert abs(cosine_similarity(alpha * a, b) - cosine_similarity(a, b)) < 1e-6

    assert abs(cosine_similarity([1, 2, 2], [2, 1, 2]) - 8.0 / 9.0) < 1e-12


def test_persistence_bit_identical(tmp_path, docs):
    """save -> load restores byte-equal vectors and identical hit lists."""
    from greekrag.chunking import chunk_corpus

    chunks = chunk_corpus(docs, ChunkingSpec.for_model(5))
    embed_cfg = EmbedderConfig(dim=128)
    index = build_index(chunks, embed_cfg)
    path = save_index(index, tmp_path / "model_5.idx")
    loaded = load_index(path)

    assert loaded.dim == index.dim and loaded.embedder_id == index.embedder_id
    assert loaded.chunks == index.chunks
    for chunk in index.chunks:
        assert loaded.vector(chunk.chunk_id).tobytes() == index.vector(chunk.chunk_id).tobytes()

    rng = np.random.default_rng(31)
    for _ in range(20):
        query = rng.normal(size=index.dim)
        for top_k in (1, 3, len(index) + 5):
            assert loaded.search(query, RetrievalConfig(top_k=top_k)) == \
                index.search(query, RetrievalConfig(top_k=top_k))


def _run_offline_flow(base: Path, question: str) -> dict:
    source = base / "src"
    source.mkdir(parents=True)
    for doc_id, text in SAMPLE_DOCS.items():
        (source / f"{doc_id}.txt").write_text(text, encoding="utf-8")
    corpora = base / "corpora"

    assert cli_main(["ingest", str(source), "--corpus", "fp", "--out", str(corpora)]) == 0
    chunks_path = base / "chunks.jsonl"
    assert cli_main(["chunk", "--corpus", "fp", "--corpora-dir", str(corpora),
                     "--model", "5", "--out", str(chunks_path)]) == 0
    assert cli_main(["index", "--corpus", "fp", "--corpora-dir", str(corpora),
                     "--model", "5"]) == 0
    return {
        "chunks": chunks_path.read_bytes(),
        "index": (corpora / "fp" / "indexes" / "model_5.idx").read_bytes(),
        "corpora": corpora,
    }


def test_offline_end_to_end_determinism(tmp_path, capsys):
    """Mock-mode ingest -> chunk -> index -> ask twice: byte-identical, correct citations."""
    question = "Τι ρόλο παίζει η οικογένεια στην κοινωνικοποίηση;"

    first = _run_offline_flow(tmp_path / "run1", question)
    capsys.readouterr()  # drop ingest/chunk/index progress lines (they carry tmp paths)
    assert cli_main(["ask", "--corpus", "fp", "--corpora-dir", str(first["corpora"]),
                     "--model", "5", "-k", "20", "--seed", "3", question]) == 0
    answer1 = capsys.readouterr().out

    second = _run_offline_flow(tmp_path / "run2", question)
    capsys.readouterr()
    assert cli_main(["ask", "--corpus", "fp", "--corpora-dir", str(second["corpora"]),
                     "--model", "5", "-k", "20", "--seed", "3", question]) == 0
    answer2 = capsys.readouterr().out

    assert first["chunks"] == second["chunks"]
    assert first["index"] == second["index"]
    assert answer1 == answer2

    # the stub answer must name exactly the retrieved chunk ids, in rank order
    index = load_index(first["corpora"] / "fp" / "indexes" / "model_5.idx")
    from greekrag.embedding import embed

    hits = index.search(embed(question, EmbedderConfig(dim=256)),
                        RetrievalConfig(top_k=20))
    cited = [int(x) for x in re.search(r"\[([0-9, ]+)\]", answer1).group(1).split(",")]
    assert cited == [h.chunk_id for h in hits]
    assert len(hits) == min(20, len(index))
