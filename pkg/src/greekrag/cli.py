"""Operator command line: ingest, chunk, index, ask, experiments, scores, reports, serve.

Exit codes: 0 success, 1 usage error (synopsis on stderr), 2 runtime error
(stage-labeled cause on stderr).  The default embedder/generator endpoints
are the offline ones, so ``chunk`` -> ``index`` -> ``ask`` works with no
network at all.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .chunking import MODEL_IDS, ChunkingSpec, chunk_corpus, dump_chunks_jsonl
from .config import load_config
from .corpus import INDEX_SUBDIR, find_corpus, ingest_directory, load_corpus
from .embedding import (
    DEFAULT_EMBEDDER_ID,
    EmbedderConfig,
    EmbeddingCache,
    REFERENCE_ENDPOINT,
)
from .errors import GreekRagError
from .sentences import load_abbreviations
from .experiments import load_plan, run_experiment
from .index import build_index, load_index, save_index
from .pipeline import DEFAULT_GENERATOR_ID, GeneratorConfig, Query, STUB_ENDPOINT, ask as pipeline_ask
from .reporting import emit_report
from .scoring import aggregate_scores, ingest_scores


def _model_id(_ctx, _param, value: int) -> int:
    if value not in MODEL_IDS:
        raise click.BadParameter(f"unknown chunking model {value} (valid ids: 1..6)")
    return value


def _abbreviations_option(fn):
    return click.option("--abbreviations", "abbreviations_path", default=None,
                        type=click.Path(exists=True, dir_okay=False, path_type=Path),
                        help="Custom abbreviation lexicon (one entry per line, # comments).")(fn)


def _abbreviations(path: Path | None):
    return load_abbreviations(path) if path is not None else None


def _embedder_options(fn):
    fn = click.option("--embedder-endpoint", default=REFERENCE_ENDPOINT, show_default=True,
                      help="Embedding service URL, or 'reference' for the offline embedder.")(fn)
    fn = click.option("--embedder-id", default=DEFAULT_EMBEDDER_ID, show_default=True)(fn)
    fn = click.option("--dim", default=256, show_default=True, type=int,
                      help="Vector dimension (reference mode).")(fn)
    fn = click.option("--cache/--no-cache", "use_cache", default=True, show_default=True,
                      help="Persist embeddings under the corpus directory.")(fn)
    return fn


def _embed_cfg(embedder_endpoint: str, embedder_id: str, dim: int) -> EmbedderConfig:
    remote = embedder_endpoint != REFERENCE_ENDPOINT
    return EmbedderConfig(embedder_id=embedder_id, dim=None if remote else dim,
                          endpoint=embedder_endpoint)


def _cache_for(corpus_dir: Path, use_cache: bool) -> EmbeddingCache:
    return EmbeddingCache(corpus_dir / "embeddings.cache.jsonl" if use_cache else None)


@click.group(name="greekrag")
@click.version_option(__version__)
def cli():
    """Question answering over Greek course corpora."""


@cli.command()
@click.argument("source_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--corpus", "corpus_id", required=True, help="Corpus id (directory name).")
@click.option("--out", "out_dir", default="corpora", show_default=True, type=click.Path(path_type=Path))
@click.option("--title", default=None)
@click.option("--glob", "pattern", default="*.txt", show_default=True)
def ingest(source_dir: Path, corpus_id: str, out_dir: Path, title: str | None, pattern: str):
    """Normalize the text files of SOURCE_DIR into a corpus directory."""
    corpus_dir = ingest_directory(source_dir, corpus_id, out_dir, title=title, pattern=pattern)
    _corpus_id, _title, docs = load_corpus(corpus_dir)
    click.echo(f"ingested {len(docs)} documents into {corpus_dir}")


@cli.command()
@click.option("--corpus", "corpus_id", required=True)
@click.option("--corpora-dir", default="corpora", show_default=True, type=click.Path(path_type=Path))
@click.option("--model", "model_id", required=True, type=int, callback=_model_id)
@click.option("--out", "out_path", default=None, type=click.Path(path_type=Path),
              help="Write JSON Lines here instead of stdout.")
@_abbreviations_option
def chunk(corpus_id: str, corpora_dir: Path, model_id: int, out_path: Path | None,
          abbreviations_path: Path | None):
    """Chunk a corpus with one strategy; emits one JSON object per chunk."""
    corpus_dir = find_corpus(corpora_dir, corpus_id)
    _id, _title, docs = load_corpus(corpus_dir)
    chunks = chunk_corpus(docs, ChunkingSpec.for_model(model_id),
                          abbreviations=_abbreviations(abbreviations_path))
    payload = dump_chunks_jsonl(chunks)
    if out_path is None:
        click.echo(payload, nl=False)
    else:
        out_path.write_text(payload, encoding="utf-8")
        click.echo(f"wrote {len(chunks)} chunks to {out_path}")


@cli.command()
@click.option("--corpus", "corpus_id", required=True)
@click.option("--corpora-dir", default="corpora", show_default=True, type=click.Path(path_type=Path))
@click.option("--model", "model_id", required=True, type=int, callback=_model_id)
@_embedder_options
@_abbreviations_option
def index(corpus_id: str, corpora_dir: Path, model_id: int,
          embedder_endpoint: str, embedder_id: str, dim: int, use_cache: bool,
          abbreviations_path: Path | None):
    """Build and save the vector index for one (corpus, chunking model)."""
    corpus_dir = find_corpus(corpora_dir, corpus_id)
    _id, _title, docs = load_corpus(corpus_dir)
    chunks = chunk_corpus(docs, ChunkingSpec.for_model(model_id),
                          abbreviations=_abbreviations(abbreviations_path))
    cfg = _embed_cfg(embedder_endpoint, embedder_id, dim)
    built = build_index(chunks, cfg, cache=_cache_for(corpus_dir, use_cache))
    path = save_index(built, corpus_dir / INDEX_SUBDIR / f"model_{model_id}.idx")
    click.echo(f"indexed {len(built)} chunks (dim {built.dim}) -> {path}")


@cli.command(name="ask")
@click.argument("question")
@click.option("--corpus", "corpus_id", required=True)
@click.option("--corpora-dir", default="corpora", show_default=True, type=click.Path(path_type=Path))
@click.option("--model", "model_id", default=5, show_default=True, type=int, callback=_model_id)
@click.option("-k", "--top-k", default=20, show_default=True, type=click.IntRange(min=1))
@_embedder_options
@click.option("--generator-endpoint", default=STUB_ENDPOINT, show_default=True,
              help="Generation service URL, or 'stub' for the offline generator.")
@click.option("--generator-id", default=DEFAULT_GENERATOR_ID, show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
def ask_command(question: str, corpus_id: str, corpora_dir: Path, model_id: int, top_k: int,
                embedder_endpoint: str, embedder_id: str, dim: int, use_cache: bool,
                generator_endpoint: str, generator_id: str, seed: int):
    """Answer QUESTION from the corpus, printing the answer and its sources."""
    corpus_dir = find_corpus(corpora_dir, corpus_id)
    index_path = corpus_dir / INDEX_SUBDIR / f"model_{model_id}.idx"
    embed_cfg = _embed_cfg(embedder_endpoint, embedder_id, dim)
    cache = _cache_for(corpus_dir, use_cache)
    if index_path.is_file():
        built = load_index(index_path)
    else:
        _id, _title, docs = load_corpus(corpus_dir)
        chunks = chunk_corpus(docs, ChunkingSpec.for_model(model_id))
        built = build_index(chunks, embed_cfg, cache=cache)
    gen_cfg = GeneratorConfig(endpoint=generator_endpoint, generator_id=generator_id, seed=seed)
    query = Query(question=question, corpus_id=corpus_id, model_id=model_id, top_k=top_k)
    answer = pipeline_ask(query, built, embed_cfg, gen_cfg, cache=cache)

    click.echo(answer.text)
    click.echo()
    click.echo("Πηγές:")
    store = built.chunk_store
    for rank, hit in enumerate(answer.hits, start=1):
        text = store[hit.chunk_id].text
        excerpt = text if len(text) <= 120 else text[:119] + "…"
        click.echo(f"  [Πηγή {rank}] chunk {hit.chunk_id} (ομοιότητα {hit.similarity:.4f}) {excerpt}")


@cli.group()
def experiment():
    """Run evaluation grids."""


@experiment.command(name="run")
@click.argument("plan_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--corpora-dir", default="corpora", show_default=True, type=click.Path(path_type=Path))
@click.option("--out", "out_path", default="responses.jsonl", show_default=True,
              type=click.Path(path_type=Path))
@_embedder_options
@click.option("--generator-endpoint", default=STUB_ENDPOINT, show_default=True)
@click.option("--generator-id", default=DEFAULT_GENERATOR_ID, show_default=True)
def experiment_run(plan_path: Path, corpora_dir: Path, out_path: Path,
                   embedder_endpoint: str, embedder_id: str, dim: int, use_cache: bool,
                   generator_endpoint: str, generator_id: str):
    """Execute PLAN_PATH and write response records as JSON Lines."""
    plan = load_plan(plan_path)
    corpus_dir = (Path(plan.corpus_dir) if plan.corpus_dir
                  else find_corpus(corpora_dir, plan.domain))
    if not corpus_dir.is_absolute() and not corpus_dir.exists():
        corpus_dir = plan_path.parent / corpus_dir
    _id, _title, docs = load_corpus(corpus_dir)
    embed_cfg = _embed_cfg(embedder_endpoint, embedder_id, dim)
    cache = _cache_for(corpus_dir, use_cache)
    gen_cfg = GeneratorConfig(endpoint=generator_endpoint, generator_id=generator_id,
                              seed=plan.seed)

    indexes = {}

    def index_builder(model_id: int):
        if model_id not in indexes:
            chunks = chunk_corpus(docs, ChunkingSpec.for_model(model_id))
            indexes[model_id] = build_index(chunks, embed_cfg, cache=cache)
        return indexes[model_id]

    records = run_experiment(plan, index_builder, embed_cfg, gen_cfg, cache=cache,
                             out_path=out_path)
    failed = sum(1 for r in records if r.failed)
    click.echo(f"wrote {len(records)} response records to {out_path}"
               + (f" ({failed} failed cells)" if failed else ""))


@cli.group()
def scores():
    """Ingest human Likert scores."""


@scores.command(name="ingest")
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out_path", default=None, type=click.Path(path_type=Path),
              help="Also write the validated records as JSON Lines.")
def scores_ingest(csv_path: Path, out_path: Path | None):
    """Validate a scores CSV (all-or-nothing)."""
    records = ingest_scores(csv_path)
    if out_path is not None:
        lines = "".join(
            json.dumps(rec.__dict__, ensure_ascii=False, separators=(",", ":")) + "\n"
            for rec in records
        )
        out_path.write_text(lines, encoding="utf-8")
    domains = sorted({r.domain for r in records})
    click.echo(f"{len(records)} score records OK (domains: {', '.join(domains)})")


@cli.command()
@click.option("--domain", required=True)
@click.option("--scores", "scores_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--responses", "responses_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out_dir", default="reports", show_default=True,
              type=click.Path(path_type=Path))
def report(domain: str, scores_path: Path, responses_path: Path | None, out_dir: Path):
    """Aggregate scores for DOMAIN and emit report.csv / report.json / charts."""
    records = [r for r in ingest_scores(scores_path) if r.domain == domain]
    if not records:
        raise GreekRagError(f"no score records for domain {domain!r} in {scores_path}")
    rows = aggregate_scores(records)
    responses = []
    if responses_path is not None:
        from .experiments import load_records_jsonl

        responses = [r for r in load_records_jsonl(responses_path) if r.domain == domain]
    written = emit_report(rows, responses, out_dir)
    for path in written:
        click.echo(f"wrote {path}")


@cli.command()
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
def serve(config_path: Path | None, host: str | None, port: int | None):
    """Start the HTTP service (and the web UI, when built)."""
    import uvicorn

    from .service import create_app

    cfg = load_config(config_path)
    if host is not None or port is not None:
        from dataclasses import replace

        cfg = replace(cfg, host=host or cfg.host, port=port or cfg.port)
    uvicorn.run(create_app(cfg), host=cfg.host, port=cfg.port)


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit codes."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cli.main(args=argv, prog_name="greekrag", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        message = exc.format_message()
        ctx = exc.ctx
        click.echo(f"greekrag: error: {message}", err=True)
        if ctx is not None:
            click.echo(ctx.get_usage(), err=True)
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except GreekRagError as exc:
        click.echo(f"greekrag: {type(exc).__name__}: {exc}", err=True)
        return 2
    except (ValueError, KeyError) as exc:
        click.echo(f"greekrag: invalid input: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"greekrag: i/o error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
