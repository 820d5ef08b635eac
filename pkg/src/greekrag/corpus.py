"""Corpus documents: normalization, on-disk layout and the corpus manifest.

A corpus on disk is a directory holding ``corpus.json`` plus one UTF-8 text
file per document::

    corpora/family-psychology/
        corpus.json            # {corpus_id, title, documents: [{doc_id, path, sha256}]}
        docs/kefalaio-1.txt
        docs/kefalaio-2.txt
        indexes/model_5.idx    # written by `greekrag index`
"""

from __future__ import annotations

import hashlib
import json
import unicodedata
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidEncoding, UnknownCorpus

MANIFEST_NAME = "corpus.json"
DOCS_SUBDIR = "docs"
INDEX_SUBDIR = "indexes"


@dataclass(frozen=True)
class RawDocument:
    """One source document before normalization."""

    doc_id: str
    title: str
    body: str


@dataclass(frozen=True)
class NormalizedDoc:
    """A document after NFC + line-ending normalization; offsets elsewhere refer to ``text``."""

    doc_id: str
    title: str
    text: str


def normalize_text(body: str) -> str:
    """Unify line endings to LF and apply Unicode NFC; nothing else is altered."""
    unified = body.replace("\r\n", "\n").replace("\r", "\n")
    return unicodedata.normalize("NFC", unified)


def decode_utf8(data: bytes, origin: str = "<input>") -> str:
    """Decode bytes as UTF-8, mapping decode failures to :class:`InvalidEncoding`."""
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidEncoding(f"{origin}: not valid UTF-8 ({exc})") from exc


def normalize_document(doc: RawDocument) -> NormalizedDoc:
    return NormalizedDoc(doc_id=doc.doc_id, title=doc.title, text=normalize_text(doc.body))


# --- on-disk corpus -------------------------------------------------------


def ingest_directory(source_dir: Path, corpus_id: str, out_dir: Path, *,
                     title: str | None = None, pattern: str = "*.txt") -> Path:
    """Normalize every text file under ``source_dir`` into a corpus directory.

    Returns the corpus directory (``out_dir / corpus_id``). Documents are
    ordered by filename so repeated ingests are deterministic.
    """
    source_dir = Path(source_dir)
    files = sorted(p for p in source_dir.glob(pattern) if p.is_file())
    if not files:
        raise FileNotFoundError(f"no files matching {pattern!r} under {source_dir}")

    corpus_dir = Path(out_dir) / corpus_id
    docs_dir = corpus_dir / DOCS_SUBDIR
    docs_dir.mkdir(parents=True, exist_ok=True)

    documents = []
    for path in files:
        text = normalize_text(decode_utf8(path.read_bytes(), origin=str(path)))
        doc_id = path.stem
        dest = docs_dir / f"{doc_id}.txt"
        payload = text.encode("utf-8")
        dest.write_bytes(payload)
        documents.append({
            "doc_id": doc_id,
            "path": f"{DOCS_SUBDIR}/{dest.name}",
            "sha256": hashlib.sha256(payload).hexdigest(),
        })

    manifest = {
        "corpus_id": corpus_id,
        "title": title or corpus_id,
        "documents": documents,
    }
    (corpus_dir / MANIFEST_NAME).write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    return corpus_dir


def load_corpus(corpus_dir: Path) -> tuple[str, str, list[NormalizedDoc]]:
    """Read a corpus directory back; returns (corpus_id, title, documents).

    Stored documents are already normalized; normalization is idempotent so we
    re-apply it defensively.
    """
    corpus_dir = Path(corpus_dir)
    manifest_path = corpus_dir / MANIFEST_NAME
    if not manifest_path.is_file():
        raise UnknownCorpus(f"no {MANIFEST_NAME} under {corpus_dir}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    docs = []
    for entry in manifest["documents"]:
        path = corpus_dir / entry["path"]
        text = normalize_text(decode_utf8(path.read_bytes(), origin=str(path)))
        docs.append(NormalizedDoc(doc_id=entry["doc_id"], title=entry["doc_id"], text=text))
    return manifest["corpus_id"], manifest.get("title", manifest["corpus_id"]), docs


def find_corpus(corpora_dir: Path, corpus_id: str) -> Path:
    """Locate ``corpus_id`` under a corpora root, raising :class:`UnknownCorpus` if absent."""
    corpus_dir = Path(corpora_dir) / corpus_id
    if not (corpus_dir / MANIFEST_NAME).is_file():
        raise UnknownCorpus(f"corpus {corpus_id!r} not found under {corpora_dir}")
    return corpus_dir
