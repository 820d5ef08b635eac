"""Greek-aware sentence boundary detection.

A sentence ends after one of the terminators ``. ! ; … ?`` when the next
character is whitespace (or the text ends there).  The Greek question mark is
the semicolon ``;`` (U+037E normalizes to it under NFC), so plain semicolons
terminate.  The ano teleia ``·`` is a pause mark, never a terminator.

Dotted abbreviations such as ``π.χ.`` would otherwise look like boundaries;
a lexicon (one entry per line, ``#`` comments) suppresses them.  Trailing
text without a terminator still forms a final sentence.

Offsets are code-point indices into the normalized text, half-open
``[start, end)``; sentences never overlap and exclude surrounding whitespace.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

TERMINATORS = frozenset({".", "!", ";", "…", "?"})

_DEFAULT_LEXICON_RESOURCE = "abbreviations_el.txt"
_default_abbreviations: frozenset[str] | None = None


@dataclass(frozen=True)
class Sentence:
    """One sentence span; ``text`` equals the source slice ``[start:end]``."""

    start: int
    end: int
    text: str


def parse_abbreviation_lines(lines: list[str]) -> frozenset[str]:
    entries = set()
    for line in lines:
        entry = line.strip()
        if not entry or entry.startswith("#"):
            continue
        entries.add(unicodedata.normalize("NFC", entry))
    return frozenset(entries)


def load_abbreviations(path: str | Path) -> frozenset[str]:
    """Read an abbreviation lexicon file (UTF-8, one entry per line, ``#`` comments)."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_abbreviation_lines(text.splitlines())


def default_abbreviations() -> frozenset[str]:
    """The lexicon shipped with the package, loaded once."""
    global _default_abbreviations
    if _default_abbreviations is None:
        text = resources.files("greekrag").joinpath("data", _DEFAULT_LEXICON_RESOURCE).read_text("utf-8")
        _default_abbreviations = parse_abbreviation_lines(text.splitlines())
    return _default_abbreviations


def _ends_with_abbreviation(text: str, dot_index: int, abbreviations: frozenset[str]) -> bool:
    """True when the token ending at ``dot_index`` (inclusive) is a known abbreviation."""
    end = dot_index + 1
    for abbr in abbreviations:
        n = len(abbr)
        if end < n or text[end - n:end] != abbr:
            continue
        before = end - n - 1
        if before < 0 or not text[before].isalnum():
            return True
    return False


def split_sentences(text: str, abbreviations: frozenset[str] | None = None) -> list[Sentence]:
    """Split normalized text into sentences; empty/whitespace input yields ``[]``."""
    if abbreviations is None:
        abbreviations = default_abbreviations()

    sentences: list[Sentence] = []
    n = len(text)
    start: int | None = None  # start of the sentence being scanned

    for i, ch in enumerate(text):
        if start is None:
            if ch.isspace():
                continue
            start = i
        if ch not in TERMINATORS:
            continue
        if i + 1 < n and not text[i + 1].isspace():
            continue  # terminator glued to more text ("3.5", "κ.λπ" mid-token)
        if ch == "." and _ends_with_abbreviation(text, i, abbreviations):
            continue
        sentences.append(Sentence(start, i + 1, text[start:i + 1]))
        start = None

    if start is not None:
        # trailing text without a terminator; trim trailing whitespace
        end = n
        while end > start and text[end - 1].isspace():
            end -= 1
        if end > start:
            sentences.append(Sentence(start, end, text[start:end]))

    return sentences
