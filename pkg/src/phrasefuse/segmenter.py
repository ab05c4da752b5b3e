"""Sentence splitting and phrase chunking at a sentence-count granularity.

The splitter is a deterministic rule, not a linguistic model: a sentence
ends at `.`, `!` or `?` followed by whitespace (or end of text). Text with
no terminator is a single sentence. This trades abbreviation handling
("Dr. Smith" splits) for bit-identical behaviour across platforms; the
interface allows swapping in a smarter splitter later.

Phrases are non-overlapping groups of `n` consecutive sentences; the final
group may be short. Granularity 0 means whole-passage mode: one phrase per
passage carrying the full text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus, Passage
from .errors import InvariantError

_TERMINATORS = ".!?"


@dataclass(frozen=True)
class SentenceSpan:
    """Half-open [start, end) character offsets into the passage text."""

    start: int
    end: int


@dataclass(frozen=True)
class Phrase:
    passage_id: str
    ordinal: int
    sentence_span: tuple[int, int]  # first and last sentence index, inclusive
    text: str


@dataclass
class PhraseIndex:
    granularity: int  # 0 = whole passage
    entries: dict[str, list[Phrase]]

    def phrases(self, passage_id: str) -> list[Phrase]:
        return self.entries[passage_id]


def split_sentences(text: str) -> list[SentenceSpan]:
    """Split `text` into sentence spans tiling its non-whitespace content."""
    if not text:
        raise InvariantError("cannot split empty text")
    spans: list[SentenceSpan] = []
    n = len(text)
    i = 0
    while i < n and text[i].isspace():
        i += 1
    start = i
    while i < n:
        if text[i] in _TERMINATORS and (i + 1 == n or text[i + 1].isspace()):
            spans.append(SentenceSpan(start, i + 1))
            i += 1
            while i < n and text[i].isspace():
                i += 1
            start = i
        else:
            i += 1
    if start < n:
        end = n
        while end > start and text[end - 1].isspace():
            end -= 1
        if end > start:
            spans.append(SentenceSpan(start, end))
    return spans


def chunk_phrases(passage: Passage, spans: list[SentenceSpan], n: int) -> list[Phrase]:
    """Group `spans` into consecutive phrases of `n` sentences each.

    The final phrase may cover fewer than `n` sentences. Phrase text runs
    from the start of its first sentence to the end of its last, so
    internal whitespace is preserved verbatim.
    """
    if not spans:
        raise InvariantError(f"passage {passage.id!r} has no sentences")
    if n < 1:
        raise InvariantError(f"granularity must be >= 1, got {n}")
    phrases = []
    for ordinal, first in enumerate(range(0, len(spans), n)):
        last = min(first + n, len(spans)) - 1
        text = passage.text[spans[first].start : spans[last].end]
        phrases.append(Phrase(passage.id, ordinal, (first, last), text))
    return phrases


def build_phrase_index(corpus: Corpus, n: int) -> PhraseIndex:
    """Build the phrase index for every passage at granularity `n`.

    `n` = 0 produces the whole-passage index: exactly one phrase per
    passage whose text is the full passage text (sentence_span is (0, 0)
    and carries no meaning in this mode).
    """
    if len(corpus) == 0:
        raise InvariantError("cannot index an empty corpus")
    if n < 0:
        raise InvariantError(f"granularity must be >= 0, got {n}")
    entries: dict[str, list[Phrase]] = {}
    for passage in corpus.passages:
        if n == 0:
            entries[passage.id] = [Phrase(passage.id, 0, (0, 0), passage.text)]
            continue
        try:
            spans = split_sentences(passage.text)
            entries[passage.id] = chunk_phrases(passage, spans, n)
        except InvariantError as exc:
            raise InvariantError(f"passage {passage.id!r}: {exc}") from None
    return PhraseIndex(n, entries)


def phrase_key(passage_id: str, ordinal: int) -> str:
    """Embedding-store id for a phrase: `<passage_id>#<ordinal>`.

    Parsed with rsplit('#', 1); the ordinal never contains '#', so passage
    ids containing '#' stay unambiguous.
    """
    return f"{passage_id}#{ordinal}"


def parse_phrase_key(key: str) -> tuple[str, int]:
    pid, _, ordinal = key.rpartition("#")
    if not pid or not ordinal.isdigit():
        raise InvariantError(f"malformed phrase key {key!r}")
    return pid, int(ordinal)


def write_phrases(index: PhraseIndex, path: str | Path) -> None:
    """Dump the index as phrases.jsonl: passage_id, ordinal, text per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pid in index.entries:
            for phrase in index.entries[pid]:
                record = {
                    "passage_id": phrase.passage_id,
                    "ordinal": phrase.ordinal,
                    "text": phrase.text,
                }
                fh.write(json.dumps(record, ensure_ascii=False))
                fh.write("\n")
