"""Passage corpus and query set: load, validate, address by id.

File formats (UTF-8, LF, one JSON object per line):
  passages.jsonl: {"id": str, "text": str}
  queries.jsonl:  {"id": str, "question": str, "positive_passage_id": str}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InputError, InvariantError
from .tokenize import tokenize


@dataclass(frozen=True)
class Passage:
    id: str
    text: str


@dataclass(frozen=True)
class QueryRecord:
    id: str
    question: str
    positive_passage_id: str


@dataclass
class Corpus:
    """Ordered passage collection with an id -> position index."""

    passages: list[Passage]
    index: dict[str, int] = field(init=False)

    def __post_init__(self) -> None:
        self.index = {p.id: i for i, p in enumerate(self.passages)}
        if len(self.index) != len(self.passages):
            raise InvariantError("corpus contains duplicate passage ids")

    def __len__(self) -> int:
        return len(self.passages)

    def __contains__(self, passage_id: str) -> bool:
        return passage_id in self.index

    def get(self, passage_id: str) -> Passage:
        try:
            return self.passages[self.index[passage_id]]
        except KeyError:
            raise InputError(f"unknown passage id {passage_id!r}") from None

    def ordinal(self, passage_id: str) -> int:
        try:
            return self.index[passage_id]
        except KeyError:
            raise InputError(f"unknown passage id {passage_id!r}") from None

    def ids(self) -> list[str]:
        return [p.id for p in self.passages]


def _read_json_lines(path: str | Path):
    path = Path(path)
    if not path.exists():
        raise InputError(f"file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: malformed record: {exc}") from None
            if not isinstance(record, dict):
                raise InputError(f"{path}:{lineno}: record is not an object")
            yield lineno, record


def load_passages(path: str | Path) -> Corpus:
    """Load a passage corpus, preserving insertion order.

    Rejects duplicate ids (reporting the line of the second occurrence),
    empty ids, and texts with no alphanumeric token.
    """
    passages: list[Passage] = []
    seen: dict[str, int] = {}
    for lineno, record in _read_json_lines(path):
        try:
            pid, text = record["id"], record["text"]
        except KeyError as exc:
            raise InputError(f"{path}:{lineno}: missing field {exc}") from None
        if not isinstance(pid, str) or not pid:
            raise InputError(f"{path}:{lineno}: id must be a non-empty string")
        if not isinstance(text, str) or not text:
            raise InputError(f"{path}:{lineno}: empty text for passage {pid!r}")
        if not tokenize(text):
            raise InputError(f"{path}:{lineno}: passage {pid!r} has no tokens")
        if pid in seen:
            raise InputError(
                f"{path}:{lineno}: duplicate passage id {pid!r} "
                f"(first seen on line {seen[pid]})"
            )
        seen[pid] = lineno
        passages.append(Passage(pid, text))
    return Corpus(passages)


def write_passages(corpus: Corpus, path: str | Path) -> None:
    """Write `corpus` back to the line-record format (round-trip safe)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in corpus.passages:
            fh.write(json.dumps({"id": p.id, "text": p.text}, ensure_ascii=False))
            fh.write("\n")


def load_queries(path: str | Path, corpus: Corpus) -> list[QueryRecord]:
    """Load queries, checking every positive passage id resolves in `corpus`."""
    queries: list[QueryRecord] = []
    for lineno, record in _read_json_lines(path):
        try:
            qid = record["id"]
            question = record["question"]
            positive = record["positive_passage_id"]
        except KeyError as exc:
            raise InputError(f"{path}:{lineno}: missing field {exc}") from None
        if not isinstance(qid, str) or not qid:
            raise InputError(f"{path}:{lineno}: id must be a non-empty string")
        if not isinstance(question, str) or not question:
            raise InputError(f"{path}:{lineno}: empty question for query {qid!r}")
        if positive not in corpus:
            raise InputError(
                f"{path}:{lineno}: query {qid!r} references absent passage "
                f"{positive!r}"
            )
        queries.append(QueryRecord(qid, question, positive))
    return queries
