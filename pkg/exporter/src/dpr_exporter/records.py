"""Line-record inputs: passages, phrases, or queries.

Record shapes (one JSON object per line, UTF-8):
  passage: {"id": str, "text": str}
  phrase:  {"passage_id": str, "ordinal": int, "text": str}
           -> embedding id "<passage_id>#<ordinal>"
  query:   {"id": str, "question": str}
"""

import json
from pathlib import Path


class RecordError(ValueError):
    pass


def read_records(path) -> tuple[str, list[tuple[str, str]]]:
    """Return (kind, [(id, text), ...]); kind is passage|phrase|query."""
    path = Path(path)
    if not path.exists():
        raise RecordError(f"input file not found: {path}")
    kind = None
    items: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordError(f"{path}:{lineno}: malformed record: {exc}") from None
            if "passage_id" in record and "ordinal" in record:
                record_kind = "phrase"
                rec_id = f"{record['passage_id']}#{record['ordinal']}"
                text = record.get("text", "")
            elif "question" in record:
                record_kind = "query"
                rec_id, text = record.get("id", ""), record["question"]
            elif "text" in record:
                record_kind = "passage"
                rec_id, text = record.get("id", ""), record["text"]
            else:
                raise RecordError(f"{path}:{lineno}: unrecognized record shape")
            if kind is None:
                kind = record_kind
            elif kind != record_kind:
                raise RecordError(
                    f"{path}:{lineno}: mixed record kinds ({kind} then {record_kind})"
                )
            if not rec_id:
                raise RecordError(f"{path}:{lineno}: empty id")
            if not isinstance(text, str) or not text.strip():
                raise RecordError(f"{path}:{lineno}: empty text for id {rec_id!r}")
            if rec_id in seen:
                raise RecordError(f"{path}:{lineno}: duplicate id {rec_id!r}")
            seen.add(rec_id)
            items.append((rec_id, text))
    if kind is None:
        raise RecordError(f"{path}: no records")
    return kind, items
