#!/usr/bin/env python3
"""Convert simplified Natural Questions JSONL (one object per line with
question_text and document_text, as in the simplified train/dev dumps)
into passages.jsonl and queries.jsonl.

Each line's document becomes the positive passage for its question.
Duplicate documents are emitted once, keyed by content hash. Use
--sample-every N to keep every Nth pair (the full train set is large;
N=40 keeps roughly 1/40 of it).
"""

import argparse
import hashlib
import json


def convert(nq_path, passages_path, queries_path, sample_every=1):
    seen: dict[str, str] = {}
    n_queries = 0
    with open(nq_path, encoding="utf-8") as fh, open(
        passages_path, "w", encoding="utf-8"
    ) as pfh, open(queries_path, "w", encoding="utf-8") as qfh:
        for lineno, line in enumerate(fh):
            if lineno % sample_every:
                continue
            if not line.strip():
                continue
            entry = json.loads(line)
            document = entry["document_text"].strip()
            question = entry["question_text"].strip()
            if not document or not question:
                continue
            digest = hashlib.sha1(document.encode("utf-8")).hexdigest()[:16]
            pid = f"nq-{digest}"
            if digest not in seen:
                seen[digest] = pid
                pfh.write(json.dumps({"id": pid, "text": document},
                                     ensure_ascii=False) + "\n")
            qfh.write(
                json.dumps(
                    {
                        "id": f"nqq-{lineno}",
                        "question": question,
                        "positive_passage_id": pid,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
            n_queries += 1
    return len(seen), n_queries


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="input", required=True)
    parser.add_argument("--passages", required=True)
    parser.add_argument("--queries", required=True)
    parser.add_argument("--sample-every", type=int, default=1)
    args = parser.parse_args()
    n_passages, n_queries = convert(
        args.input, args.passages, args.queries, args.sample_every
    )
    print(f"wrote {n_passages} passages, {n_queries} queries")


if __name__ == "__main__":
    main()
