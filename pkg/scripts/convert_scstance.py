#!/usr/bin/env python3
"""Convert a SC-stance style CSV (claim/context columns over Supreme Court
opinions) into passages.jsonl and queries.jsonl.

Column names vary between releases, so they are flags: --question-col
(default "claim") and --context-col (default "context"). Rows sharing a
context map to the same passage.
"""

import argparse
import csv
import hashlib
import json
import sys


def convert(csv_path, passages_path, queries_path, question_col, context_col):
    csv.field_size_limit(sys.maxsize)  # court opinions exceed the default
    seen: dict[str, str] = {}
    n_queries = 0
    with open(csv_path, encoding="utf-8", newline="") as fh, open(
        passages_path, "w", encoding="utf-8"
    ) as pfh, open(queries_path, "w", encoding="utf-8") as qfh:
        reader = csv.DictReader(fh)
        for row_idx, row in enumerate(reader):
            question = (row.get(question_col) or "").strip()
            context = (row.get(context_col) or "").strip()
            if not question or not context:
                continue
            digest = hashlib.sha1(context.encode("utf-8")).hexdigest()[:16]
            pid = f"scotus-{digest}"
            if digest not in seen:
                seen[digest] = pid
                pfh.write(json.dumps({"id": pid, "text": context},
                                     ensure_ascii=False) + "\n")
            qfh.write(
                json.dumps(
                    {
                        "id": f"scotusq-{row_idx}",
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
    parser.add_argument("--question-col", default="claim")
    parser.add_argument("--context-col", default="context")
    args = parser.parse_args()
    n_passages, n_queries = convert(
        args.input, args.passages, args.queries, args.question_col, args.context_col
    )
    print(f"wrote {n_passages} passages, {n_queries} queries")


if __name__ == "__main__":
    main()
