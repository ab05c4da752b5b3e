#!/usr/bin/env python3
"""Convert a SQuAD-format JSON file (v1.1/v2.0 layout: data -> paragraphs
-> qas) into passages.jsonl and queries.jsonl.

Each paragraph context becomes one passage; each answerable question
becomes one query whose positive is its paragraph. Unanswerable v2.0
questions (is_impossible) are skipped.
"""

import argparse
import json


def convert(squad_path, passages_path, queries_path):
    with open(squad_path, encoding="utf-8") as fh:
        squad = json.load(fh)
    n_passages = n_queries = 0
    with open(passages_path, "w", encoding="utf-8") as pfh, open(
        queries_path, "w", encoding="utf-8"
    ) as qfh:
        for article in squad["data"]:
            for paragraph in article["paragraphs"]:
                pid = f"squad-p{n_passages}"
                pfh.write(
                    json.dumps({"id": pid, "text": paragraph["context"]},
                               ensure_ascii=False) + "\n"
                )
                n_passages += 1
                for qa in paragraph["qas"]:
                    if qa.get("is_impossible"):
                        continue
                    qfh.write(
                        json.dumps(
                            {
                                "id": str(qa["id"]),
                                "question": qa["question"],
                                "positive_passage_id": pid,
                            },
                            ensure_ascii=False,
                        )
                        + "\n"
                    )
                    n_queries += 1
    return n_passages, n_queries


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="input", required=True, help="SQuAD JSON file")
    parser.add_argument("--passages", required=True)
    parser.add_argument("--queries", required=True)
    args = parser.parse_args()
    n_passages, n_queries = convert(args.input, args.passages, args.queries)
    print(f"wrote {n_passages} passages, {n_queries} queries")


if __name__ == "__main__":
    main()
