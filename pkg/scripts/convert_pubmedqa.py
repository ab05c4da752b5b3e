#!/usr/bin/env python3
"""Convert the PubmedQA distribution JSON (a dict keyed by pubid with
QUESTION and CONTEXTS fields) into passages.jsonl and queries.jsonl.

The CONTEXTS list of one article is joined into a single passage; the
article's QUESTION becomes one query with that passage as its positive.
"""

import argparse
import json


def convert(pubmedqa_path, passages_path, queries_path):
    with open(pubmedqa_path, encoding="utf-8") as fh:
        entries = json.load(fh)
    count = 0
    with open(passages_path, "w", encoding="utf-8") as pfh, open(
        queries_path, "w", encoding="utf-8"
    ) as qfh:
        for pubid, entry in entries.items():
            text = " ".join(entry["CONTEXTS"]).strip()
            if not text or not entry.get("QUESTION", "").strip():
                continue
            pid = f"pubmed-{pubid}"
            pfh.write(json.dumps({"id": pid, "text": text}, ensure_ascii=False) + "\n")
            qfh.write(
                json.dumps(
                    {
                        "id": f"pubmedq-{pubid}",
                        "question": entry["QUESTION"],
                        "positive_passage_id": pid,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
            count += 1
    return count


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="input", required=True)
    parser.add_argument("--passages", required=True)
    parser.add_argument("--queries", required=True)
    args = parser.parse_args()
    count = convert(args.input, args.passages, args.queries)
    print(f"wrote {count} question-context pairs")


if __name__ == "__main__":
    main()
