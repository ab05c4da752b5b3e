#!/usr/bin/env python3
"""Convert the NFCorpus distribution (tab-separated *.docs, *.queries and
*.qrel files) into passages.jsonl and queries.jsonl.

Each query keeps a single positive: its highest-relevance judged document
(ties broken by qrel file order). Queries whose judged documents are all
missing from the docs file are dropped.
"""

import argparse
import json
from collections import defaultdict


def read_tsv_pairs(path):
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            key, _, value = line.partition("\t")
            pairs.append((key.strip(), value.strip()))
    return pairs


def convert(docs_path, queries_path_in, qrels_path, passages_path, queries_path):
    docs = dict(read_tsv_pairs(docs_path))
    queries = dict(read_tsv_pairs(queries_path_in))
    judged = defaultdict(list)  # qid -> [(relevance, docid)] in file order
    with open(qrels_path, encoding="utf-8") as fh:
        for line in fh:
            fields = line.split()
            if len(fields) != 4:
                continue
            qid, _, docid, relevance = fields
            judged[qid].append((int(relevance), docid))

    n_queries = 0
    used_docs = []
    with open(queries_path, "w", encoding="utf-8") as qfh:
        for qid, question in queries.items():
            candidates = [
                (rel, docid) for rel, docid in judged.get(qid, []) if docid in docs
            ]
            if not candidates or not question:
                continue
            best_rel = max(rel for rel, _ in candidates)
            positive = next(d for rel, d in candidates if rel == best_rel)
            qfh.write(
                json.dumps(
                    {"id": qid, "question": question, "positive_passage_id": positive},
                    ensure_ascii=False,
                )
                + "\n"
            )
            n_queries += 1
    with open(passages_path, "w", encoding="utf-8") as pfh:
        for docid, text in docs.items():
            if not text:
                continue
            pfh.write(json.dumps({"id": docid, "text": text}, ensure_ascii=False) + "\n")
            used_docs.append(docid)
    return len(used_docs), n_queries


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--docs", required=True, help="docid<TAB>text file")
    parser.add_argument("--queries-in", required=True, help="qid<TAB>text file")
    parser.add_argument("--qrels", required=True, help="qid 0 docid rel file")
    parser.add_argument("--passages", required=True)
    parser.add_argument("--queries", required=True)
    args = parser.parse_args()
    n_passages, n_queries = convert(
        args.docs, args.queries_in, args.qrels, args.passages, args.queries
    )
    print(f"wrote {n_passages} passages, {n_queries} queries")


if __name__ == "__main__":
    main()
