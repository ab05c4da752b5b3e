"""Command-line interface.

Subcommands: segment, embed-test, bm25 (index|topk|mine), calibrate, eval,
muf, sweep-t0, reliability. Exit codes: 0 success, 1 input error,
2 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bm25 as bm25mod
from . import calibration, embedding, evaluation, segmenter
from .corpus import load_passages, load_queries
from .errors import InputError, InvariantError, PhraseFuseError


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse usage problems are input errors
        raise InputError(message)


def _read_labeled_scores(path: str):
    """JSONL of {"scores": [...], "correct": bool} or
    {"confidence": float, "correct": bool} records."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"file not found: {path}")
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append((lineno, json.loads(line)))
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: malformed record: {exc}") from None
    return records


def _embed_input_items(path: str) -> list[tuple[str, str]]:
    """Accept passages.jsonl, phrases.jsonl, or queries.jsonl records."""
    items = []
    path = Path(path)
    if not path.exists():
        raise InputError(f"file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: malformed record: {exc}") from None
            if "passage_id" in rec and "ordinal" in rec:
                items.append(
                    (segmenter.phrase_key(rec["passage_id"], rec["ordinal"]), rec["text"])
                )
            elif "text" in rec:
                items.append((rec["id"], rec["text"]))
            elif "question" in rec:
                items.append((rec["id"], rec["question"]))
            else:
                raise InputError(f"{path}:{lineno}: unrecognized record shape")
    return items


def _load_stores(directory: str, granularities) -> tuple:
    d = Path(directory)
    query_store = embedding.read_store(d / "queries.phem")
    phrase_stores = {}
    for g in granularities:
        phrase_stores[g] = embedding.read_store(d / f"phrases_n{g}.phem")
    return query_store, phrase_stores


def _eval_config(args) -> evaluation.ExperimentConfig:
    granularities = tuple(int(g) for g in args.models.split(","))
    return evaluation.ExperimentConfig(
        granularities=granularities,
        k=args.k,
        bin_count=args.bins,
        t0=args.t0,
        step=args.step,
        max_iters=args.iters,
        seed=args.seed,
        dim=args.dim,
        dev_fraction=args.dev_fraction,
        calib_split=args.calib_split,
        hard_negatives=args.hard_negatives,
        a_k_source=args.a_k_source,
    )


def _prepare_context(args) -> evaluation.ExperimentContext:
    corpus = load_passages(args.passages)
    queries = load_queries(args.queries, corpus)
    config = _eval_config(args)
    query_store = phrase_stores = None
    if args.embeddings:
        query_store, phrase_stores = _load_stores(args.embeddings, config.granularities)
    return evaluation.prepare_experiment(
        corpus, queries, config, query_store=query_store, phrase_stores=phrase_stores
    )


def _add_eval_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--passages", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--embeddings", help="directory of PHEM files (queries.phem, phrases_n<G>.phem)")
    p.add_argument("--models", default="1,3,5,0", help="comma-separated granularities")
    p.add_argument("--k", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=64, help="hash-embedder dimension when no PHEM dir is given")
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--t0", type=float, default=0.1)
    p.add_argument("--step", type=float, default=1e2)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--dev-fraction", type=float, default=0.5)
    p.add_argument("--calib-split", choices=("dev", "eval"), default="dev")
    p.add_argument("--hard-negatives", type=int, default=evaluation.HARD_NEGATIVES_DEFAULT)
    p.add_argument("--a-k-source", choices=("phrase", "passage"), default="phrase")
    p.add_argument("--dataset", default="dataset")
    p.add_argument("--out", help="report CSV path (stdout when omitted)")
    p.add_argument("--dump-fused", help="per-query fused prediction CSV")


def _build_parser() -> _Parser:
    parser = _Parser(prog="phrasefuse")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="split passages into phrases")
    p.add_argument("--passages", required=True)
    p.add_argument("--granularity", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("embed-test", help="deterministic hash embeddings to PHEM")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bm25", help="lexical index operations")
    p.add_argument("action", choices=("index", "topk", "mine"))
    p.add_argument("--passages", required=True)
    p.add_argument("--k1", type=float, default=1.2)
    p.add_argument("--b", type=float, default=0.75)
    p.add_argument("--query", help="query text for topk")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--queries", help="queries.jsonl for mine")
    p.add_argument("--count", type=int, default=evaluation.HARD_NEGATIVES_DEFAULT)

    p = sub.add_parser("calibrate", help="fit a softmax temperature")
    p.add_argument("--preds", required=True)
    p.add_argument("--t0", type=float, default=0.1)
    p.add_argument("--step", type=float, default=1e2)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--bins", type=int, default=10)

    for name in ("eval", "muf"):
        p = sub.add_parser(name, help="run the evaluation protocol")
        _add_eval_options(p)

    p = sub.add_parser("sweep-t0", help="fused accuracy across starting temperatures")
    _add_eval_options(p)
    p.add_argument("--grid", default="0.01,0.1,1,10,100")

    p = sub.add_parser("reliability", help="per-bin confidence/accuracy table")
    p.add_argument("--preds", required=True)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--out", required=True)
    return parser


def _cmd_segment(args) -> None:
    corpus = load_passages(args.passages)
    index = segmenter.build_phrase_index(corpus, args.granularity)
    segmenter.write_phrases(index, args.out)
    total = sum(len(v) for v in index.entries.values())
    print(f"wrote {total} phrases at granularity {args.granularity} to {args.out}")


def _cmd_embed_test(args) -> None:
    items = _embed_input_items(args.input)
    store = embedding.embed_texts(items, args.dim, args.seed)
    embedding.write_store(store, args.out)
    print(f"wrote {len(store)} vectors of dim {args.dim} to {args.out}")


def _cmd_bm25(args) -> None:
    corpus = load_passages(args.passages)
    index = bm25mod.build_index(corpus, k1=args.k1, b=args.b)
    if args.action == "index":
        print(
            f"docs={index.doc_count} terms={len(index.postings)} "
            f"avgdl={index.avgdl:.6f} k1={index.k1} b={index.b}"
        )
        return
    if args.action == "topk":
        if not args.query:
            raise InputError("bm25 topk requires --query")
        for pid, score in bm25mod.top_k(index, args.query, args.k):
            print(f"{pid}\t{score:.6f}")
        return
    if not args.queries:
        raise InputError("bm25 mine requires --queries")
    queries = load_queries(args.queries, corpus)
    for query in queries:
        negatives = bm25mod.mine_hard_negatives(index, query, args.count)
        print(json.dumps({"query_id": query.id, "hard_negatives": negatives}))


def _labeled_samples(records):
    samples = []
    for lineno, rec in records:
        if "scores" not in rec or "correct" not in rec:
            raise InputError(f"line {lineno}: need fields 'scores' and 'correct'")
        samples.append((np.asarray(rec["scores"], dtype=np.float64), bool(rec["correct"])))
    return samples


def _cmd_calibrate(args) -> None:
    samples = _labeled_samples(_read_labeled_scores(args.preds))
    best_t = calibration.calibrate_temperature(
        samples, t0=args.t0, step=args.step, max_iters=args.iters, bin_count=args.bins
    )
    preds = calibration.labeled_predictions(
        [s for s, _ in samples], np.array([ok for _, ok in samples]), best_t
    )
    err = calibration.ece_squared(calibration.bin_predictions(preds, args.bins))
    print(f"temperature={best_t:.6g} ece_squared={err:.6g}")


def _cmd_eval(args) -> None:
    ctx = _prepare_context(args)
    report = evaluation.run_report(ctx, dataset=args.dataset)
    csv_text = report.to_csv()
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    else:
        sys.stdout.write(csv_text)
    delta = next(r for r in report.rows if r.metric == "delta")
    print(f"MUF - best single model: {delta.value:+.6f}", file=sys.stderr)
    echo = " ".join(f"{key}={value}" for key, value in report.config.items())
    print(f"config: {echo}", file=sys.stderr)
    if args.dump_fused:
        evaluation.write_fused_dump(ctx, args.dump_fused)


def _cmd_sweep(args) -> None:
    ctx = _prepare_context(args)
    grid = [float(x) for x in args.grid.split(",") if x]
    rows = evaluation.sweep_t0(ctx, grid)
    lines = ["t0,muf_accuracy,error"]
    for t0, value, err in rows:
        value_s = "" if value is None else f"{value:.6f}"
        lines.append(f"{t0:g},{value_s},{err}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_reliability(args) -> None:
    records = _read_labeled_scores(args.preds)
    preds = []
    for lineno, rec in records:
        if "correct" not in rec:
            raise InputError(f"line {lineno}: missing field 'correct'")
        if "confidence" in rec:
            conf = float(rec["confidence"])
            preds.append(calibration.LabeledPrediction(conf, bool(rec["correct"]), 0.0))
        elif "scores" in rec:
            inp = calibration.ConfidenceInput.from_scores(rec["scores"], args.temperature)
            preds.append(
                calibration.LabeledPrediction(
                    calibration.confidence(inp), bool(rec["correct"]), 0.0
                )
            )
        else:
            raise InputError(f"line {lineno}: need 'confidence' or 'scores'")
    bins = calibration.bin_predictions(preds, args.bins)
    calibration.write_reliability_csv(calibration.reliability_report(bins), args.out)
    print(f"wrote {args.bins} bins over {bins.total} predictions to {args.out}")


_COMMANDS = {
    "segment": _cmd_segment,
    "embed-test": _cmd_embed_test,
    "bm25": _cmd_bm25,
    "calibrate": _cmd_calibrate,
    "eval": _cmd_eval,
    "muf": _cmd_eval,
    "sweep-t0": _cmd_sweep,
    "reliability": _cmd_reliability,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        _COMMANDS[args.command](args)
    except InvariantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PhraseFuseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
