"""Experimental protocol: candidate batches, model evaluation, reports.

Per query the candidate pool holds the positive passage, BM25-mined hard
negatives (9 by default; a flag restores 10 for sensitivity analysis, at
pool size 31), and 20 seeded-uniform random passages, 30 in total.
Evaluation order of a pool is id-sorted, so ties cannot leak the label.

Accuracy is the fraction of queries whose single top prediction is the
gold passage, times 100. With one gold passage and one prediction this
equals F1, so reports label the metric `f1_acc1`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .bm25 import Bm25Index, bm25_score, mine_hard_negatives
from .calibration import calibrate_temperature
from .corpus import Corpus, QueryRecord
from .embedding import EmbeddingStore, embed_texts
from .errors import InputError, InvariantError
from .fusion import ModelSet, muf_predict, rank_models
from .retrieval import RetrievalModel, predict
from .segmenter import build_phrase_index, phrase_key

HARD_NEGATIVES_DEFAULT = 9
RANDOM_NEGATIVES_DEFAULT = 20


@dataclass
class CandidateBatch:
    query_id: str
    positive: str
    hard_negatives: list[str]
    random_negatives: list[str]
    rng_seed: int

    def __post_init__(self) -> None:
        pool = [self.positive] + self.hard_negatives + self.random_negatives
        if len(set(pool)) != len(pool):
            raise InvariantError(f"batch for query {self.query_id!r} has duplicates")

    def candidate_ids(self) -> list[str]:
        """Evaluation order: id-sorted, deterministic and label-blind."""
        return sorted([self.positive] + self.hard_negatives + self.random_negatives)

    def size(self) -> int:
        return 1 + len(self.hard_negatives) + len(self.random_negatives)


@dataclass
class ReportRow:
    model: str
    metric: str
    value: float


@dataclass
class EvalReport:
    dataset: str
    rows: list[ReportRow]
    n_queries: int
    config: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        seed = self.config.get("seed", "")
        lines = ["dataset,model,metric,value,n_queries,seed"]
        for row in self.rows:
            lines.append(
                f"{self.dataset},{row.model},{row.metric},{row.value:.6f},"
                f"{self.n_queries},{seed}"
            )
        return "\n".join(lines) + "\n"


def derive_seed(base_seed: int, query_id: str) -> int:
    """Per-query batch seed, independent of query order."""
    h = 0xCBF29CE484222325
    for byte in query_id.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return (base_seed ^ h) & 0xFFFFFFFFFFFFFFFF


def build_batch(
    corpus: Corpus,
    query: QueryRecord,
    index: Bm25Index,
    seed: int,
    hard_negative_count: int = HARD_NEGATIVES_DEFAULT,
    random_negative_count: int = RANDOM_NEGATIVES_DEFAULT,
) -> CandidateBatch:
    """Assemble one candidate pool; deterministic for a given seed."""
    needed = 1 + hard_negative_count + random_negative_count
    if len(corpus) < needed:
        raise InputError(
            f"corpus of {len(corpus)} passages is smaller than the "
            f"{needed}-candidate pool"
        )
    hard = mine_hard_negatives(index, query, hard_negative_count)
    excluded = set(hard)
    excluded.add(query.positive_passage_id)
    rng = random.Random(seed)
    picks: list[str] = []
    while len(picks) < random_negative_count:
        pid = corpus.passages[rng.randrange(len(corpus))].id
        if pid not in excluded:
            excluded.add(pid)
            picks.append(pid)
    return CandidateBatch(query.id, query.positive_passage_id, hard, picks, seed)


def build_batches(
    corpus: Corpus,
    queries: list[QueryRecord],
    index: Bm25Index,
    base_seed: int,
    hard_negative_count: int = HARD_NEGATIVES_DEFAULT,
    random_negative_count: int = RANDOM_NEGATIVES_DEFAULT,
) -> dict[str, CandidateBatch]:
    return {
        q.id: build_batch(
            corpus,
            q,
            index,
            derive_seed(base_seed, q.id),
            hard_negative_count,
            random_negative_count,
        )
        for q in queries
    }


def _bm25_predict(index: Bm25Index, corpus: Corpus, question: str, candidates: list[str]) -> str:
    best, best_score = candidates[0], -np.inf
    for pid in candidates:
        score = bm25_score(index, question, corpus.ordinal(pid))
        if score > best_score:
            best, best_score = pid, score
    return best


def evaluate_model(
    target,
    queries: list[QueryRecord],
    batches: dict[str, CandidateBatch],
    query_store: EmbeddingStore | None = None,
    k: int = 30,
    a_k_source: str = "phrase",
    corpus: Corpus | None = None,
    strict: bool = True,
) -> ReportRow:
    """Top-1 accuracy of a retrieval model, a fused model set, or BM25.

    Dense targets require `query_store`; the BM25 target requires `corpus`
    (scored under the batch protocol, restricted to each query's pool).
    """
    if not queries:
        raise InputError("cannot evaluate zero queries")
    hits = 0
    if isinstance(target, Bm25Index):
        if corpus is None:
            raise InputError("BM25 evaluation requires the corpus")
        for query in queries:
            batch = batches[query.id]
            pred = _bm25_predict(target, corpus, query.question, batch.candidate_ids())
            hits += pred == batch.positive
        return ReportRow("BM25", "f1_acc1_batch", 100.0 * hits / len(queries))
    if query_store is None:
        raise InputError("dense evaluation requires query embeddings")
    if isinstance(target, ModelSet):
        for query in queries:
            batch = batches[query.id]
            fused = muf_predict(
                target,
                query_store.row(query.id),
                batch.candidate_ids(),
                k=k,
                a_k_source=a_k_source,
                query_id=query.id,
                strict=strict,
            )
            hits += fused.passage_id == batch.positive
        return ReportRow("MUF", "f1_acc1", 100.0 * hits / len(queries))
    if isinstance(target, RetrievalModel):
        for query in queries:
            batch = batches[query.id]
            pred = predict(
                target, query_store.row(query.id), batch.candidate_ids(), k=k,
                a_k_source=a_k_source,
            )
            hits += pred.passage_id == batch.positive
        return ReportRow(target.label(), "f1_acc1", 100.0 * hits / len(queries))
    raise InputError(f"cannot evaluate target of type {type(target).__name__}")


def evaluate_bm25_whole_corpus(
    index: Bm25Index, corpus: Corpus, queries: list[QueryRecord]
) -> ReportRow:
    """BM25 accuracy ranking the entire corpus instead of the 30-pool."""
    from .bm25 import top_k as bm25_top_k

    hits = 0
    for query in queries:
        ranked = bm25_top_k(index, query.question, 1)
        hits += ranked[0][0] == query.positive_passage_id
    return ReportRow("BM25", "f1_acc1_corpus", 100.0 * hits / len(queries))


@dataclass
class ExperimentConfig:
    granularities: tuple[int, ...] = (1, 3, 5, 0)
    k: int = 30
    bin_count: int = 10
    t0: float = 0.1
    step: float = 1e2
    max_iters: int = 100
    seed: int = 0
    dim: int = 64
    dev_fraction: float = 0.5
    calib_split: str = "dev"  # or "eval"
    hard_negatives: int = HARD_NEGATIVES_DEFAULT
    random_negatives: int = RANDOM_NEGATIVES_DEFAULT
    a_k_source: str = "phrase"

    def echo(self) -> dict:
        return {
            "granularities": ",".join(str(g) for g in self.granularities),
            "k": self.k,
            "bins": self.bin_count,
            "t0": self.t0,
            "step": self.step,
            "iters": self.max_iters,
            "seed": self.seed,
            "dim": self.dim,
            "dev_fraction": self.dev_fraction,
            "calib_split": self.calib_split,
            "hard_negatives": self.hard_negatives,
            "random_negatives": self.random_negatives,
            "a_k_source": self.a_k_source,
        }


@dataclass
class ExperimentContext:
    """Everything assembled once and reused across evaluations and sweeps."""

    corpus: Corpus
    dev_queries: list[QueryRecord]
    eval_queries: list[QueryRecord]
    batches: dict[str, CandidateBatch]
    bm25_index: Bm25Index
    query_store: EmbeddingStore
    models: ModelSet
    config: ExperimentConfig

    def calibration_queries(self) -> list[QueryRecord]:
        return self.dev_queries if self.config.calib_split == "dev" else self.eval_queries


def split_queries(
    queries: list[QueryRecord], dev_fraction: float, seed: int
) -> tuple[list[QueryRecord], list[QueryRecord]]:
    """Seeded shuffle then split into (dev, eval)."""
    if not 0 <= dev_fraction < 1:
        raise InputError(f"dev fraction must be in [0, 1), got {dev_fraction}")
    order = list(range(len(queries)))
    random.Random(seed ^ 0xD1B54A32D192ED03).shuffle(order)
    n_dev = int(len(queries) * dev_fraction)
    dev = [queries[i] for i in order[:n_dev]]
    rest = [queries[i] for i in order[n_dev:]]
    return dev, rest


def prepare_experiment(
    corpus: Corpus,
    queries: list[QueryRecord],
    config: ExperimentConfig,
    query_store: EmbeddingStore | None = None,
    phrase_stores: dict[int, EmbeddingStore] | None = None,
    bm25_index: Bm25Index | None = None,
) -> ExperimentContext:
    """Build indexes, embeddings (hash embedder unless stores are given),
    candidate batches, and the model set; calibrate and rank on the dev
    split (the eval split when none is held out)."""
    from .bm25 import build_index

    if not queries:
        raise InputError("no queries to evaluate")
    if bm25_index is None:
        bm25_index = build_index(corpus)
    dev, eval_queries = split_queries(queries, config.dev_fraction, config.seed)
    if not eval_queries:
        raise InputError("dev split left no evaluation queries")
    batches = build_batches(
        corpus, queries, bm25_index, config.seed,
        config.hard_negatives, config.random_negatives,
    )
    if query_store is None:
        query_store = embed_texts(
            [(q.id, q.question) for q in queries], config.dim, config.seed
        )
    members = []
    for granularity in config.granularities:
        phrase_index = build_phrase_index(corpus, granularity)
        if phrase_stores is not None and granularity in phrase_stores:
            store = phrase_stores[granularity]
        else:
            items = [
                (phrase_key(pid, p.ordinal), p.text)
                for pid in phrase_index.entries
                for p in phrase_index.entries[pid]
            ]
            store = embed_texts(items, config.dim, config.seed)
        members.append(RetrievalModel.build(phrase_index, store))
    models = ModelSet.of(members)

    ranking_split = dev if dev else eval_queries
    models = rank_models(
        models, ranking_split, batches, query_store, k=config.k,
        a_k_source=config.a_k_source,
    )
    calib = dev if (config.calib_split == "dev" and dev) else eval_queries
    for model in models.members:
        samples = []
        for query in calib:
            batch = batches[query.id]
            pred = predict(
                model, query_store.row(query.id), batch.candidate_ids(),
                k=config.k, a_k_source=config.a_k_source,
            )
            samples.append((pred.a_k, pred.passage_id == batch.positive))
        model.temperature = calibrate_temperature(
            samples, t0=config.t0, step=config.step,
            max_iters=config.max_iters, bin_count=config.bin_count,
        )
    return ExperimentContext(
        corpus=corpus,
        dev_queries=dev,
        eval_queries=eval_queries,
        batches=batches,
        bm25_index=bm25_index,
        query_store=query_store,
        models=models,
        config=config,
    )


def run_report(ctx: ExperimentContext, dataset: str = "dataset") -> EvalReport:
    """Per-model, fused, and BM25 rows plus the fused-minus-best delta."""
    cfg = ctx.config
    rows = []
    single_values = []
    for model in ctx.models.members:
        row = evaluate_model(
            model, ctx.eval_queries, ctx.batches, ctx.query_store,
            k=cfg.k, a_k_source=cfg.a_k_source,
        )
        rows.append(row)
        single_values.append(row.value)
    muf_row = evaluate_model(
        ctx.models, ctx.eval_queries, ctx.batches, ctx.query_store,
        k=cfg.k, a_k_source=cfg.a_k_source,
    )
    rows.append(muf_row)
    rows.append(
        ReportRow("MUF-best_single", "delta", muf_row.value - max(single_values))
    )
    rows.append(
        evaluate_model(
            ctx.bm25_index, ctx.eval_queries, ctx.batches, corpus=ctx.corpus
        )
    )
    rows.append(
        evaluate_bm25_whole_corpus(ctx.bm25_index, ctx.corpus, ctx.eval_queries)
    )
    config = cfg.echo()
    config["temperatures"] = ";".join(
        f"{m.label()}={m.effective_temperature:.6g}" for m in ctx.models.members
    )
    config["active_models"] = ",".join(m.label() for m in ctx.models.active)
    return EvalReport(dataset, rows, len(ctx.eval_queries), config)


def sweep_t0(
    ctx: ExperimentContext, grid: list[float]
) -> list[tuple[float, float | None, str]]:
    """Recalibrate active models from each starting temperature and rerun
    the fused evaluation; errors are recorded per grid point, not raised."""
    if not grid:
        raise InputError("empty sweep grid")
    cfg = ctx.config
    calib = ctx.calibration_queries()
    samples_per_model = {}
    for model in ctx.models.active:
        samples = []
        for query in calib:
            batch = ctx.batches[query.id]
            pred = predict(
                model, ctx.query_store.row(query.id), batch.candidate_ids(),
                k=cfg.k, a_k_source=cfg.a_k_source,
            )
            samples.append((pred.a_k, pred.passage_id == batch.positive))
        samples_per_model[model.granularity] = samples
    results: list[tuple[float, float | None, str]] = []
    saved = {m.granularity: m.temperature for m in ctx.models.active}
    try:
        for t0 in grid:
            try:
                for model in ctx.models.active:
                    model.temperature = calibrate_temperature(
                        samples_per_model[model.granularity],
                        t0=t0, step=cfg.step, max_iters=cfg.max_iters,
                        bin_count=cfg.bin_count,
                    )
                row = evaluate_model(
                    ctx.models, ctx.eval_queries, ctx.batches, ctx.query_store,
                    k=cfg.k, a_k_source=cfg.a_k_source,
                )
                results.append((t0, row.value, ""))
            except (InputError, InvariantError, FloatingPointError) as exc:
                results.append((t0, None, str(exc)))
    finally:
        for model in ctx.models.active:
            model.temperature = saved[model.granularity]
    return results


def write_fused_dump(ctx: ExperimentContext, path) -> None:
    """One CSV row per eval query: chosen model, prediction, confidence."""
    cfg = ctx.config
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("query_id,chosen_granularity,passage_id,confidence,correct\n")
        for query in ctx.eval_queries:
            batch = ctx.batches[query.id]
            fused = muf_predict(
                ctx.models, ctx.query_store.row(query.id), batch.candidate_ids(),
                k=cfg.k, a_k_source=cfg.a_k_source, query_id=query.id,
            )
            correct = int(fused.passage_id == batch.positive)
            fh.write(
                f"{fused.query_id},{fused.chosen_granularity},{fused.passage_id},"
                f"{fused.confidence:.6f},{correct}\n"
            )
