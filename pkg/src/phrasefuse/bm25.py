"""Okapi BM25 inverted index: lexical baseline and hard-negative miner.

Scoring, for query terms t (one contribution per occurrence):

    score(q, d) = sum_t IDF(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len/avgdl))
    IDF(t) = ln(1 + (N - df + 0.5) / (df + 0.5))

The +1 inside the log keeps IDF non-negative. Defaults k1=1.2, b=0.75.
Tokenization is shared with the test embedder (lowercase, non-alphanumeric
split) so lexical baselines and hash embeddings see the same token stream.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .corpus import Corpus, QueryRecord
from .errors import InputError, InvariantError
from .tokenize import tokenize


@dataclass
class Bm25Index:
    ids: list[str]
    postings: dict[str, list[tuple[int, int]]]  # term -> [(ordinal, tf)], ordinal ascending
    doc_lengths: list[int]
    avgdl: float
    doc_count: int
    k1: float = 1.2
    b: float = 0.75
    _tf: list[Counter] = field(default_factory=list, repr=False)


def build_index(corpus: Corpus, k1: float = 1.2, b: float = 0.75) -> Bm25Index:
    if len(corpus) == 0:
        raise InputError("cannot index an empty corpus")
    if k1 < 0:
        raise InvariantError(f"k1 must be >= 0, got {k1}")
    if not 0 <= b <= 1:
        raise InvariantError(f"b must be in [0, 1], got {b}")
    postings: dict[str, list[tuple[int, int]]] = {}
    doc_lengths: list[int] = []
    tf_by_doc: list[Counter] = []
    for ordinal, passage in enumerate(corpus.passages):
        counts = Counter(tokenize(passage.text))
        doc_lengths.append(sum(counts.values()))
        tf_by_doc.append(counts)
        for term, tf in counts.items():
            postings.setdefault(term, []).append((ordinal, tf))
    avgdl = sum(doc_lengths) / len(doc_lengths)
    return Bm25Index(
        ids=corpus.ids(),
        postings=postings,
        doc_lengths=doc_lengths,
        avgdl=avgdl,
        doc_count=len(corpus),
        k1=k1,
        b=b,
        _tf=tf_by_doc,
    )


def _idf(index: Bm25Index, term: str) -> float:
    df = len(index.postings.get(term, ()))
    if df == 0:
        return 0.0
    return math.log(1.0 + (index.doc_count - df + 0.5) / (df + 0.5))


def bm25_score(index: Bm25Index, query: str, passage_ordinal: int) -> float:
    """Score one passage against `query`; unknown terms contribute 0."""
    if not 0 <= passage_ordinal < index.doc_count:
        raise InputError(f"passage ordinal {passage_ordinal} out of range")
    counts = index._tf[passage_ordinal]
    length_factor = index.k1 * (
        1.0 - index.b + index.b * index.doc_lengths[passage_ordinal] / index.avgdl
    )
    score = 0.0
    for term in tokenize(query):
        tf = counts.get(term, 0)
        if tf == 0:
            continue
        score += _idf(index, term) * tf * (index.k1 + 1.0) / (tf + length_factor)
    return score


def top_k(index: Bm25Index, query: str, k: int) -> list[tuple[str, float]]:
    """The k highest-scoring passages, descending; ties by ascending ordinal."""
    if k < 1:
        raise InvariantError(f"k must be >= 1, got {k}")
    scores = [0.0] * index.doc_count
    query_counts = Counter(tokenize(query))
    for term, qtf in query_counts.items():
        idf = _idf(index, term)
        if idf == 0.0:
            continue
        for ordinal, tf in index.postings[term]:
            length_factor = index.k1 * (
                1.0 - index.b + index.b * index.doc_lengths[ordinal] / index.avgdl
            )
            scores[ordinal] += qtf * idf * tf * (index.k1 + 1.0) / (tf + length_factor)
    order = sorted(range(index.doc_count), key=lambda i: (-scores[i], i))
    return [(index.ids[i], scores[i]) for i in order[:k]]


def mine_hard_negatives(index: Bm25Index, query: QueryRecord, count: int) -> list[str]:
    """Top `count` BM25 passages for the query, excluding its positive."""
    if count < 1:
        raise InvariantError(f"count must be >= 1, got {count}")
    if index.doc_count <= count:
        raise InputError(
            f"corpus of {index.doc_count} passages too small to mine "
            f"{count} negatives"
        )
    ranked = top_k(index, query.question, count + 1)
    negatives = [pid for pid, _ in ranked if pid != query.positive_passage_id]
    return negatives[:count]
