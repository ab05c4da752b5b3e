import math

import numpy as np
import pytest

from phrasefuse.errors import InputError, InvariantError
from phrasefuse.evaluation import CandidateBatch
from phrasefuse.fusion import ModelSet, muf_predict, rank_models
from phrasefuse.retrieval import predict

from test_retrieval import model_from_vectors


def two_candidate_model(granularity, prefers, temperature):
    """Model over candidates pA/pB scoring 1.0 for `prefers`, 0.0 otherwise."""
    other = "pB" if prefers == "pA" else "pA"
    vectors = {prefers: [[1.0, 0.0]], other: [[0.0, 1.0]]}
    return model_from_vectors(vectors, granularity=granularity, temperature=temperature)


QUERY = np.array([1.0, 0.0])  # scores: preferred 1.0, other 0.0


def conf_for_gap(conf):
    """Temperature making a unit score gap produce confidence `conf` (k=2)."""
    return 1.0 / math.log(conf / (1.0 - conf))


class TestMufPredict:
    def test_most_confident_model_wins(self):
        m1 = two_candidate_model(1, "pA", conf_for_gap(0.8))
        m3 = two_candidate_model(3, "pB", conf_for_gap(0.9))
        m0 = model_from_vectors(  # equal scores: confidence 0.5, predicts pA
            {"pA": [[1.0, 0.0]], "pB": [[1.0, 0.0]]}, granularity=0, temperature=1.0
        )
        models = ModelSet.of([m1, m3, m0])
        fused = muf_predict(models, QUERY, ["pA", "pB"], query_id="q")
        assert fused.chosen_granularity == 3
        assert fused.passage_id == "pB"
        assert fused.confidence == pytest.approx(0.9, abs=1e-9)
        by_model = {g: (pid, conf) for g, pid, conf in fused.per_model}
        assert by_model[1][0] == "pA"
        assert by_model[1][1] == pytest.approx(0.8, abs=1e-9)
        assert by_model[0][1] == pytest.approx(0.5, abs=1e-9)

    def test_tie_breaks_by_canonical_order(self):
        temperature = conf_for_gap(0.7)
        m1 = two_candidate_model(1, "pA", temperature)
        m3 = two_candidate_model(3, "pB", temperature)
        fused = muf_predict(ModelSet.of([m1, m3]), QUERY, ["pA", "pB"])
        assert fused.chosen_granularity == 1
        assert fused.passage_id == "pA"

    def test_single_active_model_verbatim(self):
        m5 = two_candidate_model(5, "pB", 1.0)
        fused = muf_predict(ModelSet.of([m5]), QUERY, ["pA", "pB"])
        own = predict(m5, QUERY, ["pA", "pB"])
        assert fused.passage_id == own.passage_id
        assert fused.chosen_granularity == 5

    def test_empty_candidates(self):
        m1 = two_candidate_model(1, "pA", 1.0)
        with pytest.raises(InputError, match="empty"):
            muf_predict(ModelSet.of([m1]), QUERY, [])

    def test_strict_mode_requires_temperature(self):
        m1 = two_candidate_model(1, "pA", None)
        with pytest.raises(InvariantError, match="temperature"):
            muf_predict(ModelSet.of([m1]), QUERY, ["pA", "pB"], strict=True)
        fused = muf_predict(ModelSet.of([m1]), QUERY, ["pA", "pB"], strict=False)
        assert fused.passage_id == "pA"

    def test_fusion_dominance_with_certain_model(self):
        # temperature 1e-3 saturates the winner's confidence to exactly 1.0
        sure = two_candidate_model(1, "pA", 1e-3)
        vague = two_candidate_model(3, "pB", 1e6)
        fused = muf_predict(ModelSet.of([sure, vague]), QUERY, ["pA", "pB"])
        assert fused.confidence == 1.0
        assert fused.passage_id == "pA"

    def test_per_model_predictions_untouched(self):
        models = [
            two_candidate_model(1, "pA", 0.5),
            two_candidate_model(3, "pB", 2.0),
            two_candidate_model(5, "pA", 7.0),
        ]
        fused = muf_predict(ModelSet.of(models), QUERY, ["pA", "pB"])
        for model, (granularity, pid, _) in zip(models, fused.per_model):
            own = predict(model, QUERY, ["pA", "pB"])
            assert granularity == model.granularity
            assert pid == own.passage_id

    def test_evaluation_order_permutation_invariant(self):
        m1 = two_candidate_model(1, "pA", conf_for_gap(0.8))
        m3 = two_candidate_model(3, "pB", conf_for_gap(0.9))
        m5 = two_candidate_model(5, "pA", conf_for_gap(0.6))
        base = muf_predict(ModelSet.of([m1, m3, m5]), QUERY, ["pA", "pB"])
        permuted = muf_predict(ModelSet.of([m5, m1, m3]), QUERY, ["pA", "pB"])
        assert (base.chosen_granularity, base.passage_id) == (
            permuted.chosen_granularity,
            permuted.passage_id,
        )
        assert base.confidence == pytest.approx(permuted.confidence)


class TestRankModels:
    def build_field(self, hit_patterns):
        """4 queries on basis axes; pattern bit i = model correct on query i."""
        dim = 4
        queries = []
        batches = {}
        query_rows = []
        for i in range(dim):
            qid = f"q{i}"
            vec = np.zeros(dim)
            vec[i] = 1.0
            query_rows.append(vec)
            queries.append(type("Q", (), {"id": qid})())
            batches[qid] = CandidateBatch(qid, "P", ["N"], [], rng_seed=0)
        from phrasefuse.embedding import EmbeddingStore

        query_store = EmbeddingStore(
            dim, [q.id for q in queries], np.array(query_rows, dtype=np.float32)
        )
        members = []
        for granularity, pattern in hit_patterns:
            p_vec = [0.9 if bit else 0.1 for bit in pattern]
            n_vec = [0.5] * dim
            members.append(
                model_from_vectors(
                    {"P": [p_vec], "N": [n_vec]}, granularity=granularity
                )
            )
        return ModelSet.of(members), queries, batches, query_store

    def test_top3_by_dev_accuracy(self):
        models, queries, batches, store = self.build_field(
            [
                (1, (1, 1, 1, 0)),  # 3/4
                (3, (1, 1, 0, 0)),  # 2/4
                (5, (1, 0, 0, 0)),  # 1/4
                (0, (0, 1, 1, 0)),  # 2/4
            ]
        )
        ranked = rank_models(models, queries, batches, store)
        assert [m.granularity for m in ranked.active] == [1, 3, 0]
        assert [m.granularity for m in ranked.members] == [1, 3, 5, 0]

    def test_all_equal_canonical_tie_break(self):
        models, queries, batches, store = self.build_field(
            [(g, (1, 1, 0, 0)) for g in (1, 3, 5, 0)]
        )
        ranked = rank_models(models, queries, batches, store)
        assert [m.granularity for m in ranked.active] == [1, 3, 5]

    def test_two_member_set_keeps_both(self):
        models, queries, batches, store = self.build_field(
            [(1, (1, 0, 0, 0)), (3, (0, 1, 1, 0))]
        )
        ranked = rank_models(models, queries, batches, store)
        assert [m.granularity for m in ranked.active] == [1, 3]

    def test_empty_model_set_rejected(self):
        with pytest.raises(InputError):
            ModelSet.of([])
