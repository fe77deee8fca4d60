"""
Test Evaluation - Pessimistic ranks, MRR / HITS@k, categories and type-checked MAP
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from kb import EmptyStoreError, Triple, compute_domains
from models import Slot
from evaluation import (
    UNCLASSIFIED,
    RankResult,
    average_precision,
    evaluate,
    evaluate_modes,
    map_summary,
    map_type_checked,
    pessimistic_rank,
    rank_entity,
    rank_triples,
    summarize,
)
from tests.helpers import (
    TableModel,
    brute_force_map,
    brute_force_ranks,
    make_store,
    oracle_model,
    random_store,
)


def random_table(rng, store, levels=3) -> TableModel:
    """Few distinct score levels so ties are common."""
    shape = (store.n_relations, store.n_entities, store.n_entities)
    return TableModel(rng.integers(0, levels, size=shape).astype(np.float64))


def results_with_ranks(ranks, mode="filtered"):
    return [RankResult(Triple(0, 0, 1), Slot.OBJECT, rank, rank, mode) for rank in ranks]


class TestPessimisticRank:
    """Tests for pessimistic_rank"""

    def test_hand_set_scores(self):
        """Test scores [0.5 true, 0.9, 0.1] rank the true entity 2nd"""
        assert pessimistic_rank(np.array([0.5, 0.9, 0.1]), 0) == 2

    def test_ties_count_against(self):
        """Test equal scores are ranked ahead of the true entity"""
        assert pessimistic_rank(np.array([1.0, 1.0, 1.0]), 1) == 3

    def test_exclude(self):
        """Test excluded candidates are skipped"""
        assert pessimistic_rank(np.array([0.5, 0.9, 0.1]), 0, np.array([1])) == 1

    def test_bounds(self, rng):
        """Test 1 <= rank <= number of candidates"""
        for _ in range(20):
            scores = rng.normal(size=9)
            target = int(rng.integers(0, 9))
            assert 1 <= pessimistic_rank(scores, target) <= 9


class TestRankEntity:
    """Tests for rank_entity and rank_triples"""

    def test_raw_and_filtered(self):
        """Test a known competitor costs a place only in raw mode"""
        store = make_store([(0, 0, 1), (0, 0, 2)], test=[(0, 0, 3)], n_entities=4)
        table = np.zeros((1, 4, 4))
        table[0, 0] = [0.0, 0.9, 0.8, 0.5]
        result = rank_entity(TableModel(table), (0, 0, 3), "object", store)
        assert (result.raw_rank, result.filtered_rank) == (3, 1)
        assert result.rank == 1
        assert rank_entity(TableModel(table), (0, 0, 3), "object", store, mode="raw").rank == 3

    def test_unknown_mode(self, small_store):
        """Test only raw and filtered are accepted"""
        with pytest.raises(ValueError):
            rank_entity(oracle_model(small_store), (3, 1, 2), "object", small_store, mode="strict")

    def test_matches_brute_force(self):
        """Test ranks equal direct enumeration on 20 random knowledge bases"""
        for seed in range(20):
            rng = np.random.default_rng(seed)
            store = random_store(rng)
            model = random_table(rng, store)
            for triple in store.test.tolist():
                for slot in (Slot.SUBJECT, Slot.OBJECT):
                    result = rank_entity(model, triple, slot, store)
                    assert (result.raw_rank, result.filtered_rank) == brute_force_ranks(model, store, triple, slot)

    def test_filtered_never_above_raw(self):
        """Test filtered rank <= raw rank"""
        rng = np.random.default_rng(5)
        store = random_store(rng)
        for result in rank_triples(random_table(rng, store), store, store.test):
            assert 1 <= result.filtered_rank <= result.raw_rank <= store.n_entities

    def test_oracle_ranks_first(self):
        """Test a model scoring exactly the known triples gets filtered rank 1 everywhere"""
        store = random_store(np.random.default_rng(8))
        report = evaluate(oracle_model(store), store, "filtered")
        assert report.mrr == pytest.approx(1.0)
        assert report.hits10 == pytest.approx(100.0)

    def test_order_and_workers(self):
        """Test two results per triple, subject first, identical with threads"""
        rng = np.random.default_rng(2)
        store = random_store(rng, n_triples=60)
        model = random_table(rng, store)
        serial = rank_triples(model, store, store.test)
        threaded = rank_triples(model, store, store.test, workers=3, chunk_size=4)
        assert serial == threaded
        assert len(serial) == 2 * len(store.test)
        assert [r.slot for r in serial[:2]] == [Slot.SUBJECT, Slot.OBJECT]


class TestSummarize:
    """Tests for summarize and evaluate_modes"""

    def test_mrr(self):
        """Test ranks {1, 2, 4} give MRR 0.58333"""
        report = summarize(results_with_ranks([1, 2, 4]))
        assert report.mrr == pytest.approx(0.583333, abs=1e-5)
        assert report.mean_rank == pytest.approx(7 / 3)

    def test_hits_at_10(self):
        """Test ranks {1, 11, 10} give HITS@10 66.7"""
        report = summarize(results_with_ranks([1, 11, 10]))
        assert report.hits10 == pytest.approx(66.6667, abs=1e-3)
        assert report.hits[1] == pytest.approx(33.3333, abs=1e-3)

    def test_empty(self):
        """Test summarizing nothing raises"""
        with pytest.raises(EmptyStoreError):
            summarize([])

    def test_metric_ranges(self):
        """Test 0 < MRR <= 1 and 0 <= HITS@10 <= 100"""
        rng = np.random.default_rng(4)
        store = random_store(rng)
        for report in evaluate_modes(random_table(rng, store), store).values():
            assert 0.0 < report.mrr <= 1.0
            assert 0.0 <= report.hits10 <= 100.0

    def test_filtered_beats_raw(self):
        """Test filtered MRR >= raw MRR"""
        rng = np.random.default_rng(6)
        store = random_store(rng)
        reports = evaluate_modes(random_table(rng, store), store)
        assert reports["filtered"].mrr >= reports["raw"].mrr

    def test_categories_partition_queries(self):
        """Test category counts plus unclassified cover every query"""
        rng = np.random.default_rng(10)
        store = random_store(rng, n_relations=5, n_triples=70)
        report = evaluate(random_table(rng, store), store)
        counted = sum(cell.count for cells in report.categories.values() for cell in cells.values())
        assert counted + report.unclassified == report.n_queries
        frame = report.category_frame()
        assert len(frame) == 4
        assert {"subject_hits10", "object_hits10", "subject_count", "object_count"} <= set(frame.columns)

    def test_unclassified_relation(self):
        """Test a relation absent from train is unclassified"""
        store = make_store([(0, 0, 1), (1, 0, 2)], test=[(0, 1, 2)], n_entities=3, n_relations=2)
        report = evaluate(oracle_model(store), store)
        assert report.unclassified == 2
        assert UNCLASSIFIED not in report.categories

    def test_empty_split(self):
        """Test evaluation needs queries"""
        store = make_store([(0, 0, 1)])
        with pytest.raises(EmptyStoreError):
            evaluate_modes(oracle_model(store), store)

    def test_report_rows(self):
        """Test metric,value rows include MAP only when computed"""
        store = random_store(np.random.default_rng(12))
        model = oracle_model(store)
        plain = evaluate(model, store).to_frame()
        assert "map" not in set(plain["metric"])
        with_map = evaluate(model, store, with_map=True)
        assert {"mrr", "hits@10", "map", "map_skipped"} <= set(with_map.to_frame()["metric"])


class TestAveragePrecision:
    """Tests for average_precision and type-checked MAP"""

    def test_example(self):
        """Test relevant at ranks 1 and 3 of 5 gives 0.8333"""
        scores = np.array([5.0, 4.0, 3.0, 2.0, 1.0])
        relevant = np.array([True, False, True, False, False])
        assert average_precision(scores, relevant) == pytest.approx(0.833333, abs=1e-5)

    def test_ties_put_relevant_last(self):
        """Test a tied non-relevant candidate is ranked first"""
        assert average_precision(np.array([1.0, 1.0]), np.array([True, False])) == pytest.approx(0.5)

    def test_no_relevant(self):
        """Test AP is 0 without relevant candidates"""
        assert average_precision(np.array([1.0, 2.0]), np.array([False, False])) == 0.0

    def test_map_matches_brute_force(self):
        """Test MAP equals explicit sorting on random knowledge bases"""
        for seed in range(10):
            rng = np.random.default_rng(100 + seed)
            store = random_store(rng, n_triples=60)
            model = random_table(rng, store)
            expected = brute_force_map(model, store)
            actual = map_type_checked(model, store, compute_domains(store))
            if np.isnan(expected):
                assert np.isnan(actual)
            else:
                assert actual == pytest.approx(expected)

    def test_out_of_domain_skipped(self):
        """Test queries whose true entity is outside the domain are skipped"""
        store = make_store([(0, 0, 1), (2, 0, 1)], test=[(3, 0, 1)], n_entities=4)
        summary = map_summary(oracle_model(store), store, compute_domains(store))
        # subject 3 is not in X_r; object 1 is in Y_r
        assert summary.skipped == 1
        assert summary.queries == 1
        assert summary.value == pytest.approx(1.0)

    def test_every_query_skipped(self):
        """Test an all-skipped split reports zero queries, nan and the skip count"""
        store = make_store([(0, 0, 1), (2, 0, 1)], test=[(3, 0, 4)], n_entities=5)
        summary = map_summary(oracle_model(store), store, compute_domains(store))
        assert summary.empty
        assert summary.queries == 0
        assert summary.skipped == 2
        assert np.isnan(summary.value)
        assert np.isnan(map_type_checked(oracle_model(store), store, compute_domains(store)))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
