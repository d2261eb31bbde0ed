import math

import numpy as np
import pytest
from scipy import stats

from impactidx.errors import DataError, ParseError
from impactidx.evaluation import (
    map_metric,
    mrr_at_k,
    ndcg_at_k,
    paired_ttest,
    paired_ttest_bonferroni,
    parse_qrels,
    read_trec_run,
    recall_at_k,
)

from reference_eval import (
    oracle_fixture,
    reference_ap,
    reference_mrr,
    reference_ndcg,
    reference_recall,
)


class TestParseQrels:
    def test_basic(self, tmp_path):
        path = tmp_path / "qrels"
        path.write_text("q1 0 d1 1\n", encoding="utf-8")
        assert parse_qrels(path) == {"q1": {"d1": 1}}

    def test_duplicate_keeps_last(self, tmp_path):
        path = tmp_path / "qrels"
        path.write_text("q1 0 d1 1\nq1 0 d1 2\n", encoding="utf-8")
        assert parse_qrels(path) == {"q1": {"d1": 2}}

    def test_non_integer_grade(self, tmp_path):
        path = tmp_path / "qrels"
        path.write_text("q1 0 d1 high\n", encoding="utf-8")
        with pytest.raises(ParseError, match="1"):
            parse_qrels(path)


class TestRunReader:
    def test_orders_by_rank_column(self, tmp_path):
        path = tmp_path / "run"
        path.write_text("q1 Q0 d2 2 5 tag\nq1 Q0 d1 1 9 tag\n", encoding="utf-8")
        assert read_trec_run(path) == {"q1": ["d1", "d2"]}

    def test_score_values_ignored_rank_based(self, tmp_path):
        # metrics are rank-based: any order-preserving rescoring is a no-op
        a, b = tmp_path / "a", tmp_path / "b"
        a.write_text("q1 Q0 d1 1 100 t\nq1 Q0 d2 2 50 t\n", encoding="utf-8")
        b.write_text("q1 Q0 d1 1 3.14 t\nq1 Q0 d2 2 0.5 t\n", encoding="utf-8")
        qrels = {"q1": {"d2": 1}}
        assert mrr_at_k(read_trec_run(a), qrels, 10).mean == \
            mrr_at_k(read_trec_run(b), qrels, 10).mean


RUN = {"q1": [f"d{i}" for i in range(1, 15)]}


class TestMrr:
    def test_rank_one(self):
        assert mrr_at_k(RUN, {"q1": {"d1": 1}}, 10).mean == 1.0

    def test_rank_three(self):
        assert mrr_at_k(RUN, {"q1": {"d3": 1}}, 10).mean == pytest.approx(1 / 3)

    def test_beyond_cutoff(self):
        assert mrr_at_k(RUN, {"q1": {"d11": 1}}, 10).mean == 0.0

    def test_threshold_respected(self):
        qrels = {"q1": {"d1": 1, "d2": 2}}
        assert mrr_at_k(RUN, qrels, 10, rel_threshold=2).mean == pytest.approx(1 / 2)


class TestRecall:
    def test_all_found(self):
        assert recall_at_k(RUN, {"q1": {"d1": 1, "d2": 1}}, 10).mean == 1.0

    def test_quarter(self):
        qrels = {"q1": {"d1": 1, "d90": 1, "d91": 1, "d92": 1}}
        assert recall_at_k(RUN, qrels, 10).mean == 0.25

    def test_query_absent_from_run_scores_zero(self):
        report = recall_at_k(RUN, {"q1": {"d1": 1}, "q9": {"d1": 1}}, 10)
        assert report.per_query["q9"] == 0.0
        assert report.mean == 0.5

    def test_zero_relevant_queries_excluded(self):
        report = recall_at_k(RUN, {"q1": {"d1": 1}, "q2": {"d1": 0}}, 10)
        assert "q2" not in report.per_query
        assert report.query_count == 1


class TestNdcg:
    def test_ideal_single_relevant(self):
        assert ndcg_at_k(RUN, {"q1": {"d1": 1}}, 10).mean == 1.0

    def test_relevant_at_rank_two(self):
        # DCG = 1/log2(3), IDCG = 1
        report = ndcg_at_k({"q1": ["d9", "d1"]}, {"q1": {"d1": 1}}, 10)
        assert report.mean == pytest.approx(1 / math.log2(3))
        assert report.mean == pytest.approx(0.63093, abs=1e-5)

    def test_all_grades_zero(self):
        assert ndcg_at_k(RUN, {"q1": {"d1": 0}}, 10).mean == 0.0

    def test_graded_exponential_gain(self):
        # grades 2 then 1: DCG = 3/log2(2) + 1/log2(3); ideal identical
        report = ndcg_at_k({"q1": ["d1", "d2"]}, {"q1": {"d1": 2, "d2": 1}}, 10)
        assert report.mean == 1.0
        flipped = ndcg_at_k({"q1": ["d2", "d1"]}, {"q1": {"d1": 2, "d2": 1}}, 10)
        expected = (1.0 + 3.0 / math.log2(3)) / (3.0 + 1.0 / math.log2(3))
        assert flipped.mean == pytest.approx(expected)


class TestMap:
    def test_single_relevant_at_rank_one(self):
        assert map_metric(RUN, {"q1": {"d1": 1}}).mean == 1.0

    def test_two_relevant_at_ranks_one_and_three(self):
        qrels = {"q1": {"d1": 1, "d3": 1}}
        assert map_metric(RUN, qrels).mean == pytest.approx(5 / 6)

    def test_no_relevant_retrieved(self):
        assert map_metric(RUN, {"q1": {"d99": 1}}).mean == 0.0

    def test_unretrieved_relevant_penalized(self):
        qrels = {"q1": {"d1": 1, "d99": 1}}
        assert map_metric(RUN, qrels).mean == pytest.approx(0.5)


class TestAgainstReference:
    def test_oracle_fixture_all_metrics(self):
        run, qrels = oracle_fixture()
        assert mrr_at_k(run, qrels, 10).mean == pytest.approx(
            np.mean([reference_mrr(run.get(q, []), j, 10) for q, j in qrels.items()]),
            abs=1e-10)
        for k in (10, 1000):
            mine = recall_at_k(run, qrels, k)
            ref = [reference_recall(run.get(q, []), j, k) for q, j in qrels.items()]
            ref = [r for r in ref if r is not None]
            assert mine.mean == pytest.approx(np.mean(ref), abs=1e-10)
        assert ndcg_at_k(run, qrels, 10).mean == pytest.approx(
            np.mean([reference_ndcg(run.get(q, []), j, 10) for q, j in qrels.items()]),
            abs=1e-10)
        assert map_metric(run, qrels).mean == pytest.approx(
            np.mean([reference_ap(run.get(q, []), j) for q, j in qrels.items()]),
            abs=1e-10)

    def test_metrics_bounded(self, rng):
        for _ in range(30):
            docs = [f"d{i}" for i in range(30)]
            run = {"q": list(rng.permutation(docs)[: int(rng.integers(1, 30))])}
            qrels = {"q": {d: int(rng.integers(0, 4)) for d in
                           rng.choice(docs, size=8, replace=False)}}
            for report in (mrr_at_k(run, qrels, 10), recall_at_k(run, qrels, 10),
                           ndcg_at_k(run, qrels, 10), map_metric(run, qrels)):
                for value in report.per_query.values():
                    assert 0.0 <= value <= 1.0
                assert 0.0 <= report.mean <= 1.0


class TestPairedTTest:
    def test_identical_vectors(self):
        t, p = paired_ttest([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert t == 0.0 and p == 1.0

    def test_constant_shift_degenerate(self):
        t, p = paired_ttest([2.0, 3.0, 4.0], [1.0, 2.0, 3.0])
        assert math.isinf(t) and t > 0 and p == 0.0

    def test_matches_scipy_oracle(self, rng):
        for _ in range(50):
            n = int(rng.integers(5, 60))
            a = rng.normal(size=n)
            b = a + rng.normal(scale=0.5, size=n) + rng.uniform(-0.3, 0.3)
            t, p = paired_ttest(a, b)
            expected = stats.ttest_rel(a, b)
            assert t == pytest.approx(expected.statistic, rel=1e-9)
            assert p == pytest.approx(expected.pvalue, abs=1e-6)

    def test_two_systems_identity_correction(self):
        scores = {
            "A": {"q1": 0.1, "q2": 0.4, "q3": 0.9},
            "B": {"q1": 0.1, "q2": 0.4, "q3": 0.9},
        }
        results = paired_ttest_bonferroni(scores)
        assert len(results) == 1
        assert results[0].t_statistic == 0.0 and not results[0].significant

    def test_three_systems_single_significant_pair(self, rng):
        n = 50
        base = rng.uniform(0.0, 1.0, size=n)
        jitter = rng.normal(scale=1e-3, size=n)
        unrelated = rng.uniform(-20.0, 20.0, size=n)
        qids = [f"q{i}" for i in range(n)]
        scores = {
            "A": dict(zip(qids, base)),
            "B": dict(zip(qids, base + 0.5 + jitter)),
            "C": dict(zip(qids, unrelated)),
        }
        results = {(r.system_a, r.system_b): r for r in paired_ttest_bonferroni(scores)}
        assert results[("A", "B")].significant
        assert not results[("A", "C")].significant
        assert not results[("B", "C")].significant
        # oracle agreement incl. the Bonferroni threshold at m = 3
        for (a, b), r in results.items():
            expected = stats.ttest_rel([scores[a][q] for q in sorted(qids)],
                                       [scores[b][q] for q in sorted(qids)])
            assert r.p_value == pytest.approx(expected.pvalue, abs=1e-6)
            assert r.significant == (expected.pvalue < 0.05 / 3)

    def test_mismatched_query_sets(self):
        scores = {"A": {"q1": 0.5, "q2": 0.5}, "B": {"q1": 0.5, "q3": 0.5}}
        with pytest.raises(DataError, match="query set"):
            paired_ttest_bonferroni(scores)
