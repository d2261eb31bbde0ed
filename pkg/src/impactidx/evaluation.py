"""Rank metrics over TREC-format runs and qrels, plus paired significance tests.

Conventions, fixed here once: means are over the queries present in the
judgments; a judged query missing from the run scores 0 (recall instead
excludes queries with no relevant documents at all); a document counts as
relevant when its grade reaches `rel_threshold` (default 1). NDCG uses
exponential gain (2^grade - 1) with a log2(rank+1) discount.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy import stats

from .errors import DataError, ParseError

RelevanceJudgments = dict[str, dict[str, int]]
Run = dict[str, list[str]]


@dataclass
class MetricReport:
    metric: str
    per_query: dict[str, float]
    mean: float
    query_count: int


def parse_qrels(path) -> RelevanceJudgments:
    """Parse TREC qrels: `query_id iteration doc_id grade`, last grade wins."""
    qrels: RelevanceJudgments = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 4:
                raise ParseError("expected 4 whitespace-separated fields", path=path, line=lineno)
            query_id, _, doc_id, grade = parts
            try:
                grade = int(grade)
            except ValueError:
                raise ParseError(f"non-integer grade {parts[3]!r}", path=path, line=lineno) from None
            if grade < 0:
                raise ParseError(f"negative grade {grade}", path=path, line=lineno)
            qrels.setdefault(query_id, {})[doc_id] = grade
    return qrels


def read_trec_run(path) -> Run:
    """Read a TREC run; per query, documents ordered by the rank column."""
    rows: dict[str, list[tuple[int, str]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise ParseError("expected 6 whitespace-separated fields", path=path, line=lineno)
            query_id, _, doc_id, rank, _, _ = parts
            try:
                rank = int(rank)
            except ValueError:
                raise ParseError(f"non-integer rank {parts[3]!r}", path=path, line=lineno) from None
            rows.setdefault(query_id, []).append((rank, doc_id))
    run: Run = {}
    for query_id, entries in rows.items():
        entries.sort()
        run[query_id] = [doc_id for _, doc_id in entries]
    return run


def _report(metric: str, per_query: dict[str, float]) -> MetricReport:
    n = len(per_query)
    mean = sum(per_query.values()) / n if n else 0.0
    return MetricReport(metric, per_query, mean, n)


def mrr_at_k(run: Run, qrels: RelevanceJudgments, k: int,
             rel_threshold: int = 1) -> MetricReport:
    """Reciprocal rank of the first relevant hit within the top k, else 0."""
    per_query = {}
    for query_id, judgments in qrels.items():
        value = 0.0
        for rank, doc_id in enumerate(run.get(query_id, [])[:k], 1):
            if judgments.get(doc_id, 0) >= rel_threshold:
                value = 1.0 / rank
                break
        per_query[query_id] = value
    return _report(f"mrr@{k}", per_query)


def recall_at_k(run: Run, qrels: RelevanceJudgments, k: int,
                rel_threshold: int = 1) -> MetricReport:
    """Fraction of relevant documents retrieved in the top k.

    Queries with no relevant documents are excluded from the mean.
    """
    per_query = {}
    for query_id, judgments in qrels.items():
        relevant = {d for d, g in judgments.items() if g >= rel_threshold}
        if not relevant:
            continue
        retrieved = set(run.get(query_id, [])[:k])
        per_query[query_id] = len(relevant & retrieved) / len(relevant)
    return _report(f"recall@{k}", per_query)


def ndcg_at_k(run: Run, qrels: RelevanceJudgments, k: int) -> MetricReport:
    """DCG@k = sum (2^grade - 1) / log2(rank + 1), normalized by the ideal DCG."""
    per_query = {}
    for query_id, judgments in qrels.items():
        dcg = 0.0
        for rank, doc_id in enumerate(run.get(query_id, [])[:k], 1):
            grade = judgments.get(doc_id, 0)
            if grade > 0:
                dcg += (2.0 ** grade - 1.0) / math.log2(rank + 1)
        idcg = 0.0
        for rank, grade in enumerate(sorted(judgments.values(), reverse=True)[:k], 1):
            if grade > 0:
                idcg += (2.0 ** grade - 1.0) / math.log2(rank + 1)
        per_query[query_id] = dcg / idcg if idcg > 0 else 0.0
    return _report(f"ndcg@{k}", per_query)


def map_metric(run: Run, qrels: RelevanceJudgments,
               rel_threshold: int = 1) -> MetricReport:
    """Average precision at each relevant retrieved document, over the full run."""
    per_query = {}
    for query_id, judgments in qrels.items():
        relevant = {d for d, g in judgments.items() if g >= rel_threshold}
        if not relevant:
            per_query[query_id] = 0.0
            continue
        hits = 0
        precision_sum = 0.0
        for rank, doc_id in enumerate(run.get(query_id, []), 1):
            if doc_id in relevant:
                hits += 1
                precision_sum += hits / rank
        per_query[query_id] = precision_sum / len(relevant)
    return _report("map", per_query)


@dataclass
class PairwiseTest:
    system_a: str
    system_b: str
    t_statistic: float
    p_value: float
    significant: bool


def paired_ttest(a, b) -> tuple[float, float]:
    """Two-sided paired t-test; t computed directly, p from the t distribution.

    Degenerate variance is pinned: all-zero differences give (0, 1),
    constant nonzero differences give (+/-inf, 0).
    """
    diffs = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    n = diffs.size
    if n < 2:
        raise DataError("paired t-test needs at least 2 paired observations")
    mean = diffs.mean()
    sd = diffs.std(ddof=1)
    if sd == 0.0:
        if mean == 0.0:
            return 0.0, 1.0
        return math.copysign(math.inf, mean), 0.0
    t = mean / (sd / math.sqrt(n))
    p = 2.0 * stats.t.sf(abs(t), n - 1)
    return float(t), float(p)


def paired_ttest_bonferroni(per_query_scores: dict[str, dict[str, float]],
                            alpha: float = 0.05) -> list[PairwiseTest]:
    """All-pairs paired t-tests; significant when p < alpha / (number of pairs).

    Every system must cover the same query set.
    """
    systems = list(per_query_scores)
    if len(systems) < 2:
        raise DataError("need at least 2 systems to compare")
    query_ids = sorted(per_query_scores[systems[0]])
    for name in systems[1:]:
        if sorted(per_query_scores[name]) != query_ids:
            raise DataError(f"system {name!r} covers a different query set "
                            f"than {systems[0]!r}")
    pairs = list(combinations(systems, 2))
    m = len(pairs)
    results = []
    for name_a, name_b in pairs:
        a = [per_query_scores[name_a][q] for q in query_ids]
        b = [per_query_scores[name_b][q] for q in query_ids]
        t, p = paired_ttest(a, b)
        results.append(PairwiseTest(name_a, name_b, t, p, p < alpha / m))
    return results
