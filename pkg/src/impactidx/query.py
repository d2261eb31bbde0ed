"""Top-k disjunctive retrieval over an ImpactIndex.

A document's score is the sum of the quantized impacts of its terms that
match the query, each unique query term counted once. Two strategies are
exposed behind one interface: an exhaustive document-at-a-time scan and
MaxScore dynamic pruning, which is safe-up-to-k and must return identical
results (documents, scores, order).
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _backend
from .corpus import DEFAULT_TOKENIZER, TokenizerConfig, tokenize
from .errors import ConfigError, ParseError
from .index import ImpactIndex


class Strategy(Enum):
    EXHAUSTIVE = "exhaustive"
    MAXSCORE = "maxscore"


@dataclass(frozen=True)
class Query:
    query_id: str
    terms: tuple[str, ...]

    @classmethod
    def from_text(cls, query_id: str, text: str,
                  config: TokenizerConfig = DEFAULT_TOKENIZER) -> "Query":
        """Tokenize with the corpus config and deduplicate, keeping first occurrence."""
        return cls(query_id, tuple(dict.fromkeys(tokenize(text, config))))


@dataclass
class TopKResult:
    query_id: str
    hits: list[tuple[str, int]]
    k_requested: int


def _resolve(index: ImpactIndex, query: Query):
    slots = [index.term_slot[t] for t in dict.fromkeys(query.terms) if t in index.term_slot]
    return np.asarray(slots, dtype=np.int64)


def search_exhaustive(index: ImpactIndex, query: Query, k: int, kernels=None) -> TopKResult:
    """Score every document matching at least one query term; exact top k."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    kernels = kernels or _backend.DEFAULT_KERNELS
    slots = _resolve(index, query)
    ranked = kernels.exhaustive_topk(index.doc_ords, index.imps, index.offsets, slots, k)
    return TopKResult(query.query_id,
                      [(index.doc_table[doc], int(score)) for doc, score in ranked], k)


def search_maxscore(index: ImpactIndex, query: Query, k: int, kernels=None) -> TopKResult:
    """MaxScore-pruned top k; identical output to :func:`search_exhaustive`."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    kernels = kernels or _backend.DEFAULT_KERNELS
    slots = _resolve(index, query)
    term_max = index.term_max[slots] if len(slots) else np.empty(0, dtype=np.int32)
    ranked = kernels.maxscore_topk(index.doc_ords, index.imps, index.offsets,
                                   slots, term_max, k)
    return TopKResult(query.query_id,
                      [(index.doc_table[doc], int(score)) for doc, score in ranked], k)


_SEARCHERS = {
    Strategy.EXHAUSTIVE: search_exhaustive,
    Strategy.MAXSCORE: search_maxscore,
}


def batch_search(index: ImpactIndex, queries, k: int, strategy: Strategy,
                 threads: int = 1, kernels=None):
    """Run a query batch; returns (results, per-query latencies in ms).

    Latency wraps the search call only, on the monotonic clock. Results
    are ordered like the input regardless of thread count.
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    search = _SEARCHERS[strategy]

    def timed(query):
        start = time.perf_counter_ns()
        result = search(index, query, k, kernels=kernels)
        elapsed_ms = (time.perf_counter_ns() - start) / 1e6
        return result, elapsed_ms

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pairs = list(pool.map(timed, queries))
    else:
        pairs = [timed(q) for q in queries]
    results = [r for r, _ in pairs]
    latencies = [ms for _, ms in pairs]
    return results, latencies


def read_queries_tsv(path, config: TokenizerConfig = DEFAULT_TOKENIZER) -> list[Query]:
    """Read `query_id<TAB>query text` lines into tokenized queries."""
    queries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2 or not parts[0]:
                raise ParseError("expected query_id<TAB>text", path=path, line=lineno)
            queries.append(Query.from_text(parts[0], parts[1], config))
    return queries


def write_trec_run(results, path, run_tag: str = "impactidx") -> None:
    """Write results in TREC run format, ranks starting at 1."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for result in results:
            for rank, (doc_id, score) in enumerate(result.hits, 1):
                fh.write(f"{result.query_id} Q0 {doc_id} {rank} {score} {run_tag}\n")
