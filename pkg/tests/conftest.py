"""Shared test helpers: random index generation and independent oracles.

The brute-force scorer here is the reference for every top-k test. It is
deliberately structured unlike the engine kernels (dict accumulation over
whole posting lists, then a full sort) so the two cannot share a bug.
"""

import numpy as np
import pytest

from impactidx.index import ImpactIndex


def brute_force_topk(index, terms, k):
    """Independent oracle: exact top-k as (doc_id, score) pairs."""
    scores = {}
    for term in dict.fromkeys(terms):
        slot = index.term_slot.get(term)
        if slot is None:
            continue
        lo, hi = int(index.offsets[slot]), int(index.offsets[slot + 1])
        for ordinal, impact in zip(index.doc_ords[lo:hi], index.imps[lo:hi]):
            scores[int(ordinal)] = scores.get(int(ordinal), 0) + int(impact)
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))[:k]
    return [(index.doc_table[ordinal], score) for ordinal, score in ranked]


def make_random_index(rng, n_docs=None, n_terms=None, bits=8, all_equal_impacts=False,
                      single_posting_lists=False):
    """Build an ImpactIndex directly from random postings.

    Bypasses the quantizer on purpose: the query kernels only see integer
    impacts in [1, 2^bits - 1], so tests can cover that space directly.
    """
    if n_docs is None:
        n_docs = int(rng.integers(1, 501))
    if n_terms is None:
        n_terms = int(rng.integers(1, 101))
    levels = (1 << bits) - 1
    terms = [f"t{i:03d}" for i in range(n_terms)]

    doc_chunks = []
    imp_chunks = []
    counts = []
    term_max = []
    for _ in terms:
        if single_posting_lists:
            size = 1
        else:
            size = int(rng.integers(1, max(2, n_docs + 1)))
        ords = np.sort(rng.choice(n_docs, size=min(size, n_docs), replace=False))
        if all_equal_impacts:
            imps = np.full(len(ords), 7, dtype=np.int32)
        else:
            imps = rng.integers(1, levels + 1, size=len(ords)).astype(np.int32)
        doc_chunks.append(ords.astype(np.int32))
        imp_chunks.append(imps)
        counts.append(len(ords))
        term_max.append(int(imps.max()))

    offsets = np.zeros(n_terms + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(counts, dtype=np.int64)
    return ImpactIndex(
        bits=bits,
        s_max=10.0,
        terms=terms,
        offsets=offsets,
        doc_ords=np.concatenate(doc_chunks),
        imps=np.concatenate(imp_chunks),
        term_max=np.asarray(term_max, dtype=np.int32),
        doc_table=[f"d{i:04d}" for i in range(n_docs)],
    )


def random_query_terms(rng, index, max_len=6, include_unknown=True):
    n = int(rng.integers(1, max_len + 1))
    terms = list(rng.choice(index.terms, size=min(n, len(index.terms)), replace=False))
    if include_unknown and rng.random() < 0.2:
        terms.append("zz_not_indexed")
    return terms


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
