# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled query-processing kernels.

Semantics are defined by the pure-Python twin in _kernels_py: at most k
(doc_ordinal, score) pairs, descending score, ties broken by ascending
ordinal. The heap root holds the worst of the current top-k; candidates
arrive in ascending ordinal order, so pruning when an upper bound does
not exceed the k-th score never drops a result.
"""

from libc.stdint cimport int32_t, int64_t

import numpy as np

BACKEND_NAME = "c"

cdef int64_t EXHAUSTED = (<int64_t>1) << 62


cdef inline bint _beats(int64_t s1, int64_t d1, int64_t s2, int64_t d2) noexcept:
    if s1 != s2:
        return s1 > s2
    return d1 < d2


cdef void _sift_up(int64_t* hs, int64_t* hd, Py_ssize_t i) noexcept:
    cdef Py_ssize_t parent
    cdef int64_t s = hs[i], d = hd[i]
    while i > 0:
        parent = (i - 1) >> 1
        if _beats(hs[parent], hd[parent], s, d):
            hs[i] = hs[parent]
            hd[i] = hd[parent]
            i = parent
        else:
            break
    hs[i] = s
    hd[i] = d


cdef void _sift_down(int64_t* hs, int64_t* hd, Py_ssize_t size, Py_ssize_t i) noexcept:
    cdef Py_ssize_t child
    cdef int64_t s = hs[i], d = hd[i]
    while True:
        child = 2 * i + 1
        if child >= size:
            break
        if child + 1 < size and _beats(hs[child], hd[child], hs[child + 1], hd[child + 1]):
            child += 1
        if _beats(hs[child], hd[child], s, d):
            break
        hs[i] = hs[child]
        hd[i] = hd[child]
        i = child
    hs[i] = s
    hd[i] = d


cdef list _drain(int64_t* hs, int64_t* hd, Py_ssize_t hn):
    # pop worst first, filling the ranked result back to front
    cdef list result = [None] * hn
    cdef Py_ssize_t j
    for j in range(hn - 1, -1, -1):
        result[j] = (hd[0], hs[0])
        hn -= 1
        hs[0] = hs[hn]
        hd[0] = hd[hn]
        _sift_down(hs, hd, hn, 0)
    return result


def exhaustive_topk(int32_t[::1] doc_ords, int32_t[::1] imps, int64_t[::1] offsets,
                    int64_t[::1] slots, Py_ssize_t k):
    """Document-at-a-time union over the slots' postings, exact scores."""
    cdef Py_ssize_t n = slots.shape[0]
    if n == 0 or k <= 0:
        return []

    pos_a = np.empty(n, dtype=np.int64)
    end_a = np.empty(n, dtype=np.int64)
    head_a = np.empty(n, dtype=np.int64)
    hs_a = np.empty(k, dtype=np.int64)
    hd_a = np.empty(k, dtype=np.int64)
    cdef int64_t[::1] pos = pos_a
    cdef int64_t[::1] end = end_a
    cdef int64_t[::1] head = head_a
    cdef int64_t[::1] hs = hs_a
    cdef int64_t[::1] hd = hd_a

    cdef Py_ssize_t i, hn = 0
    cdef int64_t t, doc, score
    for i in range(n):
        t = slots[i]
        pos[i] = offsets[t]
        end[i] = offsets[t + 1]
        head[i] = doc_ords[pos[i]] if pos[i] < end[i] else EXHAUSTED

    while True:
        doc = EXHAUSTED
        for i in range(n):
            if head[i] < doc:
                doc = head[i]
        if doc == EXHAUSTED:
            break
        score = 0
        for i in range(n):
            if head[i] == doc:
                score += imps[pos[i]]
                pos[i] += 1
                head[i] = doc_ords[pos[i]] if pos[i] < end[i] else EXHAUSTED
        if hn < k:
            hs[hn] = score
            hd[hn] = doc
            hn += 1
            _sift_up(&hs[0], &hd[0], hn - 1)
        elif _beats(score, doc, hs[0], hd[0]):
            hs[0] = score
            hd[0] = doc
            _sift_down(&hs[0], &hd[0], hn, 0)

    return _drain(&hs[0], &hd[0], hn)


def maxscore_topk(int32_t[::1] doc_ords, int32_t[::1] imps, int64_t[::1] offsets,
                  int64_t[::1] slots, int32_t[::1] term_max, Py_ssize_t k):
    """MaxScore dynamic pruning; same results as exhaustive_topk, always."""
    cdef Py_ssize_t n = slots.shape[0]
    if n == 0 or k <= 0:
        return []

    pos_a = np.empty(n, dtype=np.int64)
    end_a = np.empty(n, dtype=np.int64)
    head_a = np.empty(n, dtype=np.int64)
    order_a = np.empty(n, dtype=np.int64)
    cum_a = np.empty(n, dtype=np.int64)
    hs_a = np.empty(k, dtype=np.int64)
    hd_a = np.empty(k, dtype=np.int64)
    cdef int64_t[::1] pos = pos_a
    cdef int64_t[::1] end = end_a
    cdef int64_t[::1] head = head_a
    cdef int64_t[::1] order = order_a
    cdef int64_t[::1] cum = cum_a
    cdef int64_t[::1] hs = hs_a
    cdef int64_t[::1] hd = hd_a

    cdef Py_ssize_t i, j, oi, hn = 0, ne = 0
    cdef int64_t t, doc, score, threshold = 0, running = 0, key, lo, hi, mid
    cdef bint pruned

    for i in range(n):
        t = slots[i]
        pos[i] = offsets[t]
        end[i] = offsets[t + 1]
        head[i] = doc_ords[pos[i]] if pos[i] < end[i] else EXHAUSTED

    # stable insertion sort of list ids by ascending max impact
    for i in range(n):
        order[i] = i
    for i in range(1, n):
        t = order[i]
        key = term_max[t]
        j = i - 1
        while j >= 0 and term_max[order[j]] > key:
            order[j + 1] = order[j]
            j -= 1
        order[j + 1] = t

    for i in range(n):
        running += term_max[order[i]]
        cum[i] = running

    while ne < n:
        doc = EXHAUSTED
        for oi in range(ne, n):
            i = order[oi]
            if head[i] < doc:
                doc = head[i]
        if doc == EXHAUSTED:
            break

        score = 0
        for oi in range(ne, n):
            i = order[oi]
            if head[i] == doc:
                score += imps[pos[i]]
                pos[i] += 1
                head[i] = doc_ords[pos[i]] if pos[i] < end[i] else EXHAUSTED

        pruned = False
        for j in range(ne - 1, -1, -1):
            if score + cum[j] <= threshold:
                pruned = True
                break
            i = order[j]
            if head[i] < doc:
                lo = pos[i]
                hi = end[i]
                while lo < hi:
                    mid = (lo + hi) >> 1
                    if doc_ords[mid] < doc:
                        lo = mid + 1
                    else:
                        hi = mid
                pos[i] = lo
                head[i] = doc_ords[lo] if lo < end[i] else EXHAUSTED
            if head[i] == doc:
                score += imps[pos[i]]
        if pruned:
            continue

        if hn < k:
            hs[hn] = score
            hd[hn] = doc
            hn += 1
            _sift_up(&hs[0], &hd[0], hn - 1)
        elif _beats(score, doc, hs[0], hd[0]):
            hs[0] = score
            hd[0] = doc
            _sift_down(&hs[0], &hd[0], hn, 0)
        else:
            continue
        if hn == k and hs[0] > threshold:
            threshold = hs[0]
            while ne < n and cum[ne] <= threshold:
                ne += 1

    return _drain(&hs[0], &hd[0], hn)
