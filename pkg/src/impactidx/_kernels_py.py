"""Pure-Python twin of the compiled query-processing kernels.

Both kernels return at most k (doc_ordinal, score) pairs ordered by
descending score, ties broken by ascending ordinal. The heap entries are
(score, -ordinal) tuples so the native tuple order implements exactly
that comparator; candidates arrive in ascending ordinal order, so a
candidate displaces the current k-th entry only on a strictly larger
score, which is what makes pruning at `bound <= threshold` safe.
"""

import heapq
from bisect import bisect_left

BACKEND_NAME = "py"

_EXHAUSTED = 1 << 62


def _ranked(heap):
    heap.sort(reverse=True)
    return [(-neg_doc, score) for score, neg_doc in heap]


def exhaustive_topk(doc_ords, imps, offsets, slots, k):
    """Document-at-a-time union over the slots' postings, exact scores."""
    streams = []
    for slot in slots:
        lo, hi = int(offsets[slot]), int(offsets[slot + 1])
        streams.append(zip(doc_ords[lo:hi].tolist(), imps[lo:hi].tolist()))
    heap = []
    current = None
    score = 0
    for doc, imp in heapq.merge(*streams):
        if doc != current:
            if current is not None:
                _offer(heap, k, score, current)
            current = doc
            score = imp
        else:
            score += imp
    if current is not None:
        _offer(heap, k, score, current)
    return _ranked(heap)


def _offer(heap, k, score, doc):
    entry = (score, -doc)
    if len(heap) < k:
        heapq.heappush(heap, entry)
    elif entry > heap[0]:
        heapq.heapreplace(heap, entry)


def maxscore_topk(doc_ords, imps, offsets, slots, term_max, k, on_pruned=None):
    """MaxScore dynamic pruning; same results as exhaustive_topk, always.

    Terms are ordered by ascending max impact; the prefix whose upper
    bounds sum to no more than the current k-th score is non-essential and
    only probed via next_geq. `on_pruned(doc, bound)` is test
    instrumentation, invoked for candidates abandoned mid-scoring.
    """
    n = len(slots)
    if n == 0:
        return []

    docs = []
    vals = []
    pos = []
    head = []
    for slot in slots:
        lo, hi = int(offsets[slot]), int(offsets[slot + 1])
        docs.append(doc_ords[lo:hi].tolist())
        vals.append(imps[lo:hi].tolist())
        pos.append(0)
        head.append(docs[-1][0] if hi > lo else _EXHAUSTED)

    order = sorted(range(n), key=lambda i: int(term_max[i]))
    cum = []
    running = 0
    for i in order:
        running += int(term_max[i])
        cum.append(running)

    heap = []
    threshold = 0
    non_essential = 0

    while non_essential < n:
        doc = min(head[i] for i in order[non_essential:])
        if doc >= _EXHAUSTED:
            break

        score = 0
        for i in order[non_essential:]:
            if head[i] == doc:
                score += vals[i][pos[i]]
                pos[i] += 1
                head[i] = docs[i][pos[i]] if pos[i] < len(docs[i]) else _EXHAUSTED

        pruned = False
        for j in range(non_essential - 1, -1, -1):
            bound = score + cum[j]
            if bound <= threshold:
                pruned = True
                if on_pruned is not None:
                    on_pruned(doc, bound)
                break
            i = order[j]
            if head[i] < doc:
                p = bisect_left(docs[i], doc, pos[i])
                pos[i] = p
                head[i] = docs[i][p] if p < len(docs[i]) else _EXHAUSTED
            if head[i] == doc:
                score += vals[i][pos[i]]

        if pruned:
            continue
        entry = (score, -doc)
        if len(heap) < k:
            heapq.heappush(heap, entry)
        elif entry > heap[0]:
            heapq.heapreplace(heap, entry)
        else:
            continue
        if len(heap) == k and heap[0][0] > threshold:
            threshold = heap[0][0]
            while non_essential < n and cum[non_essential] <= threshold:
                non_essential += 1

    return _ranked(heap)
