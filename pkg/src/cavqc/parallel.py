"""Worker-count independent map/reduce.

Work is always cut into the same chunks regardless of ``workers``; the pool only
changes who evaluates them.  Reductions run over chunk results in chunk order,
so every result is bitwise identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def chunk_bounds(n: int, chunk: int):
    return [(i, min(i + chunk, n)) for i in range(0, n, chunk)]


def ordered_map(fn, items, workers: int = 1):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def tree_sum(values) -> float:
    """Pairwise sum in a fixed tree order."""
    vals = [float(v) for v in values]
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def chunked_sum(values: np.ndarray, chunk: int = 4096, workers: int = 1) -> float:
    """Sum of a 1D array via fixed chunks and a fixed reduction tree."""
    values = np.asarray(values, dtype=float).ravel()
    parts = ordered_map(lambda b: float(np.sum(values[b[0]:b[1]])), chunk_bounds(values.size, chunk), workers)
    return tree_sum(parts)


def argmin_reduce(parts):
    """Combine ``(value, index)`` pairs: smallest value, ties to the lowest index."""
    best = (np.inf, -1)
    for v, i in parts:
        if v < best[0] or (v == best[0] and 0 <= i < best[1]):
            best = (v, i)
    return best
