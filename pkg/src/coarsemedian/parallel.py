"""Deterministic parallel reduction over partitioned index ranges.

Scans are split on their leading index.  Each worker reports the maximum
over its chunk together with the lexicographically first witness tuple
achieving it; the merge keeps the overall maximum, breaking ties toward
the smallest witness.  The result is therefore independent of both the
chunking and the thread count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def chunk_ranges(n: int, parts: int):
    parts = max(1, min(parts, n)) if n > 0 else 1
    step = (n + parts - 1) // parts if n else 0
    out = []
    lo = 0
    while lo < n:
        out.append((lo, min(lo + step, n)))
        lo += step
    return out


def reduce_max(n_outer: int, worker, threads: int = 1):
    """worker(lo, hi) -> (value, witness|None); returns the merged pair.

    Values are compared with plain <; witnesses are tuples.  Chunks that
    saw nothing return (None, None).
    """
    ranges = chunk_ranges(n_outer, threads)
    if threads <= 1 or len(ranges) <= 1:
        results = [worker(lo, hi) for lo, hi in ranges]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda r: worker(*r), ranges))
    best_val, best_wit = None, None
    for val, wit in results:
        if val is None:
            continue
        if best_val is None or val > best_val or (val == best_val and wit is not None
                                                  and (best_wit is None or wit < best_wit)):
            best_val, best_wit = val, wit
    return best_val, best_wit


def map_chunks(n_outer: int, worker, merge, init, threads: int = 1):
    """Run worker(lo, hi) over chunks and fold the results with an
    order-independent merge(acc, part) starting from init."""
    ranges = chunk_ranges(n_outer, threads)
    if threads <= 1 or len(ranges) <= 1:
        parts = [worker(lo, hi) for lo, hi in ranges]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda r: worker(*r), ranges))
    acc = init
    for part in parts:
        acc = merge(acc, part)
    return acc
