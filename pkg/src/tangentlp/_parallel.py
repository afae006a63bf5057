"""Order-preserving parallel map over independent work items."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def parallel_map(fn, items, n_jobs: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool.

    Results come back in input order, so any reduction over them is
    independent of scheduling. numpy kernels release the GIL, which is where
    threads pay off.
    """
    items = list(items)
    if n_jobs is None or n_jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, items))
