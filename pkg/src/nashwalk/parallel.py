"""Order-stable trial parallelism.

Trials are embarrassingly parallel and every trial derives its randomness from
its index, so distributing them over processes cannot change any result — only
the wall time.  NASHWALK_THREADS caps the worker count when no explicit count
is given.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

ENV_THREADS = "NASHWALK_THREADS"


def resolve_workers(n_workers: int | None = None) -> int:
    if n_workers is not None:
        return max(1, int(n_workers))
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def map_ordered(fn, jobs: list, n_workers: int | None = None) -> list:
    """map(fn, jobs) with results in job order, optionally across processes."""
    workers = resolve_workers(n_workers)
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    chunk = max(1, len(jobs) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, jobs, chunksize=chunk))
