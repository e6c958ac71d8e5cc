"""Order-preserving process map for replica-parallel work.

Work is partitioned deterministically by the caller; results are merged in
argument order, so the output never depends on scheduling or on `jobs`.
"""

import os
from concurrent.futures import ProcessPoolExecutor

__all__ = ["default_jobs", "pmap"]


def default_jobs():
    return os.cpu_count() or 1


def pmap(fn, items, jobs):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))
