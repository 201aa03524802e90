"""Worker-pool plumbing for independent trials (LOO retrainings, permutation search).

The FGA_THREADS environment variable caps the worker count; 0 or unset means
single-threaded. Results are collected by input index, so the output is
identical regardless of worker count or completion order.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def n_workers() -> int:
    raw = os.environ.get("FGA_THREADS", "").strip()
    if not raw:
        return 1
    try:
        val = int(raw)
    except ValueError:
        return 1
    if val == 0:
        return os.cpu_count() or 1
    return max(1, val)


def run_indexed(fn, items):
    """Apply fn to each item, in parallel when allowed; returns results in input order."""
    items = list(items)
    workers = min(n_workers(), len(items)) if items else 1
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
