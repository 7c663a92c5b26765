"""Optional thread-based parallelism, controlled by TRANSMUTE_THREADS."""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    """Worker count from the TRANSMUTE_THREADS environment variable.

    Unset, empty, or invalid values mean serial execution.
    """
    raw = os.environ.get("TRANSMUTE_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        warnings.warn(f"ignoring non-integer TRANSMUTE_THREADS={raw!r}")
        return 1
    return max(1, n)


def parallel_map(fn, items):
    """Map fn over items, threaded when TRANSMUTE_THREADS > 1.

    Results come back in input order.  Threads suffice here because the
    heavy lifting happens inside numpy, which releases the GIL.
    """
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
