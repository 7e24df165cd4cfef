"""Small shared helpers: bounded parallel maps, report float formatting."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "FREDHOLMKIT_THREADS"


def thread_cap() -> int:
    """Parallelism cap from the FREDHOLMKIT_THREADS environment variable."""
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def parallel_map(fn, items):
    """Map fn over items, using at most thread_cap() worker threads."""
    items = list(items)
    workers = min(thread_cap(), len(items)) if items else 1
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def round12(x: float) -> float:
    """Round to 12 significant digits (round-half-even), for report output."""
    x = float(x)
    if x == 0.0 or not math.isfinite(x):
        return x
    return float(f"{x:.12g}")


def fmt12(x: float) -> str:
    """Fixed 12-significant-digit text rendering of a float."""
    return f"{float(x):.12g}"


def fmt_complex(z: complex) -> str:
    re, im = fmt12(z.real), fmt12(abs(z.imag))
    if z.imag == 0:
        return re
    sign = "+" if z.imag >= 0 else "-"
    if z.real == 0:
        return f"{'-' if z.imag < 0 else ''}{im}i"
    return f"{re}{sign}{im}i"
