"""Fan-out of independent seeded runs over worker processes."""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence, TypeVar

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

# Load environment variables
load_dotenv()

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    """Worker cap from BYZAGG_THREADS (default 1)."""
    raw = os.getenv("BYZAGG_THREADS", "1").strip()
    try:
        count = int(raw)
    except ValueError:
        count = 0
    if count < 1:
        logger.warning("ignoring BYZAGG_THREADS=%r, using 1 worker", raw)
        return 1
    return count


def map_ordered(fn: Callable[[T], R], items: Sequence[T], workers: int = 0) -> List[R]:
    """Apply fn to every item, results in input order; inline with one worker."""
    workers = min(workers or worker_count(), max(len(items), 1))
    if workers <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
