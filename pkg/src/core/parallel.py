import logging
import multiprocessing as mp
from functools import partial

logger = logging.getLogger(__name__)


def parallel_map(fn, items, threads=1, **kwargs):
    """Ordered map of ``fn(item, **kwargs)``; serial unless threads > 1."""
    items = list(items)
    worker = partial(fn, **kwargs) if kwargs else fn
    if threads <= 1 or len(items) <= 1:
        return [worker(item) for item in items]
    n_proc = min(threads, len(items))
    logger.debug("mapping %d tasks over %d processes", len(items), n_proc)
    with mp.Pool(processes=n_proc) as pool:
        return pool.map(worker, items)
