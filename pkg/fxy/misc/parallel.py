from __future__ import annotations

from inspect import signature
from multiprocessing.pool import ThreadPool
from operator import itemgetter
from typing import Callable, Optional, Sequence, TypeVar

from loguru import logger
from tqdm.auto import tqdm

R = TypeVar("R")


class IndexedTask:
    """Run `fn` on an (index, item) pair and tag the result with the index, so results
    can be put back in input order whatever order the workers finish in."""

    def __init__(self, fn: Callable, desc: str = ""):
        self.fn = fn
        required = [
            p
            for p in signature(fn).parameters.values()
            if p.default is p.empty and p.kind in (p.POSITIONAL_ONLY, p.POSITIONAL_OR_KEYWORD)
        ]
        self.spread_args = len(required) > 1
        self.desc = desc

    def __call__(self, args):
        idx, item = args
        try:
            if self.spread_args:
                return idx, self.fn(*item)
            return idx, self.fn(item)
        except Exception:
            logger.error("[{}] failed at sweep index {}", self.desc or "parallel_map", idx)
            raise


def parallel_map(
    fn: Callable[..., R],
    inputs: Sequence,
    n_threads: Optional[int] = 1,
    show_progress: bool = False,
    desc: str = "",
) -> list[R]:
    """Map `fn` over `inputs` and return the results in input order.

    Args:
        n_threads: size of the thread pool; 1 (default) runs serially in the calling thread.
    """
    task = IndexedTask(fn, desc)
    if n_threads is None or n_threads <= 1 or len(inputs) <= 1:
        it = (task(x) for x in enumerate(inputs))
        return [
            r
            for _, r in tqdm(it, total=len(inputs), desc=desc, disable=not show_progress)
        ]

    with ThreadPool(processes=n_threads) as pool:
        it = pool.imap_unordered(task, enumerate(inputs))
        results = list(
            tqdm(it, total=len(inputs), desc=desc, disable=not show_progress)
        )
    results.sort(key=itemgetter(0))
    return [r for _, r in results]
