from __future__ import annotations

from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Callable, Protocol, TypeVar

import numpy as np

T = TypeVar("T")


class BlockMapper(Protocol):
    """Applies a per-vertex function to vertices ``0..count-1``, results in vertex order."""

    workers: int

    def map(self, fn: Callable[[int], T], count: int) -> list[T]: ...


class SerialMapper:
    workers = 1

    def map(self, fn: Callable[[int], T], count: int) -> list[T]:
        return [fn(i) for i in range(count)]


class ThreadedMapper:
    def __init__(self, workers: int) -> None:
        self.workers = workers
        self._executor = ThreadPoolExecutor(
            max_workers=workers, thread_name_prefix="pdmm-vertex"
        )

    def map(self, fn: Callable[[int], T], count: int) -> list[T]:
        return list(self._executor.map(fn, range(count)))

    def close(self) -> None:
        self._executor.shutdown(wait=True)


SERIAL = SerialMapper()


@contextmanager
def block_mapper(workers: int = 1) -> Iterator[BlockMapper]:
    if workers <= 1:
        yield SERIAL
        return
    mapper = ThreadedMapper(workers)
    try:
        yield mapper
    finally:
        mapper.close()


def stack_blocks(
    mapper: BlockMapper | None, fn: Callable[[int], np.ndarray], count: int
) -> np.ndarray:
    return np.stack((mapper or SERIAL).map(fn, count))
