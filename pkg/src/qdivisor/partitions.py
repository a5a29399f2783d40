"""Partitions into distinct parts and the weighted divisor sums over them."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from gmpy2 import mpq

from .scalars import as_scalar


@dataclass(frozen=True)
class DistinctPartition:
    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise ValueError("a partition needs at least one part")
        if any(a <= b for a, b in zip(self.parts, self.parts[1:])) or self.parts[-1] < 1:
            raise ValueError(f"parts must be strictly decreasing positive integers: {self.parts}")

    @property
    def count(self) -> int:
        return len(self.parts)

    @property
    def smallest(self) -> int:
        return self.parts[-1]

    @property
    def largest(self) -> int:
        return self.parts[0]

    @property
    def total(self) -> int:
        return sum(self.parts)


def _distinct(n: int, cap: int) -> Iterator[tuple]:
    # parts < = cap, strictly decreasing, largest first
    if n == 0:
        yield ()
        return
    for first in range(min(n, cap), 0, -1):
        # the remaining parts are all below first, so they sum to at most first*(first-1)/2
        if first * (first + 1) // 2 < n:
            break
        for rest in _distinct(n - first, first - 1):
            yield (first,) + rest


def distinct_partitions(n: int) -> Iterator[DistinctPartition]:
    """Partitions of n into distinct parts, in lexicographically descending order."""
    if n < 1:
        raise ValueError("distinct_partitions needs n >= 1")
    for parts in _distinct(n, n):
        yield DistinctPartition(parts)


def partition_divisor_sum(n: int, m: int, c=1):
    """Signed sum over distinct partitions that reproduces sigma_{m,c}(n)."""
    if n < 1:
        raise ValueError("partition_divisor_sum needs n >= 1")
    if m < 0:
        raise ValueError("m must be nonnegative")
    c = as_scalar(c)
    # the inner sum only depends on (largest - smallest, smallest); cache it
    cache: dict = {}
    total = mpq(0)
    for p in distinct_partitions(n):
        key = (p.largest - p.smallest, p.smallest)
        inner = cache.get(key)
        if inner is None:
            gap, s = key
            inner = mpq(0)
            for j in range(1, s + 1):
                d = gap + j
                inner = inner + (c ** d) * (d ** m)
            cache[key] = inner
        total = total + inner if p.count % 2 else total - inner
    return total
