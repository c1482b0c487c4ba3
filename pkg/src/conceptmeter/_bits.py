"""Helpers for Python ints used as bitsets over dense ids."""

from typing import Iterable, Iterator


def iter_bits(x: int) -> Iterator[int]:
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def to_mask(ids: Iterable[int]) -> int:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


def to_set(x: int) -> frozenset:
    return frozenset(iter_bits(x))


def popcount(x: int) -> int:
    return x.bit_count()


def is_subset(a: int, b: int) -> bool:
    return a & ~b == 0
