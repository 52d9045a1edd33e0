"""Admissible diagrams: perfect matchings of row-structured vertices with no intra-row edge.

Vertex (k, r) is the r-th variable of the k-th kernel; both indices are
1-based.  An edge always points from the vertex in the smaller row (upper)
to the vertex in the larger row (lower).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .errors import CapExceeded, OddVertexCount, UnsupportedParameter

ENUMERATION_CAP = 16
COUNT_CAP = 24

Vertex = tuple  # (row, col), 1-based


@dataclass(frozen=True)
class Diagram:
    row_sizes: tuple
    edges: tuple  # sorted tuple of (upper, lower) vertex pairs

    def __post_init__(self):
        object.__setattr__(self, "row_sizes", tuple(int(n) for n in self.row_sizes))
        object.__setattr__(self, "edges", tuple(sorted((tuple(u), tuple(v)) for u, v in self.edges)))
        self.validate()

    def validate(self) -> None:
        sizes = self.row_sizes
        used = []
        for u, v in self.edges:
            for k, r in (u, v):
                if not (1 <= k <= len(sizes) and 1 <= r <= sizes[k - 1]):
                    raise UnsupportedParameter(f"vertex {(k, r)} outside rows {sizes}")
            if not u[0] < v[0]:
                raise UnsupportedParameter(f"edge {u}-{v} does not go from an upper to a lower row")
            used += [u, v]
        if len(set(used)) != len(used):
            raise UnsupportedParameter("a vertex belongs to two edges")
        if len(used) != sum(sizes):
            raise UnsupportedParameter("diagram is not a perfect matching")

    @property
    def upper(self) -> tuple:
        return tuple(u for u, _ in self.edges)

    @property
    def lower(self) -> tuple:
        return tuple(v for _, v in self.edges)

    def to_json(self) -> list:
        return [[list(u), list(v)] for u, v in self.edges]


def _check_sizes(row_sizes, cap):
    sizes = tuple(int(n) for n in row_sizes)
    if any(n < 0 for n in sizes):
        raise UnsupportedParameter("row sizes must be nonnegative")
    total = sum(sizes)
    if total % 2:
        raise OddVertexCount(f"odd number of vertices {total}")
    if total > cap:
        raise CapExceeded(f"{total} vertices exceed the cap {cap}")
    return sizes


def enumerate_admissible(row_sizes, cap: int = ENUMERATION_CAP) -> Iterator[Diagram]:
    """All admissible diagrams, each once, in lexicographic order.

    The lowest unmatched vertex is paired with every later vertex of another
    row in increasing order, recursively.
    """
    sizes = _check_sizes(row_sizes, cap)
    verts = [(k + 1, r + 1) for k, n in enumerate(sizes) for r in range(n)]

    def rec(free: list, acc: list):
        if not free:
            yield Diagram(sizes, tuple(acc))
            return
        v = free[0]
        for i in range(1, len(free)):
            w = free[i]
            if w[0] == v[0]:
                continue
            acc.append((v, w))
            yield from rec(free[1:i] + free[i + 1:], acc)
            acc.pop()

    yield from rec(verts, [])


def count_streaming(row_sizes, cap: int = ENUMERATION_CAP) -> int:
    return sum(1 for _ in enumerate_admissible(row_sizes, cap))


@lru_cache(maxsize=None)
def _count_rec(sizes: tuple) -> int:
    # match one vertex of the smallest row (fewest branches) into any other row
    sizes = tuple(sorted((n for n in sizes if n), reverse=True))
    if not sizes:
        return 1
    if len(sizes) == 1:
        return 0
    i = len(sizes) - 1
    total = 0
    for j, nj in enumerate(sizes):
        if j == i:
            continue
        nxt = list(sizes)
        nxt[i] -= 1
        nxt[j] -= 1
        total += nj * _count_rec(tuple(nxt))
    return total


def count_recursive(row_sizes, cap: int = COUNT_CAP) -> int:
    """Row-merge recursion  count(n) = sum_{j != i} n_j count(n - e_i - e_j)."""
    try:
        sizes = _check_sizes(row_sizes, cap)
    except OddVertexCount:
        return 0
    return _count_rec(sizes)


def count_admissible(row_sizes, cap: int = COUNT_CAP) -> int:
    """|D(n_1, ..., n_m)|; zero when the vertex count is odd.

    Streams the enumeration when within :data:`ENUMERATION_CAP` and checks
    it against the recursion; beyond that only the recursion is used.
    """
    try:
        sizes = _check_sizes(row_sizes, cap)
    except OddVertexCount:
        return 0
    rec = _count_rec(sizes)
    if sum(sizes) <= 10:
        streamed = count_streaming(sizes)
        if streamed != rec:
            raise AssertionError(f"diagram counts disagree for {sizes}: {streamed} vs {rec}")
    return rec


def enumerate_constrained(p: int, m_p: int, cap: int = ENUMERATION_CAP) -> Iterator[Diagram]:
    """Diagrams on p rows of m_p vertices with every edge from the first p/2 rows to the last p/2.

    The m = p m_p / 2 upper vertices are matched to the lower ones by a
    permutation; permutations are taken in lexicographic order.
    """
    if p <= 0 or p % 2:
        raise OddVertexCount(f"p={p} must be a positive even integer")
    if m_p < 1:
        raise UnsupportedParameter("m_p must be positive")
    sizes = _check_sizes((m_p,) * p, cap)
    half = p // 2
    upper = [(k + 1, r + 1) for k in range(half) for r in range(m_p)]
    lower = [(k + 1, r + 1) for k in range(half, p) for r in range(m_p)]
    for perm in itertools.permutations(lower):
        yield Diagram(sizes, tuple(zip(upper, perm)))


def count_constrained(p: int, m_p: int) -> int:
    return math.factorial(p * m_p // 2)


def edge_factors(d: Diagram) -> list:
    """One (upper, lower) vertex pair per edge, in sorted order.

    Each pair indexes both the time and the space variables entering the
    covariance factor gamma(t_upper - t_lower) Lambda(x_upper - x_lower).
    """
    return [(u, v) for u, v in d.edges]


def flat_index(row_sizes) -> dict:
    """Map vertex (k, r) to its position in the concatenated variable list."""
    out, pos = {}, 0
    for k, n in enumerate(row_sizes):
        for r in range(n):
            out[(k + 1, r + 1)] = pos
            pos += 1
    return out
