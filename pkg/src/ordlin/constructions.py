"""Constructive two-order realizers for series-parallel posets.

Trees, forests, and in fact every head-function graph (out-degree <= 1)
split into disjoint "stars" around each head, and a disjoint union of
stars is a parallel composition of trivially two-dimensional factors.
These builders produce the two linear extensions explicitly, so the
two-dimensionality claims are checked by running the constructions
against the quadratic intersection oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .orders import Realizer
from .structures import ContractViolation, Structure


@dataclass(frozen=True)
class LinearExtensionPair:
    """Two permutations of one vertex set; their common order is the poset."""

    l1: tuple
    l2: tuple

    def __post_init__(self):
        object.__setattr__(self, "l1", tuple(self.l1))
        object.__setattr__(self, "l2", tuple(self.l2))
        if len(set(self.l1)) != len(self.l1) or len(set(self.l2)) != len(self.l2):
            raise ContractViolation("extensions must not repeat vertices")
        if set(self.l1) != set(self.l2):
            raise ContractViolation("extensions must cover the same vertex set")

    @property
    def vertices(self):
        return set(self.l1)


def common_order(pair: LinearExtensionPair) -> set:
    """Pairs (u, v) with u before v in both extensions: the realized order."""
    pos2 = {v: i for i, v in enumerate(pair.l2)}
    out = set()
    for i, u in enumerate(pair.l1):
        for v in pair.l1[i + 1 :]:
            if pos2[u] < pos2[v]:
                out.add((u, v))
    return out


def _check_disjoint(a: LinearExtensionPair, b: LinearExtensionPair):
    overlap = a.vertices & b.vertices
    if overlap:
        raise ContractViolation(f"operands share vertices: {sorted(overlap)!r}")


def sp_parallel(a: LinearExtensionPair, b: LinearExtensionPair) -> LinearExtensionPair:
    """Parallel composition: no cross pair agrees in both extensions."""
    _check_disjoint(a, b)
    return LinearExtensionPair(a.l1 + b.l1, b.l2 + a.l2)


def sp_series(a: LinearExtensionPair, b: LinearExtensionPair) -> LinearExtensionPair:
    """Series composition: everything in `a` precedes everything in `b`."""
    _check_disjoint(a, b)
    return LinearExtensionPair(a.l1 + b.l1, a.l2 + b.l2)


def singleton(v) -> LinearExtensionPair:
    return LinearExtensionPair((v,), (v,))


def _star(dependents_red, head_blue) -> LinearExtensionPair:
    # Minimals in opposite orders, shared maximal last: realizes exactly the
    # dependent->head edges and nothing between the dependents.
    deps = tuple(dependents_red)
    return LinearExtensionPair(deps + (head_blue,), deps[::-1] + (head_blue,))


def realize_tree(s: Structure) -> Realizer:
    """Two-row realizer whose intersection is exactly token_split(s).

    Works for any head-function structure: every token may have at most one
    outgoing arc.  Each head with its dependents forms one star factor; all
    remaining token-split vertices are singleton factors; factors compose in
    parallel.  Ranks are the 1-based positions in the two extensions.
    """
    heads = {}
    for x, y in s.arcs:
        if x in heads:
            raise ContractViolation(f"token {x} has more than one outgoing arc")
        heads[x] = y

    n = s.n
    red = lambda x: x          # token-split columns: red x -> x,
    blue = lambda y: n + y     # blue y -> n + y

    dependents = {}
    for x, y in sorted(heads.items()):
        dependents.setdefault(y, []).append(x)

    factors = []
    for y in sorted(dependents):
        factors.append(_star([red(x) for x in sorted(dependents[y])], blue(y)))
    for x in range(1, n + 1):
        if x not in heads:
            factors.append(singleton(red(x)))
    for y in range(1, n + 1):
        if y not in dependents:
            factors.append(singleton(blue(y)))

    pair = factors[0] if factors else LinearExtensionPair((), ())
    for f in factors[1:]:
        pair = sp_parallel(pair, f)

    ranks = np.empty((2, 2 * n), dtype=np.float64)
    for row, ext in enumerate((pair.l1, pair.l2)):
        for pos, v in enumerate(ext, start=1):
            ranks[row, v - 1] = pos
    return Realizer(k=2, ranks=ranks)
