"""Rank-valued realizers: K rows of real ranks inducing K total orders.

Each row of a realizer maps the 2n token-split vertices to reals; sorting a
row gives one total order.  The encoded partial order keeps exactly the
red->blue pairs that are ordered the same way in every row, which the
pair-wise score ``pairwise_psi`` expresses as "negative iff related".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .structures import ContractViolation, TokenSplitStructure

#: Tie rule: effective rank of a vertex is the pair (rank value, column index),
#: compared lexicographically.  Red columns 1..n sort before blue columns
#: n+1..2n, so equal-rank ties resolve red-before-blue deterministically.
TIE_BREAK_RANK_THEN_COLUMN = "rank-then-column"


@dataclass(frozen=True)
class Realizer:
    """K x 2n matrix of finite ranks over token-split vertices.

    Columns 1..n hold red copies, columns n+1..2n blue copies.
    """

    k: int
    ranks: np.ndarray
    tie_break: str = TIE_BREAK_RANK_THEN_COLUMN

    def __post_init__(self):
        ranks = np.asarray(self.ranks, dtype=np.float64)
        object.__setattr__(self, "ranks", ranks)
        if self.k < 1:
            raise ContractViolation(f"order dimension must be >= 1, got {self.k}")
        if ranks.ndim != 2 or ranks.shape[0] != self.k:
            raise ContractViolation(f"ranks must be {self.k} x m, got {ranks.shape}")
        if ranks.shape[1] % 2 != 0:
            raise ContractViolation("rank matrix needs an even column count (red + blue)")
        if not np.all(np.isfinite(ranks)):
            raise ContractViolation("ranks must be finite")
        if self.tie_break != TIE_BREAK_RANK_THEN_COLUMN:
            raise ContractViolation(f"unknown tie-break rule {self.tie_break!r}")

    @property
    def n_tokens(self) -> int:
        return self.ranks.shape[1] // 2

    def red_ranks(self) -> np.ndarray:
        """K x n view of the red-copy columns."""
        return self.ranks[:, : self.n_tokens]

    def blue_ranks(self) -> np.ndarray:
        """K x n view of the blue-copy columns."""
        return self.ranks[:, self.n_tokens :]

    def row_order(self, row: int) -> np.ndarray:
        """Columns of row `row` sorted by effective rank; always a strict order."""
        m = self.ranks.shape[1]
        return np.lexsort((np.arange(m), self.ranks[row]))


def pairwise_psi(fx, fy) -> float:
    """Largest coordinate-wise rank difference between two vertices.

    The relation x before y holds exactly when the result is negative,
    i.e. when x ranks strictly below y in every row.
    """
    fx = np.asarray(fx, dtype=np.float64)
    fy = np.asarray(fy, dtype=np.float64)
    if fx.shape != fy.shape or fx.ndim != 1 or fx.size < 1:
        raise ContractViolation(f"rank vectors must match, got {fx.shape} vs {fy.shape}")
    return float(np.max(fx - fy))


def psi_matrix(red_ranks: np.ndarray, blue_ranks: np.ndarray) -> np.ndarray:
    """All-pairs psi: out[x, y] = max_k(red[k, x] - blue[k, y])."""
    red_ranks = np.asarray(red_ranks, dtype=np.float64)
    blue_ranks = np.asarray(blue_ranks, dtype=np.float64)
    if red_ranks.shape[0] != blue_ranks.shape[0]:
        raise ContractViolation("red and blue rank matrices need the same row count")
    return (red_ranks[:, :, None] - blue_ranks[:, None, :]).max(axis=0)


def intersect_total_orders(r: Realizer, n: int) -> TokenSplitStructure:
    """Edges surviving in all K total orders, by direct quadratic enumeration.

    Reference implementation; the fast paths in `aggregation` are checked
    against it.
    """
    if r.ranks.shape[1] != 2 * n:
        raise ContractViolation(f"realizer has {r.ranks.shape[1]} columns, expected {2 * n}")
    psi = psi_matrix(r.red_ranks(), r.blue_ranks())
    xs, ys = np.nonzero(psi < 0.0)
    edges = frozenset((int(x) + 1, int(y) + 1) for x, y in zip(xs, ys))
    return TokenSplitStructure(n=n, edges=edges)
