"""Semiring aggregation of the pair-wise score over all red x blue pairs.

``aggregate_naive`` enumerates every pair and is the oracle for everything
else.  ``aggregate_fast_k2`` exploits that for two rank rows the pair score
``max(f1(x)-f1(y), f2(x)-f2(y))`` collapses to a single row's difference
once vertices are sorted by ``f1 - f2``: every target at or below the
source's sort key contributes through row 1, every strictly greater target
through row 2.  Two prefix sweeps over the sorted union of red and blue
vertices therefore aggregate all n^2 pairs in O(n log n).

Sorting ties put blue targets before red sources on the forward sweep
(equal-key targets belong to the row-1 side) and, by reversing the same
order, red sources before blue targets on the backward sweep.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, List

import numpy as np

from .numerics import NEG_INF, logsubexp, logsumexp
from .orders import Realizer, psi_matrix
from .semirings import INF, MIN_ARGMIN, MIN_TOP2, Semiring, min_topk
from .structures import ContractViolation


class UnsupportedDimension(ContractViolation):
    """Raised when a fast path only defined for K=2 sees another K."""


@dataclass
class AggregationResult:
    """Per-source aggregates plus their combination over all sources."""

    total: object
    per_source: list


def _validated(red_ranks, blue_ranks):
    red = np.asarray(red_ranks, dtype=np.float64)
    blue = np.asarray(blue_ranks, dtype=np.float64)
    if red.ndim != 2 or red.shape != blue.shape:
        raise ContractViolation(
            f"rank matrices must share one K x n shape, got {red.shape} vs {blue.shape}")
    if red.shape[0] < 1:
        raise ContractViolation("need at least one rank row")
    if not (np.all(np.isfinite(red)) and np.all(np.isfinite(blue))):
        raise ContractViolation("ranks must be finite")
    return red, blue


def diagonal_psi(red: np.ndarray, blue: np.ndarray) -> np.ndarray:
    """Pair score of each token's red copy against its own blue copy."""
    return np.max(red - blue, axis=0)


# ---------------------------------------------------------------------------
# Quadratic oracle


def aggregate_naive(red_ranks, blue_ranks, semiring: Semiring,
                    exclude_diagonal: bool = False) -> AggregationResult:
    """Reduce psi over every (red, blue) pair by direct enumeration.

    Works for any K and any semiring; the shipped semirings use vectorized
    reductions, everything else falls back to the scalar ops.
    """
    red, blue = _validated(red_ranks, blue_ranks)
    n = red.shape[1]
    if n == 0:
        return AggregationResult(total=semiring.identity, per_source=[])
    if semiring.name == "min":
        per = _rowreduce_chunked(red, blue, exclude_diagonal, "min")
        return AggregationResult(total=float(per.min()), per_source=per)
    if semiring.name == "logsumexp":
        lm = _rowreduce_chunked(red, blue, exclude_diagonal, "lse")
        per = -lm
        return AggregationResult(total=float(-logsumexp(lm)), per_source=per)
    psi = psi_matrix(red, blue)
    if semiring.name == "min-argmin":
        vals = _mask(psi, exclude_diagonal, INF)
        best = vals.argmin(axis=1)
        per = [(float(vals[x, b]), int(b) + 1) if np.isfinite(vals[x, b]) else (INF, None)
               for x, b in enumerate(best)]
        return AggregationResult(total=reduce(semiring.combine, per), per_source=per)
    if semiring.name.startswith("min-top"):
        k = len(semiring.identity)
        vals = _mask(psi, exclude_diagonal, INF)
        cols = np.argsort(vals, axis=1, kind="stable")[:, :k]
        per = []
        for x in range(n):
            slots = tuple(
                (float(vals[x, c]), int(c) + 1) if np.isfinite(vals[x, c]) else (INF, None)
                for c in cols[x]
            )
            slots += ((INF, None),) * (k - len(slots))
            per.append(slots)
        return AggregationResult(total=reduce(semiring.combine, per), per_source=per)
    return _naive_generic(psi, semiring, exclude_diagonal)


def _mask(vals: np.ndarray, exclude_diagonal: bool, fill) -> np.ndarray:
    if not exclude_diagonal:
        return vals
    out = vals.copy()
    np.fill_diagonal(out, fill)
    return out


def _rowreduce_chunked(red, blue, exclude_diagonal: bool, kind: str) -> np.ndarray:
    """Per-source min / log-mass over all pairs, in source blocks so the
    pair matrix never exceeds ~tens of MB at benchmark sizes."""
    k, n = red.shape
    block = max(1, int(8_000_000 / max(1, n)))
    out = np.empty(n)
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        psi = red[0, lo:hi, None] - blue[0, None, :]
        for row in range(1, k):
            np.maximum(psi, red[row, lo:hi, None] - blue[row, None, :], out=psi)
        if exclude_diagonal:
            idx = np.arange(lo, hi)
            psi[idx - lo, idx] = INF
        if kind == "min":
            out[lo:hi] = psi.min(axis=1)
        else:
            np.negative(psi, out=psi)
            out[lo:hi] = logsumexp(psi, axis=1)
    return out


def _naive_generic(psi: np.ndarray, semiring: Semiring, exclude_diagonal: bool) -> AggregationResult:
    n = psi.shape[0]
    per = []
    for x in range(n):
        acc = semiring.identity
        for y in range(n):
            if exclude_diagonal and x == y:
                continue
            acc = semiring.combine(acc, semiring.lift(float(psi[x, y]), y + 1))
        per.append(acc)
    return AggregationResult(total=reduce(semiring.combine, per), per_source=per)


# ---------------------------------------------------------------------------
# Sorted-sweep fast path for K = 2


def _stream_order(red: np.ndarray, blue: np.ndarray) -> np.ndarray:
    """Union of blue (ids 0..n-1) and red (ids n..2n-1) vertices sorted by
    (f1 - f2, blue-before-red, token index)."""
    n = red.shape[1]
    key = np.concatenate([blue[0] - blue[1], red[0] - red[1]])
    color = np.concatenate([np.zeros(n, np.int8), np.ones(n, np.int8)])
    idx = np.tile(np.arange(n), 2)
    return np.lexsort((idx, color, key))


def _require_k2(red: np.ndarray):
    if red.shape[0] != 2:
        raise UnsupportedDimension(
            f"fast aggregation is defined for K=2 only (got K={red.shape[0]}); "
            "use aggregate_naive for other dimensions")


def aggregate_fast_k2(red_ranks, blue_ranks, semiring: Semiring,
                      exclude_diagonal: bool = False) -> AggregationResult:
    """Same contract as aggregate_naive, restricted to K=2, in O(n log n).

    Diagonal exclusion keeps extra per-source state instead of re-sweeping:
    min-family semirings track one spare (value, vertex) slot and drop the
    self target at read-out; the log-sum-exp semiring subtracts the self
    pair's mass, which loses precision only if that pair carries essentially
    all of the mass.  Other semirings must provide an ``exclude`` op.
    """
    red, blue = _validated(red_ranks, blue_ranks)
    _require_k2(red)
    n = red.shape[1]
    if n == 0:
        return AggregationResult(total=semiring.identity, per_source=[])

    if semiring.name == "min":
        if not exclude_diagonal:
            per = np.minimum(*_sweep_min(red, blue))
            return AggregationResult(total=float(per.min()), per_source=per)
        tops = _sweep_topk(red, blue, k=2, drop_self=True)
        per = np.array([slots[0][0] for slots in tops])
        return AggregationResult(total=float(per.min()), per_source=per)

    if semiring.name == "logsumexp":
        lm = np.logaddexp(*_sweep_lse(red, blue))
        if exclude_diagonal:
            lm = _drop_self_mass(lm, diagonal_psi(red, blue))
        per = -lm
        return AggregationResult(total=float(-logsumexp(lm)), per_source=per)

    if semiring.name == "min-argmin":
        k = 2 if exclude_diagonal else 1
        tops = _sweep_topk(red, blue, k=k, drop_self=exclude_diagonal)
        per = [slots[0] for slots in tops]
        return AggregationResult(total=reduce(semiring.combine, per), per_source=per)

    if semiring.name.startswith("min-top"):
        k = len(semiring.identity)
        tops = _sweep_topk(red, blue, k=k + 1 if exclude_diagonal else k,
                           drop_self=exclude_diagonal)
        per = [slots[:k] if len(slots) > k else slots + ((INF, None),) * (k - len(slots))
               for slots in tops]
        return AggregationResult(total=reduce(semiring.combine, per), per_source=per)

    per = _fast_generic(red, blue, semiring)
    if exclude_diagonal:
        if semiring.exclude is None:
            raise ContractViolation(
                f"semiring {semiring.name!r} defines no exclude op; aggregate it "
                "without the diagonal via aggregate_naive")
        self_psi = diagonal_psi(red, blue)
        per = [semiring.exclude(e, float(self_psi[x]), x + 1) for x, e in enumerate(per)]
    return AggregationResult(total=reduce(semiring.combine, per), per_source=per)


def _sweep_min(red, blue):
    n = red.shape[1]
    order = _stream_order(red, blue)
    sides = []
    for row, seq in ((0, order), (1, order[::-1])):
        is_blue = seq < n
        contrib = np.full(2 * n, INF)
        contrib[is_blue] = -blue[row][seq[is_blue]]
        acc = np.minimum.accumulate(contrib)
        xs = seq[~is_blue] - n
        side = np.empty(n)
        side[xs] = red[row][xs] + acc[~is_blue]
        sides.append(side)
    return sides


def _sweep_lse(red, blue):
    """Per-source log mass of exp(-psi) restricted to each row's side."""
    n = red.shape[1]
    order = _stream_order(red, blue)
    sides = []
    for row, seq in ((0, order), (1, order[::-1])):
        is_blue = seq < n
        contrib = np.full(2 * n, NEG_INF)
        contrib[is_blue] = blue[row][seq[is_blue]]
        acc = np.logaddexp.accumulate(contrib)
        xs = seq[~is_blue] - n
        side = np.empty(n)
        side[xs] = acc[~is_blue] - red[row][xs]
        sides.append(side)
    return sides


def _drop_self_mass(lm: np.ndarray, self_psi: np.ndarray) -> np.ndarray:
    if lm.size == 1:
        return np.array([NEG_INF])
    out = np.empty_like(lm)
    for x in range(lm.size):
        out[x] = logsubexp(lm[x], -self_psi[x])
    return out


def _sweep_topk(red, blue, k: int, drop_self: bool) -> List[tuple]:
    n = red.shape[1]
    order = _stream_order(red, blue)
    ring = min_topk(k)
    halves = []
    for row, seq in ((0, order), (1, order[::-1])):
        side = [None] * n
        acc = ring.identity
        for v in seq:
            if v < n:
                acc = ring.combine(acc, ring.lift(-blue[row][v], v + 1))
            else:
                side[v - n] = ring.add_const(red[row][v - n], acc)
        halves.append(side)
    merged = [ring.combine(a, b) for a, b in zip(*halves)]
    if drop_self:
        merged = [ring.exclude(e, 0.0, x + 1) for x, e in enumerate(merged)]
    return merged


def _fast_generic(red, blue, semiring: Semiring) -> list:
    n = red.shape[1]
    order = _stream_order(red, blue)
    halves = []
    for row, seq in ((0, order), (1, order[::-1])):
        side = [None] * n
        acc = semiring.identity
        for v in seq:
            if v < n:
                acc = semiring.combine(acc, semiring.lift(-blue[row][v], v + 1))
            else:
                side[v - n] = semiring.add_const(red[row][v - n], acc)
        halves.append(side)
    return [semiring.combine(a, b) for a, b in zip(*halves)]


# ---------------------------------------------------------------------------
# Decoding and training reductions


def argmin_heads(r: Realizer, n: int, forbid_self: bool = True) -> list:
    """Per red vertex: (best blue vertex, best psi value), smaller index wins ties.

    Returns (None, inf) when the candidate set is empty.
    """
    if r.n_tokens != n:
        raise ContractViolation(f"realizer covers {r.n_tokens} tokens, expected {n}")
    red, blue = r.red_ranks(), r.blue_ranks()
    if r.k == 2:
        res = aggregate_fast_k2(red, blue, MIN_TOP2, exclude_diagonal=forbid_self)
        best = [slots[0] for slots in res.per_source]
    else:
        res = aggregate_naive(red, blue, MIN_ARGMIN, exclude_diagonal=forbid_self)
        best = res.per_source
    return [(int(arg) if arg is not None else None, float(v)) for v, arg in best]


def logsumexp_offedge(red_ranks, blue_ranks, edges: Iterable[tuple],
                      floor_ratio: float = 1e-12) -> float:
    """log of the exp(-psi) mass over all (red, blue) pairs NOT in `edges`.

    Computed as a stable log-difference of the all-pairs mass (linear-time
    for K=2) and the O(|E|) edge mass.  If the edge mass reaches the total,
    the result is clamped to ``total + log(floor_ratio)`` and a
    RuntimeWarning is emitted.
    """
    red, blue = _validated(red_ranks, blue_ranks)
    n = red.shape[1]
    if red.shape[0] == 2:
        total = float(logsumexp(np.logaddexp(*_sweep_lse(red, blue))))
    else:
        total = float(logsumexp(-psi_matrix(red, blue)))
    edge_mass = _edge_mass(red, blue, edges, n)
    off = logsubexp(total, edge_mass)
    if off == NEG_INF:
        warnings.warn("edge mass reached the all-pairs mass; off-edge term clamped",
                      RuntimeWarning, stacklevel=2)
        return total + math.log(floor_ratio)
    return off


def _edge_mass(red, blue, edges, n) -> float:
    vals = []
    for x, y in edges:
        if not (1 <= x <= n and 1 <= y <= n):
            raise ContractViolation(f"edge ({x}, {y}) outside 1..{n}")
        vals.append(-float(np.max(red[:, x - 1] - blue[:, y - 1])))
    return logsumexp(np.array(vals)) if vals else NEG_INF
