"""Aggregation semirings: a commutative, associative combine with identity,
over which adding a real constant distributes.

Shipped instances:

* ``MIN``        plain minimum, elements are floats.
* ``MIN_ARGMIN`` minimum that remembers the achieving target vertex.
* ``MIN_TOP2``   the two best (value, vertex) entries with distinct vertices,
                 which lets decoders drop a forbidden target after the fact.
* ``LOGSUMEXP``  elements are ``-log(sum(exp(-v)))`` over the aggregated
                 values; combining pools the underlying exp(-v) mass.

``lift`` injects a raw score (with an optional payload vertex) into the
semiring, ``add_const`` shifts by a real constant so that
``lift(c + v) == add_const(c, lift(v))``, and the optional ``exclude``
removes one previously aggregated term, for semirings where that is
well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

INF = math.inf


@dataclass(frozen=True)
class Semiring:
    name: str
    combine: Callable[[Any, Any], Any]
    identity: Any
    lift: Callable[..., Any]
    add_const: Callable[[float, Any], Any]
    exclude: Optional[Callable[[Any, float, Any], Any]] = None


def _lift_value(v, payload=None):
    return float(v)


MIN = Semiring(
    name="min",
    combine=min,
    identity=INF,
    lift=_lift_value,
    add_const=lambda c, e: c + e,
)


def _argmin_combine(a, b):
    if a[0] < b[0]:
        return a
    if b[0] < a[0]:
        return b
    if a[1] is None:
        return b
    if b[1] is None:
        return a
    return a if a[1] <= b[1] else b


MIN_ARGMIN = Semiring(
    name="min-argmin",
    combine=_argmin_combine,
    identity=(INF, None),
    lift=lambda v, payload=None: (float(v), payload),
    add_const=lambda c, e: (c + e[0], e[1]),
)


def topk_merge(a, b, k):
    """Best k (value, vertex) slots of two slot tuples, vertices distinct."""
    items = sorted(s for s in a + b if s[1] is not None)
    out, seen = [], set()
    for v, arg in items:
        if arg in seen:
            continue
        seen.add(arg)
        out.append((v, arg))
        if len(out) == k:
            break
    out.extend([(INF, None)] * (k - len(out)))
    return tuple(out)


def _topk_lift(v, payload, k):
    if payload is None:
        raise ValueError("top-k semirings need a payload vertex id")
    return ((float(v), payload),) + ((INF, None),) * (k - 1)


def _topk_exclude(e, payload, k):
    kept = [s for s in e if s[1] is not None and s[1] != payload]
    kept.extend([(INF, None)] * (k - len(kept)))
    return tuple(kept[:k])


def min_topk(k: int) -> Semiring:
    """Minimum tracking the k best distinct target vertices."""
    return Semiring(
        name=f"min-top{k}",
        combine=lambda a, b: topk_merge(a, b, k),
        identity=((INF, None),) * k,
        lift=lambda v, payload=None: _topk_lift(v, payload, k),
        add_const=lambda c, e: tuple(
            (c + v, arg) if arg is not None else (INF, None) for v, arg in e),
        exclude=lambda e, value, payload: _topk_exclude(e, payload, k),
    )


MIN_TOP2 = min_topk(2)


def _lse_combine(a, b):
    # Pools exp(-a) + exp(-b), staying in the -log mass domain.
    return -np.logaddexp(-a, -b)


def _lse_exclude(e, value, payload=None):
    d = value - e
    if d <= 0.0:
        return INF
    return e - math.log(-math.expm1(-d))


LOGSUMEXP = Semiring(
    name="logsumexp",
    combine=_lse_combine,
    identity=INF,
    lift=_lift_value,
    add_const=lambda c, e: c + e,
    exclude=_lse_exclude,
)

SEMIRINGS = {s.name: s for s in (MIN, MIN_ARGMIN, MIN_TOP2, LOGSUMEXP)}
