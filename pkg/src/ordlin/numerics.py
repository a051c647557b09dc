"""Stable log-domain arithmetic used by the aggregation and training code."""

from __future__ import annotations

import math

import numpy as np

NEG_INF = float("-inf")


def logsumexp(values, axis=None):
    """log(sum(exp(values))), safe for -inf entries and empty reductions."""
    a = np.asarray(values, dtype=np.float64)
    if a.size == 0:
        return NEG_INF if axis is None else np.full(_reduced_shape(a.shape, axis), NEG_INF)
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    out = np.squeeze(out, axis=axis) if axis is not None else out.reshape(())
    return float(out) if out.ndim == 0 else out


def _reduced_shape(shape, axis):
    return tuple(s for i, s in enumerate(shape) if i != (axis % len(shape)))


def logsubexp(a: float, b: float) -> float:
    """log(exp(a) - exp(b)) for b <= a; returns -inf when masses cancel."""
    if b == NEG_INF:
        return a
    d = a - b
    if d <= 0.0:
        return NEG_INF
    # log(e^a - e^b) = a + log(-expm1(-d)); expm1 stays accurate as d -> 0
    return a + math.log(-math.expm1(-d))
