"""Microbenchmark comparing the sorted-sweep aggregation against the
quadratic baseline, with machine-independent doubling-ratio assertions.

Every timed row is value-checked first: the two paths must agree on the
inputs before either timing is recorded.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from statistics import median
from typing import List, Optional

import numpy as np

from .aggregation import aggregate_fast_k2, aggregate_naive
from .semirings import SEMIRINGS
from .structures import ContractViolation

#: doubling-ratio gates applied to sizes >= this
ASSERT_MIN_N = 4096
FAST_DOUBLING_MAX = 2.6
NAIVE_DOUBLING_MIN = 3.2

_MIN_TIMING_NS = 2_000_000  # below this, repeat the call and average


class ScalingAssertion(AssertionError):
    """A measured doubling ratio violated the expected complexity regime."""


@dataclass
class BenchRow:
    n: int
    fast_ns: int
    naive_ns: int
    semiring: str
    seed: int
    input_digest: str


@dataclass
class BenchReport:
    rows: List[BenchRow]
    fast_doubling: List[float] = field(default_factory=list)
    naive_doubling: List[float] = field(default_factory=list)
    naive_over_fast: dict = field(default_factory=dict)

    def __post_init__(self):
        ns = [r.n for r in self.rows]
        if ns != sorted(set(ns)):
            raise ContractViolation("bench rows must have strictly increasing n")
        if any(r.fast_ns <= 0 or r.naive_ns <= 0 for r in self.rows):
            raise ContractViolation("timings must be positive")

    def to_json(self) -> str:
        return json.dumps({
            "rows": [asdict(r) for r in self.rows],
            "fast_doubling": self.fast_doubling,
            "naive_doubling": self.naive_doubling,
            "naive_over_fast": self.naive_over_fast,
        }, indent=2, sort_keys=True)

    def to_tsv(self) -> str:
        lines = ["n\tfast_ns\tnaive_ns\tsemiring\tseed\tinput_digest"]
        for r in self.rows:
            lines.append(f"{r.n}\t{r.fast_ns}\t{r.naive_ns}\t{r.semiring}\t{r.seed}"
                         f"\t{r.input_digest}")
        return "\n".join(lines) + "\n"


def _time_call(fn, trials: int) -> int:
    """Median wall time in ns; short calls are repeated inside the clock."""
    times = []
    for _ in range(max(1, trials)):
        reps = 1
        while True:
            t0 = time.perf_counter_ns()
            for _ in range(reps):
                fn()
            elapsed = time.perf_counter_ns() - t0
            if elapsed >= _MIN_TIMING_NS or reps >= 4096:
                times.append(elapsed / reps)
                break
            reps *= 4
    return int(median(times))


def _results_agree(a, b, semiring_name: str) -> bool:
    pa, pb = a.per_source, b.per_source
    if semiring_name == "logsumexp":
        pa, pb = np.asarray(pa, float), np.asarray(pb, float)
        with np.errstate(invalid="ignore"):
            diff = np.abs(pa - pb)
        diff[np.isinf(pa) & np.isinf(pb) & (np.sign(pa) == np.sign(pb))] = 0.0
        return bool(np.all(diff <= 1e-9 * np.maximum(1.0, np.abs(pb))))
    if semiring_name == "min":
        return bool(np.array_equal(np.asarray(pa, float), np.asarray(pb, float))) \
            and a.total == b.total
    return list(pa) == list(pb) and a.total == b.total


def bench_aggregation(sizes: List[int], trials: int = 3, semiring: str = "min",
                      seed: int = 0, enforce: bool = True,
                      exclude_diagonal: bool = False) -> BenchReport:
    """Time both aggregation paths over random ranks at each size.

    Asserts, for sizes >= 4096, that the fast path's median doubling ratio
    stays <= 2.6 and the naive path's >= 3.2 (set `enforce=False` to only
    record them).
    """
    if any(n < 64 for n in sizes):
        raise ContractViolation("bench sizes start at 64")
    ring = SEMIRINGS[semiring]
    rows = []
    for n in sizes:
        rng = np.random.default_rng(seed + n)
        red = rng.normal(size=(2, n))
        blue = rng.normal(size=(2, n))
        digest = hashlib.sha256(red.tobytes() + blue.tobytes()).hexdigest()[:16]
        fast_res = aggregate_fast_k2(red, blue, ring, exclude_diagonal)
        naive_res = aggregate_naive(red, blue, ring, exclude_diagonal)
        if not _results_agree(naive_res, fast_res, semiring):
            raise ContractViolation(f"fast/naive disagree at n={n}; refusing to time")
        fast_ns = _time_call(lambda: aggregate_fast_k2(red, blue, ring, exclude_diagonal),
                             trials)
        naive_ns = _time_call(lambda: aggregate_naive(red, blue, ring, exclude_diagonal),
                              trials)
        rows.append(BenchRow(n=n, fast_ns=fast_ns, naive_ns=naive_ns,
                             semiring=semiring, seed=seed, input_digest=digest))
    report = BenchReport(rows=rows)
    for prev, cur in zip(rows, rows[1:]):
        if cur.n == 2 * prev.n:
            report.fast_doubling.append(cur.fast_ns / prev.fast_ns)
            report.naive_doubling.append(cur.naive_ns / prev.naive_ns)
    for r in rows:
        report.naive_over_fast[str(r.n)] = r.naive_ns / r.fast_ns
    if enforce:
        _enforce(report)
    return report


def _enforce(report: BenchReport):
    gated = [(prev, cur) for prev, cur in zip(report.rows, report.rows[1:])
             if cur.n == 2 * prev.n and prev.n >= ASSERT_MIN_N]
    if not gated:
        return
    fast = median(cur.fast_ns / prev.fast_ns for prev, cur in gated)
    naive = median(cur.naive_ns / prev.naive_ns for prev, cur in gated)
    if fast > FAST_DOUBLING_MAX:
        raise ScalingAssertion(f"fast doubling ratio {fast:.2f} > {FAST_DOUBLING_MAX}")
    if naive < NAIVE_DOUBLING_MIN:
        raise ScalingAssertion(f"naive doubling ratio {naive:.2f} < {NAIVE_DOUBLING_MIN}")
