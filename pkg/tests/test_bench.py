import json

import pytest

from ordlin.bench import BenchReport, BenchRow, bench_aggregation
from ordlin.structures import ContractViolation

MASK = "<ns>"


def masked_schema(report_json: str):
    """Structure of the report with timing magnitudes replaced."""
    data = json.loads(report_json)
    for row in data["rows"]:
        row["fast_ns"] = MASK
        row["naive_ns"] = MASK
        row["input_digest"] = "<hex>"
    data["fast_doubling"] = [MASK] * len(data["fast_doubling"])
    data["naive_doubling"] = [MASK] * len(data["naive_doubling"])
    data["naive_over_fast"] = {k: MASK for k in data["naive_over_fast"]}
    return data


GOLDEN = {
    "fast_doubling": [MASK],
    "naive_doubling": [MASK],
    "naive_over_fast": {"64": MASK, "128": MASK},
    "rows": [
        {"fast_ns": MASK, "input_digest": "<hex>", "n": 64, "naive_ns": MASK,
         "seed": 3, "semiring": "min"},
        {"fast_ns": MASK, "input_digest": "<hex>", "n": 128, "naive_ns": MASK,
         "seed": 3, "semiring": "min"},
    ],
}


class TestBench:
    def test_single_size_smoke(self):
        report = bench_aggregation([64], trials=1, semiring="min", seed=0)
        assert len(report.rows) == 1
        row = report.rows[0]
        assert row.n == 64 and row.fast_ns > 0 and row.naive_ns > 0
        assert row.semiring == "min" and len(row.input_digest) == 16

    def test_json_schema_is_stable(self):
        report = bench_aggregation([64, 128], trials=1, semiring="min", seed=3)
        assert masked_schema(report.to_json()) == GOLDEN

    def test_tsv_has_header_and_rows(self):
        report = bench_aggregation([64], trials=1, semiring="logsumexp", seed=0)
        lines = report.to_tsv().strip().splitlines()
        assert lines[0].split("\t") == ["n", "fast_ns", "naive_ns", "semiring",
                                        "seed", "input_digest"]
        assert len(lines) == 2

    def test_same_seed_same_inputs(self):
        a = bench_aggregation([64], trials=1, semiring="min", seed=9)
        b = bench_aggregation([64], trials=1, semiring="min", seed=9)
        assert a.rows[0].input_digest == b.rows[0].input_digest

    def test_sizes_below_floor_rejected(self):
        with pytest.raises(ContractViolation):
            bench_aggregation([32], trials=1)

    def test_rows_must_increase(self):
        row = dict(fast_ns=1, naive_ns=1, semiring="min", seed=0, input_digest="x")
        with pytest.raises(ContractViolation):
            BenchReport(rows=[BenchRow(n=128, **row), BenchRow(n=64, **row)])

    def test_timings_must_be_positive(self):
        with pytest.raises(ContractViolation):
            BenchReport(rows=[BenchRow(n=64, fast_ns=0, naive_ns=1, semiring="min",
                                       seed=0, input_digest="x")])

    def test_small_sizes_skip_scaling_gates(self):
        # the gates only apply from 4096 up; tiny runs must not trip them
        bench_aggregation([64, 128], trials=1, semiring="min", seed=0, enforce=True)
