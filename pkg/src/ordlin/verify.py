"""Randomized property suites behind ``ordlin verify``.

Each suite returns (ok, detail); the CLI prints one line per suite and
reports overall success.  These are the same oracles the test suite uses,
packaged for quick standalone runs at configurable sizes.
"""

from __future__ import annotations

from typing import Callable, List, Tuple

import numpy as np

from .aggregation import aggregate_fast_k2, aggregate_naive, argmin_heads
from .constructions import realize_tree
from .orders import Realizer, intersect_total_orders, pairwise_psi, psi_matrix
from .semirings import LOGSUMEXP, MIN, MIN_ARGMIN
from .structures import (
    Structure,
    check_order_axioms,
    recover_structure,
    structure_from_text,
    structure_to_text,
    token_split,
)


def random_digraph(rng, n_max: int) -> Structure:
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(0, 2 * n + 1))
    arcs = {(int(rng.integers(1, n + 1)), int(rng.integers(1, n + 1))) for _ in range(m)}
    return Structure(n=n, arcs=arcs)


def random_head_function(rng, n_max: int, tree: bool = False) -> Structure:
    """Random forest (each token at most one head) or single-rooted tree."""
    n = int(rng.integers(1, n_max + 1))
    arcs = set()
    order = rng.permutation(n) + 1
    for i, x in enumerate(order):
        if i == 0:
            continue  # first vertex is a root
        if tree or rng.random() < 0.85:
            head = int(order[int(rng.integers(0, i))])
            arcs.add((int(x), head))
    return Structure(n=n, arcs=arcs)


def suite_roundtrip(rng, n: int, trials: int) -> Tuple[bool, str]:
    for _ in range(trials):
        s = random_digraph(rng, min(n, 50))
        if recover_structure(token_split(s)) != Structure(n=s.n, arcs=s.arcs):
            return False, f"round trip failed on {s}"
    return True, f"{trials} digraphs round-tripped"


def suite_axioms(rng, n: int, trials: int) -> Tuple[bool, str]:
    for _ in range(trials):
        s = random_digraph(rng, min(n, 50))
        nv, rel = token_split(s).as_relation()
        if not check_order_axioms(nv, rel).all_hold:
            return False, f"axioms failed on {s}"
    return True, f"{trials} token-split relations satisfy all order axioms"


def suite_psi_asymmetry(rng, n: int, trials: int) -> Tuple[bool, str]:
    for _ in range(trials):
        fx, fy = rng.normal(size=2), rng.normal(size=2)
        if pairwise_psi(fx, fy) < 0 and not pairwise_psi(fy, fx) > 0:
            return False, f"asymmetry failed on {fx}, {fy}"
    return True, f"{trials} random pairs asymmetric"


def suite_realize_tree(rng, n: int, trials: int) -> Tuple[bool, str]:
    for t in range(trials):
        s = random_head_function(rng, min(n, 200), tree=(t % 2 == 0))
        if intersect_total_orders(realize_tree(s), s.n) != token_split(s):
            return False, f"intersection mismatch on {s}"
    return True, f"{trials} head-function structures realized exactly"


def suite_fast_vs_naive(rng, n: int, trials: int) -> Tuple[bool, str]:
    for _ in range(trials):
        m = int(rng.integers(1, n + 1))
        red, blue = rng.normal(size=(2, m)), rng.normal(size=(2, m))
        for ring, tol in ((MIN, 0.0), (MIN_ARGMIN, 0.0), (LOGSUMEXP, 1e-9)):
            a = aggregate_naive(red, blue, ring)
            b = aggregate_fast_k2(red, blue, ring)
            if tol == 0.0:
                ok = list(a.per_source) == list(b.per_source) if ring is MIN_ARGMIN \
                    else np.array_equal(np.asarray(a.per_source), np.asarray(b.per_source))
            else:
                pa, pb = np.asarray(a.per_source), np.asarray(b.per_source)
                ok = np.all(np.abs(pa - pb) <= tol * np.maximum(1.0, np.abs(pa)))
            if not ok:
                return False, f"{ring.name} disagreement at m={m}"
    return True, f"{trials} instances agree across min/min-argmin/logsumexp"


def suite_decode(rng, n: int, trials: int) -> Tuple[bool, str]:
    for _ in range(trials):
        m = int(rng.integers(2, max(3, n // 4)))
        r = Realizer(k=2, ranks=rng.normal(size=(2, 2 * m)))
        fast = argmin_heads(r, m, forbid_self=True)
        psi = psi_matrix(r.red_ranks(), r.blue_ranks()).copy()
        np.fill_diagonal(psi, np.inf)
        for x in range(m):
            want = int(np.argmin(psi[x])) + 1
            if fast[x][0] != want:
                return False, f"decode mismatch at m={m}, x={x}"
    return True, f"{trials} realizers decoded identically to brute force"


SUITES: List[Tuple[str, Callable]] = [
    ("token-split-roundtrip", suite_roundtrip),
    ("order-axioms", suite_axioms),
    ("psi-asymmetry", suite_psi_asymmetry),
    ("realize-tree-exact", suite_realize_tree),
    ("fast-vs-naive-aggregation", suite_fast_vs_naive),
    ("greedy-decode-oracle", suite_decode),
]


def run_suites(n: int, trials: int, seed: int = 0, emit=print) -> bool:
    ok_all = True
    for name, fn in SUITES:
        rng = np.random.default_rng(seed)
        ok, detail = fn(rng, n, trials)
        emit(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        ok_all &= ok
    return ok_all
