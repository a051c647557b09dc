import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ordlin.constructions import (
    LinearExtensionPair,
    common_order,
    realize_tree,
    sp_parallel,
    sp_series,
)
from ordlin.orders import intersect_total_orders
from ordlin.structures import ContractViolation, Structure, token_split


def random_head_function(rng, n_max, tree=False):
    n = int(rng.integers(1, n_max + 1))
    arcs = set()
    order = rng.permutation(n) + 1
    for i, x in enumerate(order):
        if i == 0:
            continue
        if tree or rng.random() < 0.8:
            arcs.add((int(x), int(order[int(rng.integers(0, i))])))
    return Structure(n=n, arcs=arcs)


def disjoint_pairs():
    def build(sizes):
        a_n, b_n = sizes
        a = list(range(1, a_n + 1))
        b = list(range(a_n + 1, a_n + b_n + 1))
        return LinearExtensionPair(tuple(a), tuple(a[::-1])), LinearExtensionPair(
            tuple(b), tuple(b)
        )

    return st.tuples(st.integers(1, 6), st.integers(1, 6)).map(build)


class TestCompositions:
    def test_parallel_singletons(self):
        a = LinearExtensionPair((1,), (1,))
        b = LinearExtensionPair((2,), (2,))
        out = sp_parallel(a, b)
        assert out.l1 == (1, 2) and out.l2 == (2, 1)
        assert common_order(out) == set()

    def test_series_singletons(self):
        a = LinearExtensionPair((1,), (1,))
        b = LinearExtensionPair((2,), (2,))
        out = sp_series(a, b)
        assert out.l1 == (1, 2) and out.l2 == (1, 2)
        assert common_order(out) == {(1, 2)}

    def test_series_chain_is_transitive(self):
        chain = LinearExtensionPair((1,), (1,))
        for v in (2, 3):
            chain = sp_series(chain, LinearExtensionPair((v,), (v,)))
        assert common_order(chain) == {(1, 2), (1, 3), (2, 3)}

    def test_overlap_rejected(self):
        a = LinearExtensionPair((1, 2), (2, 1))
        with pytest.raises(ContractViolation):
            sp_parallel(a, LinearExtensionPair((2,), (2,)))
        with pytest.raises(ContractViolation):
            sp_series(a, LinearExtensionPair((1,), (1,)))

    def test_parallel_of_two_stars_is_union(self):
        # stars over token-split columns of a 4-token structure
        s1 = LinearExtensionPair((1, 2, 7), (2, 1, 7))  # 1r,2r -> 3b
        s2 = LinearExtensionPair((3, 8), (3, 8))        # 3r -> 4b
        out = sp_parallel(s1, s2)
        assert common_order(out) == common_order(s1) | common_order(s2)

    @given(disjoint_pairs())
    @settings(max_examples=50)
    def test_parallel_edge_set_symmetric(self, pair):
        a, b = pair
        assert common_order(sp_parallel(a, b)) == common_order(sp_parallel(b, a))

    @given(disjoint_pairs())
    @settings(max_examples=50)
    def test_series_contains_parallel(self, pair):
        a, b = pair
        assert common_order(sp_parallel(a, b)) <= common_order(sp_series(a, b))

    @given(disjoint_pairs())
    @settings(max_examples=50)
    def test_compositions_preserve_permutations(self, pair):
        a, b = pair
        for out in (sp_parallel(a, b), sp_series(a, b)):
            assert sorted(out.l1) == sorted(out.l2)
            assert set(out.l1) == a.vertices | b.vertices

    def test_extension_pair_validation(self):
        with pytest.raises(ContractViolation):
            LinearExtensionPair((1, 1), (1, 1))
        with pytest.raises(ContractViolation):
            LinearExtensionPair((1,), (2,))


class TestRealizeTree:
    def test_single_arc(self):
        s = Structure(n=2, arcs={(1, 2)})
        r = realize_tree(s)
        assert intersect_total_orders(r, 2) == token_split(s)

    def test_star_has_no_cross_talk(self):
        s = Structure(n=3, arcs={(1, 3), (2, 3)})
        t = intersect_total_orders(realize_tree(s), 3)
        assert t.edges == frozenset({(1, 3), (2, 3)})
        assert (1, 2) not in t.edges and (2, 1) not in t.edges

    def test_rows_are_permutations(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            s = random_head_function(rng, 40)
            r = realize_tree(s)
            for row in range(2):
                assert sorted(r.ranks[row]) == list(range(1, 2 * s.n + 1))

    def test_two_heads_rejected_with_token_named(self):
        with pytest.raises(ContractViolation, match="token 1"):
            realize_tree(Structure(n=3, arcs={(1, 2), (1, 3)}))

    def test_self_loop_realized(self):
        s = Structure(n=2, arcs={(1, 1), (2, 1)})
        assert intersect_total_orders(realize_tree(s), 2) == token_split(s)

    def test_exact_on_random_trees_and_forests(self):
        rng = np.random.default_rng(11)
        for i in range(120):
            s = random_head_function(rng, 200, tree=(i % 2 == 0))
            assert intersect_total_orders(realize_tree(s), s.n) == token_split(s)

    def test_isolated_tokens(self):
        s = Structure(n=5, arcs=set())
        assert intersect_total_orders(realize_tree(s), 5).edges == frozenset()
