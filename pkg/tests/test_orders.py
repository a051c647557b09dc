import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ordlin.orders import Realizer, intersect_total_orders, pairwise_psi, psi_matrix
from ordlin.structures import ContractViolation

finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


class TestPairwisePsi:
    def test_example(self):
        assert pairwise_psi((0.1, 0.3), (0.5, 0.2)) == pytest.approx(0.1)

    def test_identical_vectors_give_zero(self):
        assert pairwise_psi((0.4, -2.0, 1.0), (0.4, -2.0, 1.0)) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ContractViolation):
            pairwise_psi((0.0, 1.0), (0.0,))

    def test_sign_decides_relation(self):
        # negative iff strictly below in every coordinate
        assert pairwise_psi((0.0, 0.0), (1.0, 2.0)) < 0
        assert pairwise_psi((0.0, 3.0), (1.0, 2.0)) > 0

    @given(st.lists(finite, min_size=1, max_size=6))
    @settings(max_examples=200)
    def test_antisymmetric_in_sign(self, fx):
        rng = np.random.default_rng(abs(hash(tuple(fx))) % 2**32)
        fy = rng.normal(size=len(fx))
        if pairwise_psi(fx, fy) < 0:
            assert pairwise_psi(fy, fx) > 0


class TestRealizer:
    def test_rejects_nonfinite(self):
        with pytest.raises(ContractViolation):
            Realizer(k=1, ranks=np.array([[0.0, np.inf]]))

    def test_rejects_odd_columns(self):
        with pytest.raises(ContractViolation):
            Realizer(k=1, ranks=np.zeros((1, 3)))

    def test_rejects_bad_dimension(self):
        with pytest.raises(ContractViolation):
            Realizer(k=0, ranks=np.zeros((0, 2)))

    def test_views(self):
        r = Realizer(k=2, ranks=np.arange(8.0).reshape(2, 4))
        assert r.n_tokens == 2
        assert np.array_equal(r.red_ranks(), [[0.0, 1.0], [4.0, 5.0]])
        assert np.array_equal(r.blue_ranks(), [[2.0, 3.0], [6.0, 7.0]])

    def test_row_order_breaks_ties_by_column(self):
        r = Realizer(k=1, ranks=np.array([[1.0, 1.0, 0.0, 1.0]]))
        assert list(r.row_order(0)) == [2, 0, 1, 3]


class TestIntersect:
    def test_single_pair_k1(self):
        r = Realizer(k=1, ranks=np.array([[0.0, 1.0]]))
        assert intersect_total_orders(r, 1).edges == frozenset({(1, 1)})

    def test_two_token_example(self):
        red = np.array([[0.0, 5.0], [0.0, 5.0]])
        blue = np.array([[1.0, 6.0], [1.0, 6.0]])
        r = Realizer(k=2, ranks=np.hstack([red, blue]))
        assert intersect_total_orders(r, 2).edges == frozenset({(1, 1), (1, 2), (2, 2)})

    def test_column_count_checked(self):
        r = Realizer(k=1, ranks=np.zeros((1, 4)))
        with pytest.raises(ContractViolation):
            intersect_total_orders(r, 3)

    def test_k1_matches_direct_comparison(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(1, 30))
            ranks = rng.normal(size=(1, 2 * n))
            r = Realizer(k=1, ranks=ranks)
            got = intersect_total_orders(r, n).edges
            want = {
                (x + 1, y + 1)
                for x in range(n)
                for y in range(n)
                if ranks[0, x] < ranks[0, n + y]
            }
            assert got == frozenset(want)

    def test_zero_psi_is_not_an_edge(self):
        r = Realizer(k=2, ranks=np.zeros((2, 4)))
        assert intersect_total_orders(r, 2).edges == frozenset()


class TestPsiMatrix:
    def test_matches_scalar(self):
        rng = np.random.default_rng(1)
        red, blue = rng.normal(size=(2, 5)), rng.normal(size=(2, 5))
        mat = psi_matrix(red, blue)
        for x in range(5):
            for y in range(5):
                assert mat[x, y] == pairwise_psi(red[:, x], blue[:, y])
