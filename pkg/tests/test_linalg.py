from fractions import Fraction as F

from hypothesis import given
from hypothesis import strategies as st

import oracles
from ignorability_lab.linalg import bareiss_rank, float_null_vector, float_rank, null_vector, rref

matrices = st.integers(1, 4).flatmap(
    lambda r: st.integers(1, 4).flatmap(
        lambda c: st.lists(
            st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=4), min_size=c, max_size=c),
            min_size=r, max_size=r,
        )
    )
)


@given(matrices)
def test_bareiss_rank_matches_elimination(m):
    assert bareiss_rank(m) == oracles.rank(m)


@given(matrices)
def test_null_vector_is_in_kernel(m):
    v = null_vector(m)
    if oracles.rank(m) == len(m[0]):
        assert v is None
    else:
        assert v is not None and any(x != 0 for x in v)
        for row in m:
            assert sum(a * b for a, b in zip(row, v)) == 0


@given(matrices)
def test_float_rank_agrees_on_small_rationals(m):
    fm = [[float(x) for x in r] for r in m]
    assert float_rank(fm) == oracles.rank(m)
    v = float_null_vector(fm)
    if v is not None:
        for row in fm:
            assert abs(sum(a * b for a, b in zip(row, v))) < 1e-9


def test_rref_known():
    r, pivots = rref([[1, 2, 3], [2, 4, 7]])
    assert pivots == [0, 2]
    assert r[0] == [1, 2, 0] and r[1] == [0, 0, 1]


def test_single_row_witness():
    # hand computation: for (p1, p2) the kernel is spanned by (-p2/p1, 1)
    assert null_vector([[F(1, 2), F(1, 2)]]) == [-1, 1]
