import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from grover_entanglement.errors import InvalidArgumentError
from grover_entanglement.exactrank import exact_sign_rank, integer_rank

shapes = st.tuples(st.integers(1, 7), st.integers(1, 7))


@given(shapes.flatmap(lambda s: arrays(np.int64, s, elements=st.integers(-20, 20))))
@settings(max_examples=200)
def test_integer_rank_matches_fraction_elimination(m):
    assert integer_rank(m) == oracles.fraction_rank(m)


@given(shapes.flatmap(lambda s: arrays(np.int64, s, elements=st.sampled_from([-1, 1]))))
@settings(max_examples=200)
def test_sign_rank_matches_fraction_elimination(m):
    assert exact_sign_rank(m) == oracles.fraction_rank(m)
    assert exact_sign_rank(m.T) == exact_sign_rank(m)


def test_large_entries_stay_exact():
    # rank 2, but floating point cannot tell: rows differ by 1 in 10^30
    big = 10**30
    m = np.array([[big, big + 1], [big + 1, big + 2], [2 * big + 1, 2 * big + 3]], dtype=object)
    assert integer_rank(m) == 2


@pytest.mark.parametrize(
    "m, r",
    [
        ([[1, 1], [1, 1]], 1),
        ([[1, -1], [1, 1]], 2),
        ([[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]], 4),
        ([[1, 1, -1], [-1, -1, 1]], 1),
    ],
)
def test_frozen_sign_ranks(m, r):
    assert exact_sign_rank(m) == r


def test_rejects_non_sign_entries():
    with pytest.raises(InvalidArgumentError):
        exact_sign_rank([[1, 0], [1, 1]])
    with pytest.raises(InvalidArgumentError):
        exact_sign_rank([1, -1])


def test_empty():
    assert integer_rank(np.zeros((0, 3), dtype=np.int64)) == 0
