import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homfib.modular import LAPLACE_MAX, _det_laplace, _det_prime_power, batch_det_mod, factorize
from oracles import cofactor_det


def test_factorize():
    assert factorize(8) == [(2, 3)]
    assert factorize(72) == [(2, 3), (3, 2)]
    assert factorize(2147483647) == [(2147483647, 1)]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 6), st.sampled_from([2, 4, 8, 9, 12, 25, 27, 72, 97, 1024, 65537, 2147483629]),
       st.integers(0, 2**32))
def test_batch_det_matches_exact(n, q, seed):
    rng = np.random.default_rng(seed)
    mats = rng.integers(-20, 21, size=(40, n, n))
    got = batch_det_mod(mats, q)
    want = [cofactor_det(m.tolist()) % q for m in mats]
    assert got.tolist() == want


@pytest.mark.parametrize("q", [8, 9, 2147483647])
def test_laplace_and_elimination_agree(q):
    rng = np.random.default_rng(7)
    p, e = (2, 3) if q == 8 else (3, 2) if q == 9 else (q, 1)
    for n in range(1, LAPLACE_MAX + 1):
        mats = rng.integers(0, q, size=(500, n, n))
        assert (_det_laplace(mats, q) == _det_prime_power(mats.copy(), p, e)).all()


def test_elimination_path_for_larger_matrices():
    rng = np.random.default_rng(3)
    mats = rng.integers(-3, 4, size=(30, 7, 7))
    for q in (8, 36, 2147483647):
        assert batch_det_mod(mats, q).tolist() == [cofactor_det(m.tolist()) % q for m in mats]


def test_singular_mod_prime_power():
    # determinant 4: zero mod 4, nonzero mod 8
    m = np.array([[[2, 0], [0, 2]]])
    assert batch_det_mod(m, 4).tolist() == [0]
    assert batch_det_mod(m, 8).tolist() == [4]


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        batch_det_mod(np.zeros((1, 2, 3)), 8)
    with pytest.raises(ValueError):
        batch_det_mod(np.zeros((1, 2, 2)), 2**31)
