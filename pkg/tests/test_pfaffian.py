import numpy as np
import pytest
from hypothesis import given, strategies as st

from ppsim.pfaffian import (
    NumericInputError,
    delete_modes,
    pfaffian,
    pfaffian_batch,
    pfaffian_bruteforce,
    pfaffian_masked,
)

from conftest import random_skew


def test_two_by_two():
    assert pfaffian([[0, 2.5 - 1j], [-2.5 + 1j, 0]]) == pytest.approx(2.5 - 1j)


def test_four_by_four_closed_form(rng):
    m = random_skew(rng, 4)
    want = m[0, 1] * m[2, 3] - m[0, 2] * m[1, 3] + m[0, 3] * m[1, 2]
    assert abs(pfaffian(m) - want) < 1e-13


def test_empty_is_one():
    assert pfaffian(np.zeros((0, 0))) == 1


def test_rejects_bad_input():
    with pytest.raises(NumericInputError):
        pfaffian([[0, np.nan], [np.nan, 0]])
    with pytest.raises(ValueError):
        pfaffian(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        pfaffian([[0, 1], [1, 0]])


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_matches_matching_sum(rng, n):
    for _ in range(5):
        m = random_skew(rng, n)
        assert abs(pfaffian(m) - pfaffian_bruteforce(m)) <= 1e-12 * max(1, abs(pfaffian(m)))


@pytest.mark.parametrize("n", [10, 40, 100])
def test_square_is_determinant(rng, n):
    m = random_skew(rng, n)
    pf = pfaffian(m)
    det = np.linalg.det(m)
    assert abs(pf**2 - det) <= 1e-8 * abs(det)


@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_permutation_covariance(half, seed):
    r = np.random.default_rng(seed)
    n = 2 * half
    m = random_skew(r, n)
    perm = r.permutation(n)
    P = np.eye(n)[perm]
    sign = np.linalg.det(P)
    ref = pfaffian_bruteforce(m) if n <= 8 else pfaffian(m)
    got = pfaffian(P @ m @ P.T)
    assert abs(got - sign * ref) <= 1e-10 * max(1, abs(got))


def test_singular_structure_gives_clean_zero():
    m = np.zeros((6, 6), dtype=complex)
    m[0, 1], m[1, 0] = 1, -1
    m[2, 3], m[3, 2] = 2, -2
    assert pfaffian(m) == 0


def test_delete_modes_basics(rng):
    m = random_skew(rng, 8)
    assert np.array_equal(delete_modes(m, []), m)
    assert pfaffian(delete_modes(m[:4, :4], [0, 1, 2, 3])) == 1
    assert np.array_equal(delete_modes(m, [0, 1, 2, 3]), m[4:, 4:])
    with pytest.raises(IndexError):
        delete_modes(m, [8])


@given(st.integers(0, 2**31 - 1))
def test_delete_modes_composes(seed):
    r = np.random.default_rng(seed)
    m = random_skew(r, 10)
    S = [1, 4]
    rest = [i for i in range(10) if i not in S]
    T_local = [0, 5]
    T = [rest[i] for i in T_local]
    assert np.array_equal(delete_modes(delete_modes(m, S), T_local), delete_modes(m, S + T))


def test_masked_and_batch_agree_with_materialised(rng):
    m = random_skew(rng, 12)
    keeps = np.array([[0, 1, 2, 3, 8, 9, 10, 11], [4, 5, 6, 7, 8, 9, 10, 11]])
    batch = pfaffian_batch(m, keeps)
    for keep, val in zip(keeps, batch):
        ref = pfaffian(m[np.ix_(keep, keep)])
        assert abs(pfaffian_masked(m, keep) - ref) < 1e-12
        assert abs(val - ref) < 1e-12
