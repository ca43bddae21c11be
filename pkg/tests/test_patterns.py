import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from thzspi.patterns import (binary_masks, make_basis, mask_from_row, order_sequency2d,
                             sylvester_hadamard, transition_count)


def test_base_case():
    b = sylvester_hadamard(0)
    assert b.N == 1 and b.n == 1
    np.testing.assert_array_equal(b.rows, [[1]])


@pytest.mark.parametrize("log2_N", [2, 4, 6, 8])
def test_matches_scipy_sylvester(log2_N):
    b = sylvester_hadamard(log2_N)
    np.testing.assert_array_equal(b.rows, scipy.linalg.hadamard(2 ** log2_N))


def test_4x4_first_row_and_orthogonality():
    b = sylvester_hadamard(2)
    assert np.all(b.rows[0] == 1)
    np.testing.assert_array_equal(b.rows @ b.rows.T, 4 * np.eye(4))


def test_256_orthogonal():
    H = sylvester_hadamard(8).rows.astype(float)
    assert np.all(H[0] == 1)
    np.testing.assert_allclose(H @ H.T, 256 * np.eye(256), atol=1e-9, rtol=0)


@pytest.mark.parametrize("bad", [1, 3, 7, 18, -2])
def test_rejects_odd_or_oversize(bad):
    with pytest.raises(ValueError):
        sylvester_hadamard(bad)


@pytest.mark.parametrize("pattern, expected", [
    (np.ones((4, 4)), 0),
    ([[1, -1], [1, -1]], 2),
    ([[1, -1], [-1, 1]], 4),
])
def test_transition_count(pattern, expected):
    assert transition_count(np.array(pattern)) == expected


def test_mask_examples():
    b = sylvester_hadamard(2)
    np.testing.assert_array_equal(mask_from_row(b, 0, 0.95).values, np.ones((2, 2)))
    np.testing.assert_array_equal(b.rows[1], [1, -1, 1, -1])
    np.testing.assert_array_equal(mask_from_row(b, 1, 1.0).values, [[1, 0], [1, 0]])
    np.testing.assert_allclose(mask_from_row(b, 1, 0.95).values,
                               [[1, np.sqrt(0.05)], [1, np.sqrt(0.05)]], rtol=0, atol=1e-15)
    assert np.isclose(np.sqrt(0.05), 0.2236, atol=5e-5)


def test_mask_index_out_of_range():
    b = sylvester_hadamard(2)
    with pytest.raises(IndexError):
        mask_from_row(b, 4, 0.95)
    with pytest.raises(IndexError):
        mask_from_row(b, -1, 0.95)


@pytest.mark.parametrize("mu", [1.0, 0.95, 0.3])
def test_mask_set_levels(mu):
    masks = binary_masks(make_basis(4), mu)
    assert np.isclose(masks.a_block ** 2 + mu, 1.0, atol=1e-12)
    for k, mask in enumerate(masks.masks):
        levels = set(np.unique(mask.values))
        assert levels <= {1.0, masks.a_block}
        expected = np.where(masks.basis.pattern(k) > 0, 1.0, masks.a_block)
        np.testing.assert_array_equal(mask.values, expected)


@pytest.mark.parametrize("mu", [0.0, -0.1, 1.5])
def test_mask_rejects_bad_depth(mu):
    with pytest.raises(ValueError):
        binary_masks(make_basis(2), mu)


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_sequency_order(n):
    b = make_basis(n, "sequency2d")
    counts = [transition_count(b.pattern(k)) for k in range(b.N)]
    assert counts[0] == 0 and np.all(b.rows[0] == 1)
    assert all(a <= c for a, c in zip(counts, counts[1:]))
    np.testing.assert_array_equal(np.sort(b.ordering), np.arange(b.N))
    # ties broken by natural index
    for a, c, ia, ic in zip(counts, counts[1:], b.ordering, b.ordering[1:]):
        if a == c:
            assert ia < ic
    H = b.rows.astype(float)
    np.testing.assert_allclose(H @ H.T, b.N * np.eye(b.N), atol=1e-9)
    natural = sylvester_hadamard(2 * (n.bit_length() - 1)).rows
    np.testing.assert_array_equal(b.rows, natural[b.ordering])


def test_sequency_idempotent_and_order_independent(rng):
    b = make_basis(8, "sequency2d")
    again = order_sequency2d(b)
    np.testing.assert_array_equal(again.ordering, b.ordering)
    nat = make_basis(8, "natural")
    perm = rng.permutation(nat.N)
    shuffled = type(nat)(n=nat.n, rows=nat.rows[perm], ordering=perm)
    np.testing.assert_array_equal(order_sequency2d(shuffled).ordering, b.ordering)


def test_make_basis_rejects():
    with pytest.raises(ValueError):
        make_basis(3)
    with pytest.raises(ValueError):
        make_basis(4, "russian-dolls")


@settings(max_examples=50, deadline=None)
@given(n_exp=st.integers(0, 3), data=st.data())
def test_mask_with_full_depth_recovers_row(n_exp, data):
    b = make_basis(2 ** n_exp, data.draw(st.sampled_from(["natural", "sequency2d"])))
    k = data.draw(st.integers(0, b.N - 1))
    mask = mask_from_row(b, k, 1.0).values
    np.testing.assert_array_equal(np.where(mask == 1.0, 1, -1).ravel(), b.rows[k])
