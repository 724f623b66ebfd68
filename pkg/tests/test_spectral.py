import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hybridgt.errors import DimensionError
from hybridgt.spectral import (
    SpectralDecomp,
    canonical_sign,
    eig_sym,
    inner_product,
    is_psd,
    symmetrize,
    top_eigenvector,
)

from conftest import random_psd

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def sym_matrices(n):
    return arrays(float, (n, n), elements=finite).map(symmetrize)


def test_symmetrize_is_exact():
    a = np.array([[1.0, 2.0], [4.0, 3.0]])
    s = symmetrize(a)
    assert s[0, 1] == s[1, 0] == 3.0
    with pytest.raises(DimensionError):
        symmetrize(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        symmetrize(np.zeros((0, 0)))


def test_inner_product_examples():
    assert inner_product(np.eye(4), np.eye(4)) == 4
    a = np.array([[1.0, 2.0], [2.0, 3.0]])
    oracle = sum(a[i, j] * a[i, j] for i in range(2) for j in range(2))
    assert inner_product(a, a) == oracle == 18
    assert inner_product(a, np.zeros((2, 2))) == 0
    with pytest.raises(DimensionError):
        inner_product(np.eye(2), np.eye(3))


@given(sym_matrices(5), sym_matrices(5))
def test_inner_product_symmetric(a, b):
    assert inner_product(a, b) == inner_product(b, a)


@given(sym_matrices(6), arrays(float, 6, elements=finite))
def test_inner_product_with_rank1_is_rayleigh_quotient(a, v):
    if np.linalg.norm(v) < 1e-3:
        return
    v = v / np.linalg.norm(v)
    lhs = inner_product(a, np.outer(v, v))
    rhs = v @ a @ v
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_eig_sym_diagonal():
    d = eig_sym(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_array_equal(d.values, [3.0, 2.0, 1.0])
    np.testing.assert_allclose(np.abs(d.vectors), np.eye(3)[[0, 2, 1]], atol=1e-15)


def test_eig_sym_two_by_two():
    d = eig_sym([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(d.values, [3.0, 1.0], atol=1e-14)
    s = 1 / np.sqrt(2)
    # sign convention: the largest-magnitude entry (first on ties) is non-negative
    np.testing.assert_allclose(d.vectors, [[s, s], [s, -s]], atol=1e-14)


def test_eig_sym_identity():
    d = eig_sym(np.eye(5))
    np.testing.assert_allclose(d.values, 1.0)
    np.testing.assert_allclose(d.vectors @ d.vectors.T, np.eye(5), atol=1e-14)


def test_eig_sym_postconditions(rng):
    a = random_psd(rng) - 0.5 * np.eye(16)
    d = eig_sym(a)
    assert np.all(np.diff(d.values) <= 0)
    np.testing.assert_allclose(np.linalg.norm(d.vectors, axis=1), 1.0, atol=1e-10)
    gram = d.vectors @ d.vectors.T
    assert np.max(np.abs(gram - np.eye(16))) <= 1e-8
    scale = np.max(np.sum(np.abs(a), axis=1))
    for lam, v in zip(d.values, d.vectors):
        assert np.max(np.abs(a @ v - lam * v)) <= 1e-8 * scale
    assert np.max(np.abs(d.reconstruct() - a)) <= 1e-8


@settings(max_examples=50)
@given(arrays(float, 6, elements=st.floats(-5, 5)), st.integers(0, 2**32 - 1))
def test_eig_of_reconstruction_reproduces_values(values, seed):
    q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(6, 6)))
    values = np.sort(values)[::-1]
    d = SpectralDecomp(values, q.T)
    np.testing.assert_allclose(eig_sym(d.reconstruct()).values, values, atol=1e-8)


def test_canonical_sign():
    v = canonical_sign(np.array([[0.1, -0.9], [-0.5, 0.5]]))
    np.testing.assert_array_equal(v, [[-0.1, 0.9], [0.5, -0.5]])


def test_top_eigenvector_examples(rng):
    v, lam = top_eigenvector(np.diag([5.0, 1.0]))
    np.testing.assert_allclose(v, [1.0, 0.0])
    assert lam == pytest.approx(5.0)

    w = rng.normal(size=7)
    w /= np.linalg.norm(w)
    v, lam = top_eigenvector(np.outer(w, w))
    assert lam == pytest.approx(1.0)
    assert abs(v @ w) == pytest.approx(1.0, abs=1e-12)

    a = random_psd(rng)
    v, lam = top_eigenvector(a)
    d = eig_sym(a)
    assert lam == pytest.approx(d.values[0], rel=1e-12)
    np.testing.assert_allclose(v, d.vectors[0], atol=1e-10)
    assert v @ a @ v == pytest.approx(lam, rel=1e-12)


def test_is_psd_examples(rng):
    assert is_psd(np.eye(4), 0.0)
    assert not is_psd(np.diag([1.0, -0.1]), 1e-8)
    y = rng.normal(size=9)
    assert is_psd(np.outer(y, y), 1e-12 * (y @ y))
    with pytest.raises(ValueError):
        is_psd(np.eye(2), -1.0)
