import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sincount.errors import NumericDomainError, ValidationError
from sincount.linalg import (GramSystem, cholesky_residuals,
                             gram_schmidt_noniterative,
                             quadratic_form_increments, schur_complement)

rng = np.random.default_rng(2024)


def random_pd_vectors(dim, n_extra=3):
    # rows span a PD Gram matrix almost surely
    return rng.standard_normal((dim, dim + n_extra))


def classical_gram_schmidt(vectors):
    """Iterative reference: orthonormalize rows, return coefficient matrix."""
    n = vectors.shape[0]
    basis = np.zeros_like(vectors)
    coeff = np.zeros((n, n))
    for m in range(n):
        acc = vectors[m].copy()
        row = np.zeros(n)
        row[m] = 1.0
        for i in range(m):
            proj = basis[i] @ vectors[m]
            acc -= proj * basis[i]
            row -= proj * coeff[i]
        norm = np.linalg.norm(acc)
        basis[m] = acc / norm
        coeff[m] = row / norm
    return coeff


CASES = [random_pd_vectors(int(d)) for d in rng.integers(2, 11, size=100)]


@pytest.mark.parametrize("vectors", CASES)
def test_noniterative_matches_classical(vectors):
    system = GramSystem(gram=vectors @ vectors.T, vectors=vectors)
    direct = gram_schmidt_noniterative(system)
    reference = classical_gram_schmidt(vectors)
    assert np.max(np.abs(direct - reference)) < 1e-9


def test_coefficients_whiten_the_gram():
    vectors = random_pd_vectors(6)
    g = vectors @ vectors.T
    t = gram_schmidt_noniterative(GramSystem(gram=g))
    np.testing.assert_allclose(t @ g @ t.T, np.eye(6), atol=1e-9)


def test_schur_complement_is_det_ratio():
    g = random_pd_vectors(7)
    g = g @ g.T
    for n in range(2, 8):
        expect = np.linalg.det(g[:n, :n]) / np.linalg.det(g[:n - 1, :n - 1])
        assert schur_complement(g, n) == pytest.approx(expect, rel=1e-8)
    assert schur_complement(g, 1) == pytest.approx(g[0, 0], rel=1e-12)


def test_schur_complement_index_validation():
    g = np.eye(3)
    with pytest.raises(ValidationError):
        schur_complement(g, 0)
    with pytest.raises(ValidationError):
        schur_complement(g, 4)


def test_gram_system_validation():
    with pytest.raises(ValidationError):
        GramSystem(gram=np.arange(6.0).reshape(2, 3))
    with pytest.raises(ValidationError):
        GramSystem(gram=np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValidationError):
        GramSystem(gram=np.eye(2), vectors=np.ones((2, 4)))


def test_not_positive_definite_names_index():
    g = np.eye(4)
    g[2, 2] = 0.0
    with pytest.raises(NumericDomainError) as info:
        gram_schmidt_noniterative(GramSystem(gram=g))
    assert info.value.index == 3


@pytest.mark.parametrize("dim", list(rng.integers(2, 13, size=100)))
def test_quadratic_form_telescopes(dim):
    vectors = random_pd_vectors(int(dim))
    cov = vectors @ vectors.T
    x = rng.standard_normal(int(dim))
    increments, residuals = quadratic_form_increments(x, cov)
    total = x @ np.linalg.solve(cov, x)
    assert np.sum(increments) == pytest.approx(total, rel=1e-9)
    np.testing.assert_allclose(increments, residuals**2, rtol=1e-12)
    # leading partial sums telescope: order-n total from the first n terms
    for n in range(1, int(dim) + 1):
        part = x[:n] @ np.linalg.solve(cov[:n, :n], x[:n])
        assert np.sum(increments[:n]) == pytest.approx(part, rel=1e-9,
                                                       abs=1e-12)


def test_cholesky_residuals_match_recursion():
    vectors = random_pd_vectors(8)
    cov = vectors @ vectors.T
    x = rng.standard_normal(8)
    _, residuals = quadratic_form_increments(x, cov)
    chol = np.linalg.cholesky(cov)
    np.testing.assert_allclose(cholesky_residuals(chol, x), residuals,
                               rtol=1e-9, atol=1e-12)
    # batched rows give the same answer rowwise
    batch = rng.standard_normal((5, 8))
    out = cholesky_residuals(chol, batch)
    for k in range(5):
        np.testing.assert_allclose(out[k], cholesky_residuals(chol, batch[k]),
                                   rtol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=8), st.integers(min_value=0, max_value=2**31 - 1))
def test_whitening_property(dim, seed):
    local = np.random.default_rng(seed)
    vectors = local.standard_normal((dim, dim + 3))
    g = vectors @ vectors.T
    t = gram_schmidt_noniterative(GramSystem(gram=g))
    np.testing.assert_allclose(t @ g @ t.T, np.eye(dim), atol=1e-8)
