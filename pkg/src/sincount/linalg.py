"""Small dense PD kernels: non-iterative Gram-Schmidt, Schur complements,
and the telescoping decomposition of a quadratic form.

Everything here works on matrices of order a few tens at most, so clarity
wins over asymptotic speed: each step solves the leading block directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericDomainError, ValidationError


@dataclass(frozen=True)
class GramSystem:
    """A positive-definite Gram matrix, optionally with vectors realizing it.

    Parameters
    ----------
    gram : (n, n) symmetric positive-definite matrix.
    vectors : optional (n, d) array whose rows A_1..A_n satisfy
        <A_i, A_j> = gram[i, j] to 1e-10 relative.
    """

    gram: np.ndarray
    vectors: np.ndarray | None = None

    def __post_init__(self):
        g = np.asarray(self.gram, dtype=float).copy()
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValidationError(f"gram must be square, got shape {g.shape}")
        if not np.allclose(g, g.T, rtol=0, atol=1e-10 * max(1.0, np.abs(g).max())):
            raise ValidationError("gram must be symmetric")
        g.flags.writeable = False
        object.__setattr__(self, "gram", g)
        if self.vectors is not None:
            v = np.asarray(self.vectors, dtype=float).copy()
            if v.ndim != 2 or v.shape[0] != g.shape[0]:
                raise ValidationError(
                    f"vectors must have {g.shape[0]} rows, got shape {v.shape}")
            rebuilt = v @ v.T
            scale = max(1.0, np.abs(g).max())
            if not np.allclose(rebuilt, g, rtol=1e-10, atol=1e-10 * scale):
                raise ValidationError("vectors do not reproduce the Gram matrix")
            v.flags.writeable = False
            object.__setattr__(self, "vectors", v)

    @property
    def dim(self):
        return self.gram.shape[0]


def schur_complement(gram, index):
    """Schur complement S_n of entry `index` (1-based) against the leading block.

    S_n = G[n,n] - g_n^T G_{n-1}^{-1} g_n, which also equals det(G_n)/det(G_{n-1}).
    """
    g = np.asarray(gram, dtype=float)
    n = g.shape[0]
    if not (1 <= index <= n):
        raise ValidationError(f"index {index} outside 1..{n}")
    k = index - 1
    if k == 0:
        return float(g[0, 0])
    lead = g[:k, :k]
    col = g[:k, k]
    try:
        sol = np.linalg.solve(lead, col)
    except np.linalg.LinAlgError as exc:
        raise NumericDomainError(
            f"leading {k}x{k} block is singular", index=index) from exc
    return float(g[k, k] - col @ sol)


def gram_schmidt_noniterative(system):
    """Orthonormalization coefficients straight from the Gram matrix.

    Row n of the result expresses the orthonormal vector B_n in the original
    vectors: B_1 = A_1/sqrt(G_11) and, for n >= 2,

        B_n = (A_n - sum_{i<n} A_i (G_{n-1}^{-1} g_n)_i) / sqrt(S_n),

    with S_n the Schur complement.  No intermediate orthogonal vectors are
    needed; only the Gram matrix enters.  The coefficients T satisfy
    T G T^T = I.

    Raises
    ------
    NumericDomainError
        If some S_n <= 0 (input not positive definite); names the index.
    """
    g = system.gram if isinstance(system, GramSystem) else np.asarray(system, dtype=float)
    n = g.shape[0]
    coeff = np.zeros((n, n))
    for m in range(n):
        s = schur_complement(g, m + 1)
        if s <= 0 or not np.isfinite(s):
            raise NumericDomainError(
                f"Schur complement S_{m + 1} = {s} is not positive; "
                "Gram matrix is not positive definite", index=m + 1)
        root = np.sqrt(s)
        if m == 0:
            coeff[0, 0] = 1.0 / root
            continue
        beta = np.linalg.solve(g[:m, :m], g[:m, m])
        coeff[m, :m] = -beta / root
        coeff[m, m] = 1.0 / root
    return coeff


def quadratic_form_increments(x, cov):
    """Telescoping split of x^T C^{-1} x into per-index increments.

    Returns (increments, residuals) where

        residuals[n] = (x_n - x_{1..n-1}^T C_{n-1}^{-1} c_n) / sqrt(S_n),
        increments[n] = residuals[n]^2,

    and sum(increments) = x^T C^{-1} x.  Each new increment is the squared
    residual of x_n after projecting out the first n-1 coordinates, so the
    sums for leading subvectors telescope.
    """
    x = np.asarray(x, dtype=float)
    c = np.asarray(cov, dtype=float)
    n = x.shape[0]
    if c.shape != (n, n):
        raise ValidationError(f"cov shape {c.shape} does not match x length {n}")
    residuals = np.zeros(n)
    for m in range(n):
        s = schur_complement(c, m + 1)
        if s <= 0 or not np.isfinite(s):
            raise NumericDomainError(
                f"Schur complement S_{m + 1} = {s} is not positive; "
                "covariance is not positive definite", index=m + 1)
        if m == 0:
            proj = 0.0
        else:
            beta = np.linalg.solve(c[:m, :m], c[:m, m])
            proj = x[:m] @ beta
        residuals[m] = (x[m] - proj) / np.sqrt(s)
    return residuals**2, residuals


def cholesky_residuals(chol_lower, x):
    """Fast path for the residual recursion: solve L r = x.

    With C = L L^T (L lower triangular, positive diagonal), the vector
    L^{-1} x equals the residuals of quadratic_form_increments(x, C).
    Accepts a batch: x of shape (n,) or (m, n); returns the same shape.
    """
    from scipy.linalg import solve_triangular

    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        return solve_triangular(chol_lower, arr, lower=True)
    return solve_triangular(chol_lower, arr.T, lower=True).T
