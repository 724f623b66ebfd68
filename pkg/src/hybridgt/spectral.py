"""Dense symmetric-matrix algebra on the Hilbert space of real symmetric matrices.

Symmetric matrices are plain ``numpy`` arrays; :func:`symmetrize` is the single
entry point that validates shape and enforces exact symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionError


def symmetrize(a) -> np.ndarray:
    """Return ``(A + A^T) / 2`` as a float64 array.

    Raises
    ------
    DimensionError
        If ``a`` is not a non-empty square matrix.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    return 0.5 * (a + a.T)


def canonical_sign(vectors: np.ndarray) -> np.ndarray:
    """Flip each row so that its entry of largest magnitude is non-negative.

    The first occurrence wins ties, which keeps golden files reproducible.
    """
    vectors = np.array(vectors, dtype=float, copy=True)
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=1)
    signs = np.where(vectors[np.arange(len(vectors)), idx] < 0, -1.0, 1.0)
    return vectors * signs[:, None]


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigen-pairs of a symmetric matrix, largest eigenvalue first.

    Attributes
    ----------
    values : ndarray, shape (n,)
        Eigenvalues sorted in non-increasing order.
    vectors : ndarray, shape (n, n)
        ``vectors[i]`` is the unit eigenvector paired with ``values[i]``.
    """

    values: np.ndarray
    vectors: np.ndarray

    @property
    def n(self) -> int:
        return len(self.values)

    def reconstruct(self) -> np.ndarray:
        """Sum of ``values[i] * v_i v_i^T``."""
        return symmetrize((self.vectors.T * self.values) @ self.vectors)


def inner_product(a, b) -> float:
    """Hilbert-space inner product ``tr(B^T A) = sum_ij A_ij B_ij``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"inner product of {a.shape} and {b.shape} matrices")
    return float(np.sum(a * b))


def eig_sym(a) -> SpectralDecomp:
    """Full eigendecomposition of a symmetric matrix.

    Eigenvalues come back in descending order and every eigenvector is sign
    normalized with :func:`canonical_sign`.
    """
    a = symmetrize(a)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(f"symmetric eigensolver failed: {exc}") from exc
    order = np.argsort(-w, kind="stable")
    return SpectralDecomp(values=w[order], vectors=canonical_sign(v[:, order].T))


def top_eigenvector(a) -> tuple[np.ndarray, float]:
    """Unit eigenvector of the largest eigenvalue and that eigenvalue."""
    a = symmetrize(a)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise ConvergenceError(f"symmetric eigensolver failed: {exc}") from exc
    return canonical_sign(v[:, -1][None, :])[0], float(w[-1])


def is_psd(a, tol: float = 0.0) -> bool:
    """True iff the smallest eigenvalue of ``a`` is at least ``-tol``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return bool(np.linalg.eigvalsh(symmetrize(a))[0] >= -tol)


def min_eigenvalue(a) -> float:
    return float(np.linalg.eigvalsh(symmetrize(a))[0])


def rank1(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.outer(v, v)
