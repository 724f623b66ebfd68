"""Fixed transform bases: DCT, ADST, their separable 2D versions, and KLT.

A transform matrix is an ``(n, n)`` array whose rows are orthonormal analysis
vectors, so coefficients are ``T @ x``. 2D blocks are vectorized row-major.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NotOrthonormalError, NotPSDError
from .spectral import eig_sym, min_eigenvalue, symmetrize

ORTHO_TOL = 1e-10


def orthonormality_error(rows) -> float:
    """``max |T T^T - I|`` for a stack of row vectors."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(rows @ rows.T - np.eye(rows.shape[0]))))


def _check_length(n: int) -> int:
    n = int(n)
    if n < 1:
        raise DimensionError(f"basis length must be >= 1, got {n}")
    return n


def dct_basis_1d(n: int) -> np.ndarray:
    """Orthonormal DCT-II matrix, DC row first."""
    n = _check_length(n)
    k = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    t = np.sqrt(2.0 / n) * np.cos(np.pi * (2 * m + 1) * k / (2 * n))
    t[0] /= np.sqrt(2.0)
    return t


def adst_basis_1d(n: int) -> np.ndarray:
    """Orthonormal DST-VII ("asymmetric DST") matrix.

    Row ``k`` (1-based) samples ``sin((2k-1) m pi / (2n+1))`` at ``m = 1..n``,
    so every basis function would vanish at ``m = 0``, the predicted boundary.
    """
    n = _check_length(n)
    k = np.arange(1, n + 1)[:, None]
    m = np.arange(1, n + 1)[None, :]
    return 2.0 / np.sqrt(2 * n + 1) * np.sin((2 * k - 1) * m * np.pi / (2 * n + 1))


def zigzag_order(n: int) -> list[tuple[int, int]]:
    """JPEG-style zigzag over (vertical, horizontal) frequency pairs.

    Odd anti-diagonals are walked with the row index increasing, even ones
    with it decreasing. For ``n = 4`` this gives (0,0), (0,1), (1,0), (2,0), ...
    """
    n = _check_length(n)
    order = []
    for s in range(2 * n - 1):
        rows = range(max(0, s - n + 1), min(s, n - 1) + 1)
        if s % 2 == 0:
            rows = reversed(rows)
        order.extend((r, s - r) for r in rows)
    return order


def separable_2d_basis(t) -> np.ndarray:
    """Zigzag-ordered rows ``vec(phi_r phi_c^T)`` of a separable 2D transform."""
    t = np.asarray(t, dtype=float)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise DimensionError(f"expected a square 1D transform, got shape {t.shape}")
    return np.stack([np.kron(t[r], t[c]) for r, c in zigzag_order(t.shape[0])])


def dct_basis_2d(n: int = 4) -> np.ndarray:
    return separable_2d_basis(dct_basis_1d(n))


def adst_basis_2d(n: int = 4) -> np.ndarray:
    return separable_2d_basis(adst_basis_1d(n))


def klt_from_covariance(c, tol: float = 1e-8) -> np.ndarray:
    """KLT rows: eigenvectors of ``c`` by descending eigenvalue.

    ``tol`` is scaled by ``max(1, max|c|)`` before the PSD check.
    """
    c = symmetrize(c)
    scale = max(1.0, float(np.max(np.abs(c))))
    lo = min_eigenvalue(c)
    if lo < -tol * scale:
        raise NotPSDError(f"covariance has eigenvalue {lo:.3e}")
    return eig_sym(c).vectors


@dataclass(frozen=True)
class ModelBasis:
    """``k`` fixed orthonormal vectors of length ``n`` (stored as rows).

    ``source`` is a free-form description such as ``"adst2d[:4]"``.
    """

    vectors: np.ndarray
    n: int
    source: str = field(default="")

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.size == 0:
            v = v.reshape(0, self.n)
        if v.ndim != 2 or v.shape[1] != self.n:
            raise DimensionError(f"model vectors of shape {v.shape} do not have length {self.n}")
        object.__setattr__(self, "vectors", v)
        if v.shape[0] > self.n:
            raise DimensionError(f"{v.shape[0]} model vectors exceed dimension {self.n}")
        err = orthonormality_error(v)
        if err > ORTHO_TOL:
            raise NotOrthonormalError(f"model vectors not orthonormal (error {err:.2e})")

    @property
    def k(self) -> int:
        return self.vectors.shape[0]

    @property
    def columns(self) -> np.ndarray:
        """The vectors as an ``(n, k)`` matrix."""
        return self.vectors.T

    @classmethod
    def empty(cls, n: int) -> "ModelBasis":
        return cls(np.zeros((0, n)), n, "empty")


def first_k_model_vectors(t2d, k: int, source: str = "") -> ModelBasis:
    """The first ``k`` rows of a zigzag-ordered 2D transform as a ModelBasis."""
    t2d = np.asarray(t2d, dtype=float)
    n = t2d.shape[1]
    if not 0 <= k <= t2d.shape[0]:
        raise ValueError(f"k must lie in [0, {t2d.shape[0]}], got {k}")
    return ModelBasis(t2d[:k].copy(), n, source or f"first {k} rows")


def adst_model_basis(k: int, n: int = 4) -> ModelBasis:
    """First ``k`` zigzag frequencies of the ``n x n`` separable ADST."""
    return first_k_model_vectors(adst_basis_2d(n), k, source=f"adst2d[:{k}]")
