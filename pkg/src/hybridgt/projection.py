"""Projection of a covariance onto the cone of PSD matrices sharing fixed eigenvectors.

Eigen-pairs are extracted one at a time in the covariance domain (largest
``mu`` first). The first ``K`` eigenvectors are the supplied model vectors;
each remaining one approximately maximizes the residual energy subject to
orthogonality with everything accepted so far, computed by an augmented
Lagrangian proximal-gradient loop.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._kernels import pg_iterate
from .bases import ModelBasis
from .errors import DimensionError, NotOrthonormalError
from .spectral import SpectralDecomp, symmetrize, top_eigenvector

log = logging.getLogger(__name__)

# Prior vectors produced by PG are orthogonal only to within the PG tolerance.
PRIOR_ORTHO_TOL = 1e-6


@dataclass(frozen=True)
class PgOptions:
    """Proximal-gradient settings.

    ``step=None`` selects ``0.5 / (1 + 2 gamma)``, which guarantees descent
    for orthonormal priors.
    """

    gamma: float = 10.0
    step: float | None = None
    max_iters: int = 1000
    tol: float = 1e-8

    def __post_init__(self):
        if self.gamma <= 0 or self.tol <= 0 or self.max_iters < 1:
            raise ValueError(f"invalid PG options: {self}")
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be positive")

    @property
    def step_size(self) -> float:
        return self.step if self.step is not None else 0.5 / (1.0 + 2.0 * self.gamma)


class PgInfo(NamedTuple):
    iterations: int
    converged: bool
    degenerate: bool


@dataclass(frozen=True)
class ProjectionResult:
    """Output of :func:`project_to_cone`.

    ``decomp.vectors[:model_count]`` are the model vectors, verbatim.
    ``residual_norm`` is the Frobenius norm of the final residual.
    """

    decomp: SpectralDecomp
    model_count: int
    residual_norm: float
    degenerate_steps: int = 0
    pg_iterations: list[int] = field(default_factory=list)

    def reconstruct(self) -> np.ndarray:
        return self.decomp.reconstruct()


def eigenvalue_floor(c: np.ndarray) -> float:
    return 1e-8 * max(float(np.trace(c)) / c.shape[0], 1.0)


def _orthogonal_complement_vector(y: np.ndarray) -> np.ndarray:
    """Deterministic unit vector orthogonal to the columns of ``y``."""
    n = y.shape[0]
    p = np.eye(n) - y @ y.T
    v = p[:, int(np.argmax(np.linalg.norm(p, axis=0)))]
    v = v - y @ (y.T @ v)
    return v / np.linalg.norm(v)


def _complement_basis(y: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``span(y)``, shape (n, n - m)."""
    n, m = y.shape
    if m == 0:
        return np.eye(n)
    u, _, _ = np.linalg.svd(y, full_matrices=True)
    return u[:, m:]


def pg_objective(v, e, y, zeta, gamma: float) -> float:
    """Smooth part ``Theta(v)`` plus the unit-ball indicator."""
    ytv = y.T @ v
    if v @ v > 1.0 + 1e-12:
        return np.inf
    return float(-e @ v + zeta @ ytv + gamma * ytv @ ytv)


def pg_step(v, e, y, zeta, gamma: float, step: float) -> np.ndarray:
    """One proximal-gradient step on ``Theta`` followed by projection onto the unit ball."""
    grad = -e + y @ zeta + 2.0 * gamma * (y @ (y.T @ v))
    w = v - step * grad
    nrm = np.linalg.norm(w)
    return w / nrm if nrm > 1.0 else w


def pg_eigenvector(e, y=None, opts: PgOptions | None = None, return_info: bool = False):
    """Maximize ``e . v`` over the unit ball subject to ``Y^T v = 0``.

    Parameters
    ----------
    e : array_like, shape (n,)
        Target direction (normally unit norm).
    y : array_like, shape (n, m), optional
        Orthonormal columns the result must be orthogonal to.
    opts : PgOptions, optional
    return_info : bool
        Also return a :class:`PgInfo`.

    Returns
    -------
    v : ndarray, shape (n,)
        Unit vector with ``e . v >= 0``.

    Notes
    -----
    The constraint is relaxed into the augmented Lagrangian
    ``-e.v + zeta.Y^T v + gamma |Y^T v|^2`` plus the unit-ball indicator; the
    iteration alternates a gradient step, projection onto the ball, and one
    multiplier update ``zeta += gamma Y^T v``. When ``e`` lies inside
    ``span(Y)`` there is no feasible ascent direction and a deterministic
    vector from the orthogonal complement is returned, flagged degenerate.
    """
    opts = opts or PgOptions()
    e = np.asarray(e, dtype=float).ravel()
    n = e.size
    y = np.zeros((n, 0)) if y is None else np.asarray(y, dtype=float).reshape(n, -1)
    m = y.shape[1]
    if m >= n:
        raise DimensionError(f"{m} prior vectors leave no room in dimension {n}")
    if m and np.max(np.abs(y.T @ y - np.eye(m))) > PRIOR_ORTHO_TOL:
        raise NotOrthonormalError("prior vectors are not orthonormal")
    enorm = float(np.linalg.norm(e))
    if enorm == 0.0 or np.linalg.norm(e - y @ (y.T @ e)) <= 1e-10 * enorm:
        v = _orthogonal_complement_vector(y)
        info = PgInfo(0, True, True)
        return (v, info) if return_info else v

    v, iters, converged = pg_iterate(
        e, y, opts.gamma, opts.step_size, opts.max_iters, opts.tol
    )
    if not converged:
        log.debug("PG hit max_iters=%d", opts.max_iters)
    v = v / np.linalg.norm(v)
    if e @ v < 0:
        v = -v
    info = PgInfo(iters, converged, False)
    return (v, info) if return_info else v


def project_to_cone(c, basis: ModelBasis, opts: PgOptions | None = None) -> ProjectionResult:
    """Project a PSD covariance onto the cone sharing ``basis`` as top eigenvectors.

    Model vectors take the leading slots with ``mu_k = min(<E, u u^T>, mu_prev)``;
    the remaining slots are filled by :func:`pg_eigenvector` seeded with the
    dominant eigenvector of the running residual ``E`` compressed onto the
    orthogonal complement of the vectors accepted so far (computed in an
    explicit basis of that complement, so rank-deficient residuals whose
    spectrum is all zero still give a feasible seed). Every ``mu`` is
    clamped from below at ``1e-8 * max(trace(c)/n, 1)``.

    The compression matters: the clamp leaves energy along accepted
    directions in ``E``, so the uncompressed dominant eigenvector usually
    lies almost entirely in their span and carries no usable direction.
    """
    opts = opts or PgOptions()
    c = symmetrize(c)
    n = c.shape[0]
    if basis.n != n:
        raise DimensionError(f"basis dimension {basis.n} != matrix dimension {n}")
    floor = eigenvalue_floor(c)

    vectors = np.zeros((n, n))
    values = np.zeros(n)
    resid = c.copy()
    prev = np.inf

    def accept(i, w, mu):
        nonlocal resid, prev
        mu = max(min(mu, prev), floor)
        vectors[i] = w
        values[i] = mu
        resid = resid - mu * np.outer(w, w)
        prev = mu

    for i, u in enumerate(basis.vectors):
        accept(i, u, float(u @ resid @ u))

    degenerate = 0
    iters = []
    for i in range(basis.k, n):
        y = vectors[:i].T
        z = _complement_basis(y)
        ez, _ = top_eigenvector(z.T @ resid @ z)
        e = z @ ez
        v, info = pg_eigenvector(e, y, opts, return_info=True)
        # PG meets Y^T v = 0 only to its tolerance; finish with the exact projection
        v = z @ (z.T @ v)
        v /= np.linalg.norm(v)
        degenerate += info.degenerate
        iters.append(info.iterations)
        accept(i, v, float(v @ resid @ v))

    return ProjectionResult(
        decomp=SpectralDecomp(values=values, vectors=vectors),
        model_count=basis.k,
        residual_norm=float(np.linalg.norm(resid)),
        degenerate_steps=degenerate,
        pg_iterations=iters,
    )
