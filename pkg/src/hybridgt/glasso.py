"""Graphical lasso restricted to Laplacians that share fixed eigenvectors.

The solver works on the dual (covariance) variable ``C = L^{-1}``: a block
coordinate descent sweep over row/column pairs enforces
``|C - C_bar|_inf <= rho`` while decreasing ``-log det C``, then the result is
projected back onto the cone of matrices whose leading eigenvectors are the
model vectors. The two steps alternate until ``C`` stops moving.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._kernels import box_qp_cd
from .bases import ModelBasis
from .errors import DimensionError, NotPSDError
from .projection import PgOptions, ProjectionResult, project_to_cone
from .spectral import min_eigenvalue, symmetrize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GlassoConfig:
    """Solver settings.

    ``rho=None`` picks ``0.01 * mean(diag(C_bar))``. ``conv_tol`` is measured
    in units of ``mean(diag(C_bar))`` so it does not depend on pixel scale.
    """

    rho: float | None = None
    outer_max: int = 50
    bcd_sweeps_per_round: int = 1
    conv_tol: float = 1e-6
    cd_tol: float = 1e-8
    cd_max_sweeps: int = 200
    pg: PgOptions = field(default_factory=PgOptions)

    def __post_init__(self):
        if self.rho is not None and self.rho < 0:
            raise ValueError("rho must be non-negative")
        if self.outer_max < 1 or self.bcd_sweeps_per_round < 1 or self.cd_max_sweeps < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.conv_tol <= 0 or self.cd_tol <= 0:
            raise ValueError("tolerances must be positive")

    def resolve_rho(self, c_bar: np.ndarray) -> float:
        if self.rho is not None:
            return float(self.rho)
        return 0.01 * float(np.mean(np.diag(c_bar)))


@dataclass(frozen=True)
class HybridTransform:
    """A learned Laplacian and the transform built from its eigenvectors.

    ``basis_rows[:model_count]`` are the model vectors verbatim; the rest are
    the data-driven eigenvectors, in order of decreasing covariance
    eigenvalue ``mu`` (increasing Laplacian eigenvalue ``1 / mu``).
    """

    laplacian: np.ndarray
    covariance: np.ndarray
    basis_rows: np.ndarray
    eigenvalues: np.ndarray
    model_count: int
    rho: float
    objective_trace: list[float]
    rounds: int
    converged: bool
    skipped_updates: int = 0

    @property
    def objective(self) -> float:
        return min(self.objective_trace)


def glasso_objective(l, c_bar, rho: float) -> float:
    """``Tr(L C_bar) - log det L + rho * sum |L_ij|`` for positive definite ``L``."""
    l = symmetrize(l)
    c_bar = symmetrize(c_bar)
    if l.shape != c_bar.shape:
        raise DimensionError(f"{l.shape} vs {c_bar.shape}")
    w = np.linalg.eigvalsh(l)
    if w[0] <= 0:
        raise NotPSDError(f"L is not positive definite (min eigenvalue {w[0]:.3e})")
    return float(np.sum(l * c_bar) - np.sum(np.log(w)) + rho * np.sum(np.abs(l)))


def _spectral_objective(proj: ProjectionResult, c_bar: np.ndarray, rho: float) -> float:
    mu = proj.decomp.values
    w = proj.decomp.vectors
    lap = (w.T / mu) @ w
    return float(np.sum(lap * c_bar) + np.sum(np.log(mu)) + rho * np.sum(np.abs(lap)))


def _column_step(c, c_bar, j, rho, tol, max_sweeps) -> bool:
    """Exact block update of row/column ``j`` of ``c`` in place.

    Returns False, leaving ``c`` untouched, when no point of the box keeps
    ``c`` positive definite. That cannot happen from a dual-feasible start but
    can right after a projection has moved ``c`` out of the box.
    """
    n = c.shape[0]
    others = np.r_[0:j, j + 1:n]
    c11 = c[np.ix_(others, others)]
    q = np.linalg.inv(c11)
    q = 0.5 * (q + q.T)
    target = c_bar[others, j]
    y = c[others, j].copy()
    scale = max(1.0, float(np.max(np.abs(target))) if target.size else 1.0)
    box_qp_cd(q, y, target - rho, target + rho, tol * scale, max_sweeps)
    diag = c_bar[j, j] + rho
    if diag - y @ q @ y <= 1e-12 * diag:
        return False
    c[others, j] = y
    c[j, others] = y
    c[j, j] = diag
    return True


def dual_column_update(c, c_bar, j: int, rho: float, tol: float = 1e-8,
                       max_sweeps: int = 200) -> np.ndarray:
    """Minimize ``-log det C`` over row/column ``j`` within the ``rho`` box.

    With the rest of ``C`` fixed the subproblem is the box-constrained QP
    ``min y^T C11^{-1} y`` s.t. ``|y - c_bar_12|_inf <= rho``, solved by cyclic
    coordinate descent; the diagonal entry is set to ``C_bar_jj + rho``.

    Returns
    -------
    ndarray
        Updated copy of ``c``; positive definite.

    Raises
    ------
    NotPSDError
        If ``c`` is not positive definite, or the box contains no column that
        keeps it so.
    """
    c = symmetrize(c).copy()
    c_bar = symmetrize(c_bar)
    if c.shape != c_bar.shape:
        raise DimensionError(f"{c.shape} vs {c_bar.shape}")
    if not 0 <= j < c.shape[0]:
        raise IndexError(f"column {j} out of range")
    if min_eigenvalue(c) <= 0:
        raise NotPSDError("C must be positive definite")
    if not _column_step(c, c_bar, j, rho, tol, max_sweeps):
        raise NotPSDError(f"no positive definite completion of column {j} inside the box")
    return c


def _is_pd(c) -> bool:
    try:
        np.linalg.cholesky(c)
    except np.linalg.LinAlgError:
        return False
    return True


def restore_feasibility(c, c_bar, rho: float, halvings: int = 30) -> np.ndarray:
    """Bring ``c`` back into the dual box while keeping it positive definite.

    ``c`` is clipped entrywise to ``|C - C_bar| <= rho``, then pulled toward
    ``C_bar + rho I`` (box feasible, and PD whenever ``rho > 0``) by the
    largest weight ``t = 2^-i`` for which the blend is PD. Both ends lie in
    the box, so the result does too.
    """
    c_bar = symmetrize(c_bar)
    clipped = c_bar + np.clip(symmetrize(c) - c_bar, -rho, rho)
    anchor = c_bar + rho * np.eye(c_bar.shape[0])
    t = 1.0
    for _ in range(halvings):
        trial = anchor + t * (clipped - anchor)
        if _is_pd(trial):
            return trial
        t *= 0.5
    return anchor if _is_pd(anchor) else clipped


Monitor = Callable[[str, np.ndarray], None]


def learn_hybrid_laplacian(c_bar, basis: ModelBasis, cfg: GlassoConfig | None = None,
                           monitor: Monitor | None = None) -> HybridTransform:
    """Learn a Laplacian whose leading eigenvectors are ``basis``.

    Starts from ``C = C_bar + rho I`` and alternates one (or more) dual BCD
    sweeps with :func:`~hybridgt.projection.project_to_cone`. The projection
    usually leaves the box, so each later round first restores a feasible
    PD point with :func:`restore_feasibility`. The returned
    Laplacian is the iterate with the lowest objective, assembled spectrally
    as ``sum (1/mu_i) w_i w_i^T``.

    ``monitor``, if given, is called as ``monitor("column", C)`` after every
    accepted column update, ``monitor("sweep", C)`` after every BCD sweep,
    ``monitor("projection", C)`` after every projection and
    ``monitor("restore", C)`` after every return to the box.
    """
    cfg = cfg or GlassoConfig()
    c_bar = symmetrize(c_bar)
    n = c_bar.shape[0]
    if basis.n != n:
        raise DimensionError(f"basis dimension {basis.n} != covariance dimension {n}")
    if not np.any(c_bar):
        raise ValueError("covariance is identically zero")
    if min_eigenvalue(c_bar) < -1e-8 * max(1.0, float(np.max(np.abs(c_bar)))):
        raise NotPSDError("empirical covariance is not PSD")
    rho = cfg.resolve_rho(c_bar)
    scale = max(float(np.mean(np.diag(c_bar))), np.finfo(float).tiny)

    c = c_bar + rho * np.eye(n)
    trace: list[float] = []
    best: tuple[float, ProjectionResult] | None = None
    skipped = 0
    converged = False
    rounds = 0
    for rounds in range(1, cfg.outer_max + 1):
        c_prev = c.copy()
        if rounds > 1:
            c = restore_feasibility(c, c_bar, rho)
            if monitor:
                monitor("restore", c)
        for _ in range(cfg.bcd_sweeps_per_round):
            for j in range(n):
                if _column_step(c, c_bar, j, rho, cfg.cd_tol, cfg.cd_max_sweeps):
                    if monitor:
                        monitor("column", c)
                else:
                    skipped += 1
            if monitor:
                monitor("sweep", c)
        proj = project_to_cone(c, basis, cfg.pg)
        c = proj.reconstruct()
        if monitor:
            monitor("projection", c)
        obj = _spectral_objective(proj, c_bar, rho)
        trace.append(obj)
        if best is None or obj < best[0]:
            best = (obj, proj)
        if np.max(np.abs(c - c_prev)) <= cfg.conv_tol * scale:
            converged = True
            break
    if skipped:
        log.debug("%d column updates had no PD completion inside the box", skipped)

    proj = best[1]
    mu = proj.decomp.values
    w = proj.decomp.vectors
    return HybridTransform(
        laplacian=symmetrize((w.T / mu) @ w),
        covariance=proj.reconstruct(),
        basis_rows=w.copy(),
        eigenvalues=mu.copy(),
        model_count=basis.k,
        rho=rho,
        objective_trace=trace,
        rounds=rounds,
        converged=converged,
        skipped_updates=skipped,
    )
