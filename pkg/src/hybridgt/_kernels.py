"""Compiled inner loops. Problem sizes are tiny (n = 16), so interpreter
overhead, not flops, dominates; numba removes it."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def pg_iterate(e, y, gamma, step, max_iters, tol):
    """Augmented-Lagrangian proximal-gradient loop.

    Returns ``(v, iterations, converged)``; ``v`` is not renormalized.
    Stops once both the primal step ``|v_new - v|`` and the multiplier step
    ``gamma |Y^T v|`` are below ``tol``: the iteration spirals, so a small
    primal step alone can occur far from feasibility.
    """
    n = e.shape[0]
    m = y.shape[1]
    ee = 0.0
    for a in range(n):
        ee += e[a] * e[a]
    v = e / ee
    zeta = np.zeros(m)
    ytv = np.empty(m)
    v_new = np.empty(n)
    for t in range(max_iters):
        for k in range(m):
            s = 0.0
            for a in range(n):
                s += y[a, k] * v[a]
            ytv[k] = s
        nrm2 = 0.0
        for a in range(n):
            g = -e[a]
            for k in range(m):
                g += y[a, k] * (zeta[k] + 2.0 * gamma * ytv[k])
            v_new[a] = v[a] - step * g
            nrm2 += v_new[a] * v_new[a]
        if nrm2 > 1.0:
            scale = 1.0 / np.sqrt(nrm2)
            for a in range(n):
                v_new[a] *= scale
        dual2 = 0.0
        for k in range(m):
            zeta[k] += gamma * ytv[k]
            dual2 += (gamma * ytv[k]) ** 2
        diff2 = 0.0
        for a in range(n):
            d = v_new[a] - v[a]
            diff2 += d * d
            v[a] = v_new[a]
        if np.sqrt(diff2) <= tol and np.sqrt(dual2) <= tol:
            return v, t + 1, True
    return v, max_iters, False


@njit(cache=True, nogil=True)
def box_qp_cd(q, y, lo, hi, tol, max_sweeps):
    """Cyclic coordinate descent for ``min y^T Q y`` subject to ``lo <= y <= hi``.

    ``y`` is the warm start and is updated in place. Each coordinate step is
    the exact 1D minimizer clipped to its interval. Returns the sweep count.
    """
    n = y.shape[0]
    for i in range(n):
        y[i] = min(max(y[i], lo[i]), hi[i])
    qy = q @ y
    for sweep in range(max_sweeps):
        biggest = 0.0
        for i in range(n):
            g = qy[i] - q[i, i] * y[i]
            target = min(max(-g / q[i, i], lo[i]), hi[i])
            delta = target - y[i]
            if delta != 0.0:
                y[i] = target
                for a in range(n):
                    qy[a] += q[a, i] * delta
                if abs(delta) > biggest:
                    biggest = abs(delta)
        if biggest <= tol:
            return sweep + 1
    return max_sweeps
