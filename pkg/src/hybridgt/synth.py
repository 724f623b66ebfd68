"""Seeded synthetic test material: AR(1) images, nonstationary images and blocks."""

from __future__ import annotations

import numpy as np
from scipy.signal import lfilter

from .residuals import GrayImage


def ar1_field(shape: tuple[int, int], rho: float, rng: np.random.Generator) -> np.ndarray:
    """Separable 2D AR(1) Gaussian field with unit marginal variance."""
    if not -1 < rho < 1:
        raise ValueError("rho must lie in (-1, 1)")
    h, w = shape
    burn = int(np.ceil(np.log(1e-6) / np.log(max(abs(rho), 1e-3)))) if rho else 0
    noise = rng.standard_normal((h + burn, w + burn))
    f = lfilter([np.sqrt(1 - rho * rho)], [1.0, -rho], noise, axis=0)
    f = lfilter([np.sqrt(1 - rho * rho)], [1.0, -rho], f, axis=1)
    return f[burn:, burn:]


def _to_image(field: np.ndarray, mean: float, std: float) -> GrayImage:
    px = np.clip(np.rint(mean + std * field), 0, 255).astype(np.uint8)
    return GrayImage(px)


def ar1_image(size: int = 512, rho: float = 0.95, seed: int = 0,
              mean: float = 128.0, std: float = 40.0) -> GrayImage:
    """Square 8-bit image sampled from a separable AR(1) process."""
    rng = np.random.default_rng(seed)
    return _to_image(ar1_field((size, size), rho, rng), mean, std)


def piecewise_image(size: int = 512, tile: int = 64, seed: int = 0) -> GrayImage:
    """Mosaic of AR(1) tiles with independent correlation, contrast, and mean.

    Each tile draws its horizontal and vertical correlation, brightness and
    contrast at random, so statistics estimated from a neighbouring tile are
    often wrong for the current one.
    """
    rng = np.random.default_rng(seed)
    out = np.empty((size, size))
    for ty in range(0, size, tile):
        for tx in range(0, size, tile):
            h = min(tile, size - ty)
            w = min(tile, size - tx)
            rv, rh = rng.uniform(0.3, 0.98, size=2)
            noise = rng.standard_normal((h + 64, w + 64))
            f = lfilter([np.sqrt(1 - rv * rv)], [1.0, -rv], noise, axis=0)
            f = lfilter([np.sqrt(1 - rh * rh)], [1.0, -rh], f, axis=1)[64:, 64:]
            out[ty:ty + h, tx:tx + w] = rng.uniform(60, 190) + rng.uniform(8, 45) * f
    return _to_image(out, 0.0, 1.0)


def ar1_covariance(n: int = 4, rho: float = 0.95) -> np.ndarray:
    """Covariance of a vectorized ``n x n`` block of the separable AR(1) field."""
    idx = np.arange(n)
    r1 = rho ** np.abs(idx[:, None] - idx[None, :])
    return np.kron(r1, r1)


def gaussian_blocks(count: int, cov: np.ndarray, seed: int = 0) -> np.ndarray:
    """``count`` zero-mean Gaussian vectors with covariance ``cov``, shape (count, n)."""
    rng = np.random.default_rng(seed)
    w, v = np.linalg.eigh(cov)
    root = v * np.sqrt(np.clip(w, 0, None))
    return rng.standard_normal((count, cov.shape[0])) @ root.T
