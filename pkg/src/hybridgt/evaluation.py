"""Energy-compaction and stability evaluation of DCT, KLT and hybrid transforms."""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bases import adst_basis_2d, adst_model_basis, dct_basis_2d, klt_from_covariance
from .glasso import GlassoConfig, learn_hybrid_laplacian
from .residuals import TARGET, GrayImage, ResidualField, neighbor_covariance

log = logging.getLogger(__name__)

TRANSFORM_KINDS = ("dct", "adst", "klt", "hybrid")
CSV_HEADER = ("transform", "index", "mean_cumulative", "sd")


def hybrid_label(k: int) -> str:
    return f"Hybrid-ADST(K={k})"


@dataclass(frozen=True)
class CompactionCurve:
    """Mean cumulative-energy percentage and its per-index spread over blocks."""

    cumulative: np.ndarray
    sd_per_index: np.ndarray
    block_count: int


@dataclass
class CompactionReport:
    """Curves per transform label plus the run configuration."""

    curves: dict[str, CompactionCurve] = field(default_factory=dict)
    image_id: str = ""
    config: dict = field(default_factory=dict)
    target_count: int = 0
    skipped_targets: int = 0
    zero_blocks: int = 0


def analyze_block(t, x) -> np.ndarray:
    """Transform coefficients ``T @ x``."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(getattr(x, "values", x), dtype=float)
    if t.ndim != 2 or t.shape[1] != x.shape[-1]:
        raise ValueError(f"transform of shape {t.shape} cannot analyze a length-{x.shape[-1]} block")
    return t @ x


def block_energy_curve(alpha) -> np.ndarray:
    """Cumulative energy percentage of coefficients sorted by decreasing energy.

    Accepts a single coefficient vector or a stack of them (one per row).
    The last entry is exactly 100.
    """
    a = np.asarray(alpha, dtype=float)
    energy = -np.sort(-(a * a), axis=-1)
    cum = np.cumsum(energy, axis=-1)
    total = cum[..., -1:]
    if np.any(total <= 0):
        raise ValueError("all-zero coefficient vector has no energy distribution")
    return (cum / total) * 100.0


def aggregate_curves(curves) -> CompactionCurve:
    """Per-index mean and population standard deviation across block curves."""
    arr = np.asarray(curves, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[0] == 0:
        raise ValueError("no curves to aggregate")
    return CompactionCurve(arr.mean(axis=0), arr.std(axis=0), arr.shape[0])


def average_sd(curve: CompactionCurve) -> float:
    return float(np.mean(curve.sd_per_index))


def _target_origins(img: GrayImage) -> list[tuple[int, int]]:
    return [(x, y)
            for y in range(0, img.height - TARGET + 1, TARGET)
            for x in range(0, img.width - TARGET + 1, TARGET)]


def _evaluate_target(origin, field_, img, labels, k_values, m, cfg):
    """Curves of every transform for one target block, or None if it is skipped."""
    x, y = origin
    blocks = field_.region(x, y, TARGET, TARGET)
    nonzero = np.any(blocks != 0, axis=1)
    blocks = blocks[nonzero]
    zero = int((~nonzero).sum())
    est = neighbor_covariance(img, origin, m, field=field_)
    if est.fallback or not np.any(est.matrix):
        return None, zero
    out = {}
    if "dct" in labels:
        out["DCT"] = dct_basis_2d(4)
    if "adst" in labels:
        out["ADST"] = adst_basis_2d(4)
    if "klt" in labels:
        out["KLT"] = klt_from_covariance(est.matrix)
    if "hybrid" in labels:
        for k in k_values:
            ht = learn_hybrid_laplacian(est.matrix, adst_model_basis(k), cfg)
            out[hybrid_label(k)] = ht.basis_rows
    if len(blocks) == 0:
        return {name: np.zeros((0, 16)) for name in out}, zero
    return {name: block_energy_curve(blocks @ t.T) for name, t in out.items()}, zero


def compare_transforms(img: GrayImage, k_values=(1, 4), m: int | None = 45,
                       cfg: GlassoConfig | None = None,
                       transforms=("dct", "klt", "hybrid"),
                       remove_mean: bool = True, mean_mode: str = "residual",
                       threads: int = 1, image_id: str = "") -> CompactionReport:
    """Cumulative-energy curves of every transform over a whole image.

    Every 16x16 target block with at least one causal neighbour gets its own
    covariance from those neighbours; KLT and one hybrid transform per ``K``
    are built from it and applied, along with the fixed DCT, to all 16 DC4
    residuals of the target. Targets without a usable covariance are left
    out of every curve so that all curves cover the same blocks, and
    all-zero residuals are dropped (their count is kept in the report).
    """
    if img.width < 2 * TARGET or img.height < 2 * TARGET:
        raise ValueError("image must be at least 32x32 to have a target with neighbours")
    unknown = set(transforms) - set(TRANSFORM_KINDS)
    if unknown:
        raise ValueError(f"unknown transforms {sorted(unknown)}")
    cfg = cfg or GlassoConfig()
    k_values = tuple(int(k) for k in k_values)
    field_ = ResidualField(img, remove_mean, mean_mode)
    origins = _target_origins(img)

    def work(origin):
        return _evaluate_target(origin, field_, img, set(transforms), k_values, m, cfg)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, origins))
    else:
        results = [work(o) for o in origins]

    collected: dict[str, list[np.ndarray]] = {}
    skipped = zero_blocks = 0
    for curves, zero in results:
        if curves is None:
            skipped += 1
            continue
        zero_blocks += zero
        for name, arr in curves.items():
            collected.setdefault(name, []).append(arr)

    report = CompactionReport(
        image_id=image_id,
        config={"k": ",".join(map(str, k_values)), "m": "all" if m is None else m,
                "rho": "auto" if cfg.rho is None else cfg.rho,
                "mean_removal": mean_mode if remove_mean else "off"},
        target_count=len(origins) - skipped,
        skipped_targets=skipped,
        zero_blocks=zero_blocks,
    )
    for name in _label_order(collected):
        arr = np.concatenate(collected[name])
        if len(arr):
            report.curves[name] = aggregate_curves(arr)
    return report


def _label_order(names) -> list[str]:
    fixed = ["DCT", "ADST", "KLT"]
    hybrids = sorted((n for n in names if n.startswith("Hybrid")),
                     key=lambda s: int(s.split("=")[1].rstrip(")")))
    return [n for n in fixed if n in names] + hybrids


def emit_csv(report: CompactionReport, path, comments: dict | None = None) -> None:
    """Write one row per (transform, 1-based index).

    ``path`` is a filesystem path or an open text stream. ``comments`` are
    written first as ``# key=value`` lines.
    """
    if hasattr(path, "write"):
        _write_rows(report, path, comments)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(report, fh, comments)


def _write_rows(report, fh, comments) -> None:
    for key, value in (comments or {}).items():
        fh.write(f"# {key}={value}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for name, curve in report.curves.items():
        for i, (mean, sd) in enumerate(zip(curve.cumulative, curve.sd_per_index), start=1):
            writer.writerow((name, i, repr(float(mean)), repr(float(sd))))


def read_csv(path: str | os.PathLike) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Parse a file written by :func:`emit_csv` into ``{label: (mean, sd)}``."""
    rows: dict[str, list[tuple[int, float, float]]] = {}
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    for name, idx, mean, sd in reader:
        rows.setdefault(name, []).append((int(idx), float(mean), float(sd)))
    out = {}
    for name, items in rows.items():
        items.sort()
        out[name] = (np.array([r[1] for r in items]), np.array([r[2] for r in items]))
    return out
