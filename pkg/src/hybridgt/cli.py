"""Command-line entry point: ``hybridgt {bases,learn,evaluate,synth}``.

Exit codes: 0 success, 1 usage error, 2 data or I/O error. Diagnostics go to
stderr; data goes to ``--out`` or stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from .bases import adst_basis_1d, adst_basis_2d, adst_model_basis, dct_basis_1d, dct_basis_2d, klt_from_covariance
from .errors import HybridGTError
from .evaluation import TRANSFORM_KINDS, compare_transforms, emit_csv
from .glasso import GlassoConfig, learn_hybrid_laplacian
from .projection import PgOptions
from .residuals import MEAN_MODES, load_pgm, write_pgm
from .synth import ar1_covariance, ar1_image, gaussian_blocks, piecewise_image

log = logging.getLogger("hybridgt")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
BASIS_TYPES = ("dct", "adst", "dct2d", "adst2d", "klt")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _int_range(lo, hi=None):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
        if v < lo or (hi is not None and v > hi):
            raise argparse.ArgumentTypeError(f"{v} outside [{lo}, {'inf' if hi is None else hi}]")
        return v
    return parse


def _nonneg_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v >= 0 or math.isinf(v):
        raise argparse.ArgumentTypeError(f"{text} must be a finite value >= 0")
    return v


def _pos_float(text):
    v = _nonneg_float(text)
    if v == 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _corr(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not -1 < v < 1:
        raise argparse.ArgumentTypeError("correlation must lie in (-1, 1)")
    return v


def _k_list(text):
    parse = _int_range(0, 16)
    try:
        ks = [parse(t) for t in text.split(",") if t.strip()]
    except argparse.ArgumentTypeError as exc:
        raise argparse.ArgumentTypeError(f"K list {text!r}: {exc}")
    if not ks:
        raise argparse.ArgumentTypeError("empty K list")
    return tuple(dict.fromkeys(ks))


def _transform_list(text):
    items = tuple(dict.fromkeys(t.strip() for t in text.split(",") if t.strip()))
    bad = [t for t in items if t not in TRANSFORM_KINDS]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"transforms must be from {','.join(TRANSFORM_KINDS)}")
    return items


def _add_pg(p):
    g = p.add_argument_group("projection solver")
    g.add_argument("--gamma", type=_pos_float, default=10.0, help="augmented Lagrangian weight (default 10)")
    g.add_argument("--pg-tol", type=_pos_float, default=1e-8, help="PG stopping tolerance (default 1e-8)")
    g.add_argument("--pg-iters", type=_int_range(1), default=1000, help="PG iteration cap (default 1000)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hybridgt", description="Hybrid graph transforms for 4x4 intra-prediction residuals.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    common = _Parser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS,
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bases", parents=[common], help="print a transform matrix as CSV (one basis vector per row)")
    p.add_argument("--type", choices=BASIS_TYPES, required=True)
    p.add_argument("--n", type=_int_range(1, 64), default=4, help="1D length (default 4)")
    p.add_argument("--cov", help="covariance CSV, required for --type klt")
    p.add_argument("--out", help="output CSV (default stdout)")

    p = sub.add_parser("learn", parents=[common], help="learn a hybrid transform from a covariance CSV")
    p.add_argument("--cov", required=True, help="N x N covariance CSV, N = n*n")
    p.add_argument("--k", type=_int_range(0, 16), default=4, help="number of ADST model vectors (default 4)")
    p.add_argument("--rho", type=_nonneg_float, default=None, help="GLASSO weight (default 0.01 * mean diagonal)")
    p.add_argument("--out", help="transform CSV (default stdout); a .json summary is written next to it")
    _add_pg(p)

    p = sub.add_parser("evaluate", parents=[common], help="compare transforms on an image and write curves as CSV")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--image", help="binary PGM (P5, maxval 255)")
    src.add_argument("--synthetic", choices=("ar1", "piecewise"))
    p.add_argument("--size", type=_int_range(32, 8192), default=512, help="synthetic image size (default 512)")
    p.add_argument("--seed", type=int, default=0, help="synthetic image seed (default 0)")
    p.add_argument("--corr", type=_corr, default=0.95, help="AR(1) correlation for --synthetic ar1 (default 0.95)")
    p.add_argument("--k", type=_k_list, default=(1, 4), help="comma-separated K values (default 1,4)")
    p.add_argument("--samples", type=_int_range(1), default=45, help="residuals per covariance, M (default 45)")
    p.add_argument("--rho", type=_nonneg_float, default=None, help="GLASSO weight (default 0.01 * mean diagonal)")
    p.add_argument("--transforms", type=_transform_list, default=("dct", "klt", "hybrid"),
                   help="comma-separated subset of dct,adst,klt,hybrid (default dct,klt,hybrid)")
    p.add_argument("--threads", type=_int_range(1), default=os.cpu_count() or 1,
                   help="worker threads (default: available CPUs)")
    p.add_argument("--no-mean-removal", action="store_true", help="keep the local mean in the residuals")
    p.add_argument("--mean-mode", choices=MEAN_MODES, default="residual",
                   help="how the local mean of the block above is measured (default residual)")
    p.add_argument("--out", help="output CSV (default stdout)")
    _add_pg(p)

    p = sub.add_parser("synth", parents=[common], help="write seeded synthetic residual blocks (CSV) or an image (PGM)")
    p.add_argument("--seed", type=int, default=0)
    what = p.add_mutually_exclusive_group(required=True)
    what.add_argument("--blocks", type=_int_range(1), help="number of Gaussian AR(1) blocks to write as CSV")
    what.add_argument("--image", choices=("ar1", "piecewise"), help="kind of synthetic image to write as PGM")
    p.add_argument("--corr", type=_corr, default=0.95, help="AR(1) correlation (default 0.95)")
    p.add_argument("--size", type=_int_range(4, 8192), default=512, help="image size (default 512)")
    p.add_argument("--out", help="output file (default stdout)")
    return parser


def _write_text(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _matrix_csv(m: np.ndarray) -> str:
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in m)


def _load_matrix(path: str) -> np.ndarray:
    m = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{path}: covariance must be square, got {m.shape}")
    return m


def _pg_options(args) -> PgOptions:
    return PgOptions(gamma=args.gamma, max_iters=args.pg_iters, tol=args.pg_tol)


def _cmd_bases(args) -> None:
    if args.type == "klt":
        if args.cov is None:
            raise UsageError("bases: --cov is required for --type klt")
        t = klt_from_covariance(_load_matrix(args.cov))
    else:
        t = {"dct": dct_basis_1d, "adst": adst_basis_1d,
             "dct2d": dct_basis_2d, "adst2d": adst_basis_2d}[args.type](args.n)
    _write_text(_matrix_csv(t), args.out)


def _cmd_learn(args) -> None:
    c = _load_matrix(args.cov)
    n = math.isqrt(c.shape[0])
    if n * n != c.shape[0]:
        raise ValueError(f"covariance size {c.shape[0]} is not a square block size")
    if args.k > c.shape[0]:
        raise UsageError(f"learn: --k {args.k} exceeds dimension {c.shape[0]}")
    cfg = GlassoConfig(rho=args.rho, pg=_pg_options(args))
    ht = learn_hybrid_laplacian(c, adst_model_basis(args.k, n), cfg)
    _write_text(_matrix_csv(ht.basis_rows), args.out)
    summary = {"k": args.k, "rho": ht.rho, "rounds": ht.rounds, "converged": ht.converged,
               "objective": ht.objective, "skipped_updates": ht.skipped_updates,
               "eigenvalues": [float(v) for v in ht.eigenvalues]}
    if args.out is None:
        log.info("learn summary: %s", json.dumps(summary))
    else:
        with open(args.out + ".json", "w") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")


def _cmd_evaluate(args) -> None:
    if args.image is not None:
        img = load_pgm(args.image)
        image_id = os.path.basename(args.image)
    elif args.synthetic == "ar1":
        img = ar1_image(args.size, args.corr, args.seed)
        image_id = f"ar1(size={args.size},corr={args.corr},seed={args.seed})"
    else:
        img = piecewise_image(args.size, seed=args.seed)
        image_id = f"piecewise(size={args.size},seed={args.seed})"
    cfg = GlassoConfig(rho=args.rho, pg=_pg_options(args))
    report = compare_transforms(
        img, k_values=args.k, m=args.samples, cfg=cfg, transforms=args.transforms,
        remove_mean=not args.no_mean_removal, mean_mode=args.mean_mode,
        threads=args.threads, image_id=image_id)
    log.info("%d targets evaluated, %d skipped, %d all-zero residuals dropped",
             report.target_count, report.skipped_targets, report.zero_blocks)
    # thread count and output path are left out so that outputs compare byte for byte
    comments = {"image": image_id, "k": ",".join(map(str, args.k)), "samples": args.samples,
                "rho": "auto" if args.rho is None else args.rho,
                "transforms": ",".join(args.transforms),
                "mean_removal": "off" if args.no_mean_removal else args.mean_mode,
                "gamma": args.gamma, "pg_tol": args.pg_tol, "pg_iters": args.pg_iters,
                "targets": report.target_count, "skipped_targets": report.skipped_targets,
                "zero_blocks": report.zero_blocks}
    emit_csv(report, args.out if args.out is not None else sys.stdout, comments)


def _cmd_synth(args) -> None:
    if args.image is not None:
        if args.out is None:
            raise UsageError("synth: --out is required with --image")
        img = (ar1_image(args.size, args.corr, args.seed) if args.image == "ar1"
               else piecewise_image(args.size, seed=args.seed))
        write_pgm(img, args.out)
        return
    blocks = gaussian_blocks(args.blocks, ar1_covariance(4, args.corr), seed=args.seed)
    header = f"# seed={args.seed}\n# corr={args.corr}\n# blocks={args.blocks}\n"
    _write_text(header + _matrix_csv(blocks), args.out)


COMMANDS = {"bases": _cmd_bases, "learn": _cmd_learn, "evaluate": _cmd_evaluate, "synth": _cmd_synth}


def run(argv=None) -> int:
    """Parse ``argv`` and run the chosen subcommand, returning the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(str(exc) if str(exc).endswith("\n") else f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except (HybridGTError, OSError, ValueError) as exc:
        sys.stderr.write(f"hybridgt {args.command}: {exc}\n")
        return EXIT_DATA
    return EXIT_OK


def main() -> None:
    sys.exit(run())
