"""Command-line entry point: ``project sweep`` and ``project run``."""

from __future__ import annotations

import argparse
import logging
import sys

from .sweep import ConfigError, parse_config, sweep


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="feature CSV with a header row")
    p.add_argument("--label-col", dest="label_column", help="name of the label column (default: label)")
    p.add_argument("--out", dest="output", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--distance", choices=["euclidean", "cosine"])
    p.add_argument("--k-max", dest="k_max", type=int, help="largest neighborhood for the hit curve")
    p.add_argument("--standardize", action="store_const", const=True, default=None,
                   help="scale every feature column to unit variance")
    p.add_argument("--record-seconds", dest="record_seconds", action="store_const", const=True,
                   default=None, help="write wall-clock seconds into report.csv")
    # grids: comma-separated lists
    p.add_argument("--control-points", dest="control_points")
    p.add_argument("--neighbors")
    p.add_argument("--perplexity")
    p.add_argument("--iterations")
    p.add_argument("--pca-dims", dest="pca_dims", help="PCA dimensions before t-SNE ('none' to skip)")
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--exaggeration", dest="exaggeration_factor", type=float)
    p.add_argument("--exaggeration-iters", dest="exaggeration_iters", type=int)


OVERRIDE_KEYS = (
    "input", "label_column", "output", "seed", "distance", "k_max", "standardize", "record_seconds",
    "control_points", "neighbors", "perplexity", "iterations", "pca_dims", "learning_rate",
    "exaggeration_factor", "exaggeration_iters", "method",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="project", description="t-SNE and LSP projection sweeps")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a parameter grid from a config file")
    p_sweep.add_argument("--config", required=True, help="flat key = value config file")
    p_sweep.add_argument("--method", choices=["tsne", "lsp"])
    _add_common(p_sweep)

    p_run = sub.add_parser("run", help="run a single projection given on the command line")
    p_run.add_argument("--method", required=True, choices=["tsne", "lsp"])
    _add_common(p_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: getattr(args, k, None) for k in OVERRIDE_KEYS}
    try:
        config = parse_config(args.config if args.command == "sweep" else None, overrides)
        results = sweep(config)
    except (ConfigError, FileNotFoundError, ValueError) as err:
        print(f"project: error: {err}", file=sys.stderr)
        return 2
    failed = 0
    for row, _ in results:
        params = " ".join(f"{k}={v}" for k, v in row.params.items())
        score = "failed: " + row.error if row.error else f"silhouette={row.silhouette:.4f}"
        print(f"{row.method} {params} {score}")
        failed += row.error is not None
    print(f"wrote {config.output}/report.csv ({len(results)} rows)")
    return 1 if failed == len(results) else 0


if __name__ == "__main__":
    sys.exit(main())
