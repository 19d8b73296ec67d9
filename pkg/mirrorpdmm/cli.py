from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from pydantic import ValidationError

from ._version import __version__
from .config import ExperimentConfig, PMatrixKind
from .errors import InputError, SolverError
from .experiment import generate_instance, load_graph, run_experiment, write_instance
from .graph import build_laplacian_averaging, optimize_averaging_matrix
from .report import report
from .settings import RuntimeSettings
from .utils import write_json

logger = logging.getLogger("mirrorpdmm")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_SOLVER = 2


def _gen(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    cfg = ExperimentConfig(
        m=args.m,
        n=args.n,
        p_edge=args.edge_prob,
        seed=args.seed,
        p_matrix=args.p_matrix,
        optimize_iters=args.optimize_iters,
    )
    instance = generate_instance(cfg)
    path = write_instance(args.out, instance, cfg.seed, cfg.p_edge, settings.json_serializer)
    logger.info("Wrote instance to %s", path)
    return EXIT_OK


def _run(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    try:
        raw = settings.json_deserializer(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise InputError(f"cannot read config {args.config}: {e}") from e
    cfg = ExperimentConfig.model_validate(raw)
    result = run_experiment(
        cfg, args.out_dir, workers=settings.workers, dumps=settings.json_serializer
    )
    logger.info("Wrote traces and summary to %s", result.out_dir)
    return EXIT_SOLVER if result.failed else EXIT_OK


def _optimize_p(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    graph = load_graph(args.graph)
    baseline = build_laplacian_averaging(graph)
    optimized = optimize_averaging_matrix(graph, args.iters)
    write_json(
        args.out,
        {
            "graph": graph.to_dict(),
            "averaging": optimized.to_dict(),
            "lambda2": optimized.spectrum.lambda2,
            "laplacian_lambda2": baseline.spectrum.lambda2,
        },
        settings.json_serializer,
    )
    return EXIT_OK


def _report(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    result = report(args.traces, args.svg)
    sys.stdout.write(result.summary)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mirrorpdmm", description="Bregman and Euclidean PDMM experiments"
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="generate a seeded problem instance")
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--edge-prob", type=float, default=0.2)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument(
        "--p-matrix", choices=[k.value for k in PMatrixKind], default=PMatrixKind.LAPLACIAN.value
    )
    gen.add_argument("--optimize-iters", type=int, default=500)
    gen.add_argument("--out", type=Path, required=True)
    gen.set_defaults(handler=_gen)

    run = commands.add_parser("run", help="run an experiment config")
    run.add_argument("--config", type=Path, required=True)
    run.add_argument("--out-dir", type=Path, default=None)
    run.set_defaults(handler=_run)

    optimize = commands.add_parser("optimize-p", help="minimize |λ₂| of an averaging matrix")
    optimize.add_argument("--graph", type=Path, required=True)
    optimize.add_argument("--iters", type=int, default=500)
    optimize.add_argument("--out", type=Path, required=True)
    optimize.set_defaults(handler=_optimize_p)

    plot = commands.add_parser("report", help="plot traces to SVG")
    plot.add_argument("--traces", type=Path, nargs="+", required=True)
    plot.add_argument("--svg", type=Path, required=True)
    plot.set_defaults(handler=_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    settings = RuntimeSettings()
    logging.basicConfig(level=settings.log_level.upper(), format=settings.log_format)
    try:
        return int(args.handler(args, settings))
    except (InputError, ValidationError) as e:
        logger.error("Invalid input: %s", e)
        return EXIT_INVALID
    except SolverError as e:
        logger.error("Solver failed: %s", e)
        return EXIT_SOLVER
