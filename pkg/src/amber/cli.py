"""Command-line entry point: ``amber <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import AmberError
from .formats import FORMAT_VERSION, dumps
from .pipeline import FAMILIES, METHODS, PipelineConfig, run_pipeline


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random draw (default 0)")
    common.add_argument("--format-version", type=int, default=FORMAT_VERSION)
    common.add_argument("-o", "--output", help="write JSON here instead of stdout")

    parser = argparse.ArgumentParser(prog="amber", description="Ambiguity-aware emotion label processing.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a representation against its scheme")
    p.add_argument("representation")
    p.add_argument("scheme", nargs="?")

    p = sub.add_parser("aggregate", parents=[common], help="fit ambiguity functions to annotation traces")
    p.add_argument("traces")
    p.add_argument("scheme")
    p.add_argument("--family", choices=FAMILIES, default="gaussian")
    p.add_argument("--components", type=int, default=2, help="mixture components for --family gmm")
    p.add_argument("--delay", default="0", help="static lag in seconds, or 'auto'")
    p.add_argument("--reference-annotator", help="reference trace for --delay auto (default: first in file)")
    p.add_argument("--normalize", action="store_true", help="match annotator means and variances first")

    p = sub.add_parser("qa-rank", parents=[common], help="qualitative-agreement ranking of segments")
    p.add_argument("traces")
    p.add_argument("--segments", required=True)
    p.add_argument("--threshold", type=float, default=0.05)
    p.add_argument("--agreement", type=float, default=1.0)
    p.add_argument("--attribute")
    p.add_argument("--scheme")

    p = sub.add_parser("convert", parents=[common], help="collapse a representation to single values")
    p.add_argument("representation")
    p.add_argument("scheme", nargs="?")
    p.add_argument("--policy", choices=("mode", "mean"), default="mode")

    p = sub.add_parser("divergence", parents=[common], help="loss between two representations")
    p.add_argument("true")
    p.add_argument("pred")
    p.add_argument("--method", choices=METHODS, default="kl")
    p.add_argument("--scheme")

    p = sub.add_parser("report", parents=[common], help="summarise any amber artifact")
    p.add_argument("artifact")
    p.add_argument("--scheme")
    return parser


def config_from_args(args) -> PipelineConfig:
    cmd = args.command
    kw = dict(command=cmd, output_path=args.output, rng_seed=args.seed, format_version=args.format_version)
    if cmd == "validate":
        kw.update(inputs=(args.representation,), scheme_path=args.scheme)
    elif cmd == "aggregate":
        kw.update(
            inputs=(args.traces,),
            scheme_path=args.scheme,
            family=args.family,
            components=args.components,
            delay=args.delay,
            reference_annotator=args.reference_annotator,
            normalize=args.normalize,
        )
    elif cmd == "qa-rank":
        kw.update(
            inputs=(args.traces,),
            segments_path=args.segments,
            threshold=args.threshold,
            agreement=args.agreement,
            attribute=args.attribute,
            scheme_path=args.scheme,
        )
    elif cmd == "convert":
        kw.update(inputs=(args.representation,), scheme_path=args.scheme, policy=args.policy)
    elif cmd == "divergence":
        kw.update(inputs=(args.true, args.pred), method=args.method, scheme_path=args.scheme)
    elif cmd == "report":
        kw.update(inputs=(args.artifact,), scheme_path=args.scheme)
    return PipelineConfig(**kw)


def main(argv=None) -> int:
    level = os.environ.get("AMBER_LOG", "WARNING").upper()
    if not isinstance(logging.getLevelName(level), int):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        result = run_pipeline(config)
    except (AmberError, ValueError, KeyError, OSError) as exc:
        print(f"amber {args.command}: error: {exc}", file=sys.stderr)
        return 2
    text = dumps(result)
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if config.command == "validate" and not result["valid"]:
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
