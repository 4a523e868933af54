"""Command-line interface of the model bridge.

Exit codes: 0 success, 1 data error (bad corpus/checkpoint), 2 configuration
error (bad parameters), 3 internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

import transformers

from tweetlab.corpus import CorpusError

from . import __version__
from .config import BridgeConfig, BridgeConfigError, BridgeError
from .export import export_embeddings, export_probabilities, export_toxicity

EXIT_OK = 0
EXIT_DATA = 1
EXIT_CONFIG = 2
EXIT_INTERNAL = 3


def _config(args: argparse.Namespace) -> BridgeConfig:
    return BridgeConfig(
        corpus_path=args.corpus,
        output_path=args.out,
        model_id=args.model,
        batch_size=args.batch_size,
        device=args.device,
        max_length=args.max_length,
    )


def cmd_embed(args: argparse.Namespace) -> int:
    written, truncated = export_embeddings(_config(args))
    print(f"wrote {written} embedding records ({truncated} truncated)")
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    detector = args.detector or Path(args.model).name
    run_id = args.run_id or f"{detector}:{Path(args.corpus).stem}"
    written = export_probabilities(_config(args), run_id=run_id, detector_name=detector)
    print(f"wrote {written} probability records for run {run_id!r}")
    return EXIT_OK


def cmd_toxicity(args: argparse.Namespace) -> int:
    written = export_toxicity(_config(args))
    print(f"wrote toxicity scores for {written} samples")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", required=True, help="corpus file to score")
    parser.add_argument("--model", required=True, help="checkpoint path or identifier")
    parser.add_argument("--out", required=True, help="output file")
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--max-length", type=int, help="override the model's sequence limit")
    parser.add_argument("--device", default="cpu")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bridge",
        description="Export model-computed input files (token embeddings, detector "
        "probabilities, toxicity scores) in the corpus toolkit's formats.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="per-token last-layer embeddings")
    _add_common(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("classify", help="2-class detector probabilities")
    _add_common(p)
    p.add_argument("--run-id", help="default: '<detector>:<corpus stem>'")
    p.add_argument("--detector", help="default: the checkpoint's base name")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("toxicity", help="six-category toxicity scores")
    _add_common(p)
    p.set_defaults(func=cmd_toxicity)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    transformers.logging.disable_progress_bar()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BridgeConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BridgeError, CorpusError, FileNotFoundError, IsADirectoryError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - CLI boundary maps all failures
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
