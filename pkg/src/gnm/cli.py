"""Command-line entry point: ``gnm select|labels|train|mitigate|sweep-noise``."""

from __future__ import annotations

import argparse
import logging
import sys

from .pipeline import (
    Manifest,
    PipelineError,
    cmd_labels,
    cmd_mitigate,
    cmd_select,
    cmd_sweep_noise,
    cmd_train,
)

COMMANDS = {
    "select": cmd_select,
    "labels": cmd_labels,
    "train": cmd_train,
    "mitigate": cmd_mitigate,
    "sweep-noise": cmd_sweep_noise,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gnm", description="Graph-network error mitigation for noisy VQE energies.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--manifest", required=True, help="run manifest (JSON)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--epsilon", type=float, help="screening threshold in hartree")
    parser.add_argument("--label-kind", choices=("ideal", "srem"))
    parser.add_argument("--k", type=int, help="graph-convolution hidden width")
    parser.add_argument("--lr", type=float, help="Adam learning rate")
    parser.add_argument("--max-3p-snippets", type=int)
    parser.add_argument("--oracle", action="store_true", default=None, help="also compute noiseless reference energies")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        manifest = Manifest.load(
            args.manifest,
            seed=args.seed,
            epsilon=args.epsilon,
            label_kind=args.label_kind,
            k=args.k,
            learning_rate=args.lr,
            max_3p_snippets=args.max_3p_snippets,
            oracle=args.oracle,
        )
        COMMANDS[args.command](manifest)
    except PipelineError as exc:
        print(f"gnm {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"gnm {args.command}: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
