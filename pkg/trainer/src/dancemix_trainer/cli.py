"""Command line entry point: train on toy data and export a loadable bundle.

    dancemix-train toy --out weights.dmwb [--epochs N] [--samples N] [--seed N]

Real datasets plug in through the library API (train_vae / train_generator
take tensors); the CLI exists so the full train-then-export path is
runnable without writing any code.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import TrainingConfig, TrainingError
from .data import blob_images, linear_latent_triples
from .export import export_bundle
from .gan import train_generator
from .models import AUDIO_INPUT, MOVEMENT_INPUT
from .vae import train_vae


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dancemix-train")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("toy", help="train both VAEs and the generator on synthetic data")
    p.add_argument("--out", required=True, help="bundle output path")
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_toy(args) -> int:
    config = TrainingConfig(epochs=args.epochs, seed=args.seed)

    print(f"training audio VAE on {args.samples} blob images {AUDIO_INPUT} ...")
    audio_vae, audio_hist = train_vae(blob_images(args.samples, AUDIO_INPUT, args.seed), config)
    print(f"  loss {audio_hist[0]:.2f} -> {audio_hist[-1]:.2f}")

    print(f"training movement VAE on {args.samples} blob images {MOVEMENT_INPUT} ...")
    movement_vae, move_hist = train_vae(
        blob_images(args.samples, MOVEMENT_INPUT, args.seed + 1), config
    )
    print(f"  loss {move_hist[0]:.2f} -> {move_hist[-1]:.2f}")

    print("training generator on linear latent triples ...")
    zm, zp, zt = linear_latent_triples(max(args.samples, 256), args.seed + 2)
    generator, gen_hist = train_generator(zm, zp, zt, config)
    print(f"  loss {gen_hist[0]:.2f} -> {gen_hist[-1]:.2f}")

    export_bundle(args.out, audio_vae, movement_vae, generator)
    print(f"wrote {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _cmd_toy(args)
    except TrainingError as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
