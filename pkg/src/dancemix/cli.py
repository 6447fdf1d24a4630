"""Command line entry point.

    dancemix build-db <audio_dir> --weights FILE [--out DIR]
    dancemix simulate --pose FILE --config FILE --out DIR
    dancemix serve --config FILE [--host H]
    dancemix analyze LOG --library DIR --audio WAV --out DIR
    dancemix inspect [--weights F | --library D | --pose F --png OUT
                      | --gen-random-weights OUT [--seed N]]

Exit codes: 0 success, 2 usage, 3 config, 4 library, 5 weight bundle,
6 insufficient data, 7 engine fault, 1 anything unexpected.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import (
    BundleError,
    ConfigError,
    DancemixError,
    EngineError,
    InsufficientDataError,
    InvalidArgumentError,
    LibraryError,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_LIBRARY = 4
EXIT_BUNDLE = 5
EXIT_DATA = 6
EXIT_ENGINE = 7
EXIT_UNEXPECTED = 1

log = logging.getLogger("dancemix")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dancemix", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-db", help="encode a directory of WAV clips into a library")
    p.add_argument("audio_dir", help="directory of .wav files")
    p.add_argument("--weights", required=True, help="weight bundle file")
    p.add_argument("--out", default=None, help="library output directory (default: audio_dir)")
    p.add_argument("--clip-s", type=float, default=3.5, help="clip length in seconds")

    p = sub.add_parser("simulate", help="run a pose replay offline: session log + rendered WAV")
    p.add_argument("--pose", required=True, help="pose replay JSONL file")
    p.add_argument("--config", default=None, help="engine config JSON")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("serve", help="start the HTTP/WebSocket control plane")
    p.add_argument("--config", default=None, help="engine config JSON")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--run-dir", default="runs", help="directory for live session outputs")

    p = sub.add_parser("analyze", help="statistical battery over a finished session")
    p.add_argument("log", help="session.log from a run")
    p.add_argument("--library", required=True, help="library directory")
    p.add_argument("--audio", required=True, help="rendered session WAV")
    p.add_argument("--out", required=True, help="report output directory")
    p.add_argument("--segment-s", type=float, default=10.0)
    p.add_argument("--trees", type=int, default=200, help="random-forest size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-figures", action="store_true", help="skip PNG figure rendering")

    p = sub.add_parser("inspect", help="look inside weights, libraries, and replays")
    p.add_argument("--weights", default=None, help="print a weight bundle's manifest and tensors")
    p.add_argument("--library", default=None, help="print a library summary")
    p.add_argument("--pose", default=None, help="pose replay to rasterize")
    p.add_argument("--png", default=None, help="write the trajectory image here (with --pose)")
    p.add_argument("--window", type=int, default=0, help="window index to rasterize")
    p.add_argument(
        "--gen-random-weights",
        metavar="OUT",
        default=None,
        help="write a random standard-architecture weight bundle",
    )
    p.add_argument("--seed", type=int, default=0, help="seed for --gen-random-weights")
    return parser


# --- subcommand bodies --------------------------------------------------------------

def _cmd_build_db(args) -> int:
    from .library import build_library
    from .neural import load_weight_bundle

    weights = load_weight_bundle(args.weights)
    library = build_library(args.audio_dir, weights, out_dir=args.out, clip_s=args.clip_s)
    print(f"built library: {len(library)} clips at {library.root}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    from .engine import load_config, run_offline

    config = load_config(args.config)
    log_path, wav_path = run_offline(config, args.pose, args.out)
    print(f"session log: {log_path}")
    print(f"rendered audio: {wav_path}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .engine import load_config
    from .service import serve

    config = load_config(args.config)
    serve(config, host=args.host, run_dir=args.run_dir)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    from .analysis import analyze_session, write_report
    from .engine import replay_session
    from .library import load_library

    library = load_library(args.library, verify_files=False)
    session = replay_session(args.log, library)
    report = analyze_session(
        session, args.audio, segment_s=args.segment_s, rf_trees=args.trees, seed=args.seed
    )
    paths = write_report(report, args.out, figures=not args.no_figures)
    for kind in ("json", "text", "csv", "figures"):
        for path in paths[kind]:
            print(f"{kind}: {path}")
    return EXIT_OK


def _cmd_inspect(args) -> int:
    did_something = False
    if args.gen_random_weights:
        from .neural import bundle_sha256, make_random_bundle, save_weight_bundle

        bundle = make_random_bundle(seed=args.seed)
        save_weight_bundle(args.gen_random_weights, bundle)
        print(f"wrote {args.gen_random_weights} (sha256 {bundle_sha256(bundle)[:16]}...)")
        did_something = True
    if args.weights:
        from .neural import bundle_sha256, load_weight_bundle

        bundle = load_weight_bundle(args.weights)
        print(f"bundle {args.weights} sha256 {bundle_sha256(bundle)}")
        for model, spec in bundle.manifest["models"].items():
            print(f"  model {model}: {spec['kind']}")
        for name in sorted(bundle.tensors):
            t = bundle.tensors[name]
            print(f"  {name:<40} {str(t.shape):<20} {t.size * 4} bytes")
        did_something = True
    if args.library:
        from .library import load_library

        library = load_library(args.library, verify_files=False)
        print(f"library {library.root}: {len(library)} clips, weights {library.weights_sha256[:16]}...")
        for entry in library.entries:
            print(f"  {entry.id:<24} {entry.file:<32} {entry.duration_s:.1f}s gain {entry.gain_db:+.1f} dB")
        did_something = True
    if args.pose:
        if not args.png:
            raise InvalidArgumentError("--pose needs --png OUT to write the image")
        from .pose import collect_windows, read_replay
        from .raster import rasterize, write_png

        frames = read_replay(args.pose)
        windows = collect_windows(frames)
        if not 0 <= args.window < len(windows):
            raise InvalidArgumentError(
                f"--window {args.window} out of range; replay has {len(windows)} windows"
            )
        write_png(args.png, rasterize(windows[args.window]))
        print(f"wrote {args.png} (window {args.window} of {len(windows)})")
        did_something = True
    if not did_something:
        raise InvalidArgumentError(
            "inspect needs one of --weights, --library, --pose, --gen-random-weights"
        )
    return EXIT_OK


_COMMANDS = {
    "build-db": _cmd_build_db,
    "simulate": _cmd_simulate,
    "serve": _cmd_serve,
    "analyze": _cmd_analyze,
    "inspect": _cmd_inspect,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LibraryError as exc:
        print(f"library error: {exc}", file=sys.stderr)
        return EXIT_LIBRARY
    except BundleError as exc:
        print(f"weight bundle error: {exc}", file=sys.stderr)
        return EXIT_BUNDLE
    except InsufficientDataError as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EngineError as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except InvalidArgumentError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DancemixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED
    except FileNotFoundError as exc:
        print(f"file not found: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        log.exception("unexpected failure")
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
