"""CLI entry point: synthesize data, train, evaluate, predict, serve.

Examples:
  python -m src.cli synth --n 64 --size 32 --seed 7 --out d/
  python -m src.cli train --data d/ --out-checkpoint model.bin \
      --epochs 200 --lr 0.05 --batch 16 --seed 7
  python -m src.cli eval --data d/ --checkpoint model.bin
  python -m src.cli predict --image d/SYN_00000.png --checkpoint model.bin --cam --out-overlay o.png
  python -m src.cli serve --checkpoint model.bin --bind 127.0.0.1:8000

Every subcommand prints one JSON line on stdout and a human summary on
stderr. Exit codes: 0 success, 1 usage error, 2 data or model error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from src.config import configure_logging, get_config
from src.pipeline import TrainOptions, history_path, run_eval, run_predict, run_synth, run_train
from src.training import TrainConfig, TrainingDivergedError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

# ManifestError, ImageDecodeError, CheckpointError, ModelConfigError and
# ShapeError are ValueError subclasses; FileNotFoundError is an OSError.
DATA_ERRORS = (ValueError, OSError, TrainingDivergedError)


class UsageError(Exception):
    """Bad command line; printed with the usage text, exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _emit(result: dict[str, Any], summary: str) -> None:
    print(json.dumps(result, sort_keys=True), flush=True)
    print(summary, file=sys.stderr)


def _parse_class_weights(raw: Optional[str]) -> tuple[bool, Optional[tuple[float, float]]]:
    """None → uniform, 'auto' → inverse frequency, 'w0,w1' → explicit."""
    if raw is None:
        return False, None
    if raw == "auto":
        return True, None
    parts = raw.split(",")
    try:
        w0, w1 = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"--class-weights expects 'auto' or 'w0,w1', got '{raw}'") from None
    return False, (w0, w1)


# ── subcommands ───────────────────────────────────────────────────────────────

def _run_synth(args: argparse.Namespace) -> int:
    result = run_synth(args.n, args.size, args.seed, args.out)
    _emit(result, f"wrote {result['n']} samples ({result['positives']} melanoma) to {args.out}")
    return EXIT_OK


def _run_train(args: argparse.Namespace) -> int:
    auto, weights = _parse_class_weights(args.class_weights)
    opts = TrainOptions(
        data_dir=Path(args.data),
        out_checkpoint=Path(args.out_checkpoint),
        train=TrainConfig(
            learning_rate=args.lr,
            epochs=args.epochs,
            batch_size=args.batch,
            seed=args.seed,
            class_weights=weights,
            weight_decay=args.weight_decay,
            augment=not args.no_augment,
        ),
        dense_skips=args.dense_skips,
        auto_class_weights=auto,
        manifest_path=Path(args.manifest) if args.manifest else None,
        val_dir=Path(args.val_data) if args.val_data else None,
        train_fraction=args.train_fraction,
        input_size=args.input_size,
    )
    s = run_train(opts).summary
    _emit(
        s,
        f"trained {s['epochs']} epochs: train acc {s['train_accuracy']:.3f}, "
        f"val acc {s['val_accuracy']:.3f}; checkpoint {s['checkpoint']} ({s['bytes']} bytes, "
        f"version {s['model_version']}); history {history_path(opts.out_checkpoint)}",
    )
    return EXIT_OK


def _run_eval(args: argparse.Namespace) -> int:
    result = run_eval(args.data, args.checkpoint, args.manifest)
    summary = f"{result['n']} images: loss {result['loss']:.4f}"
    _emit(result, f"{summary}, accuracy {result['accuracy']:.3f}")
    return EXIT_OK


def _run_predict(args: argparse.Namespace) -> int:
    result = run_predict(args.image, args.checkpoint, args.cam, args.out_overlay, args.out_heatmap)
    p = result["probability_melanoma"]
    _emit(result, f"{args.image}: {result['label']} (p_melanoma={p:.4f})")
    return EXIT_OK


def _run_serve(args: argparse.Namespace) -> int:
    from src.service import serve

    serve(args.checkpoint, args.bind)
    return EXIT_OK


# ── parser ────────────────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="derm", description="Melanoma-vs-rest residual network toolkit")
    parser.add_argument(
        "--log-level", default=None, help="DEBUG, INFO or WARNING (default from DERM_LOG_LEVEL)"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    synth = subparsers.add_parser("synth", help="Generate a synthetic lesion dataset")
    synth.add_argument("--n", type=int, required=True, help="Number of samples (even, ≥ 8)")
    synth.add_argument("--size", type=int, required=True, help="Image side in pixels (≥ 16)")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True, help="Output directory")
    synth.set_defaults(handler=_run_synth)

    train = subparsers.add_parser("train", help="Train a model and write a checkpoint")
    train.add_argument("--data", required=True, help="Dataset directory (manifest.csv + images)")
    train.add_argument("--out-checkpoint", required=True)
    train.add_argument("--epochs", type=int, default=10)
    train.add_argument("--lr", type=float, default=0.05)
    train.add_argument("--batch", type=int, default=16)
    train.add_argument("--seed", type=int, default=0)
    train.add_argument(
        "--class-weights",
        nargs="?",
        const="auto",
        default=None,
        help="'auto' (inverse frequency, the default when the flag is bare) or 'w0,w1'",
    )
    train.add_argument(
        "--dense-skips", action="store_true", help="Feed every earlier output to each skip path"
    )
    train.add_argument("--manifest", default=None, help="Ground-truth CSV outside the data dir")
    train.add_argument("--val-data", default=None, help="Held-out dataset instead of a split")
    train.add_argument("--train-fraction", type=float, default=0.8, help="Share kept for training")
    train.add_argument("--weight-decay", type=float, default=1e-4)
    train.add_argument("--input-size", type=int, default=None)
    train.add_argument("--no-augment", action="store_true")
    train.set_defaults(handler=_run_train)

    ev = subparsers.add_parser("eval", help="Evaluate a checkpoint on a dataset")
    ev.add_argument("--data", required=True)
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--manifest", default=None)
    ev.set_defaults(handler=_run_eval)

    predict = subparsers.add_parser("predict", help="Melanoma probability for one image")
    predict.add_argument("--image", required=True)
    predict.add_argument("--checkpoint", required=True)
    predict.add_argument("--cam", action="store_true", help="Attach a Grad-CAM overlay")
    predict.add_argument("--out-overlay", default=None, help="Write the overlay PNG here")
    predict.add_argument("--out-heatmap", default=None, help="Write the raw heatmap grid here")
    predict.set_defaults(handler=_run_predict)

    serve = subparsers.add_parser("serve", help="Run the HTTP inference service")
    serve.add_argument("--checkpoint", required=True)
    serve.add_argument("--bind", default=None, help="host:port (default from DERM_BIND)")
    serve.set_defaults(handler=_run_serve)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    configure_logging(args.log_level.upper() if args.log_level else get_config().logging.level)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"{parser.prog} {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
