"""Command-line entry point: embed raw text, or fine-tune on pseudo labels."""

import argparse
import logging
import sys
from pathlib import Path

from .config import DEFAULT_CLS_MODEL, DEFAULT_REP_MODEL, LAYER_POLICIES, EmbedderConfig
from .embed import embed_corpus
from .finetune import CapabilityError, finetune_classifier


def _read_documents(path: str) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def _config_from(args, default_model: str) -> EmbedderConfig:
    return EmbedderConfig(
        model=args.model or default_model,
        layers=args.layers,
        window=args.window,
        stride=args.stride if args.stride is not None else args.window // 2,
        batch_size=args.batch_size,
        device=args.device,
        seed=args.seed,
    )


def _cmd_embed(args) -> int:
    config = _config_from(args, DEFAULT_REP_MODEL)
    out = embed_corpus(_read_documents(args.input), args.out, config)
    print(f"corpus written to {out}")
    return 0


def _cmd_finetune(args) -> int:
    config = _config_from(args, DEFAULT_CLS_MODEL)
    out = finetune_classifier(
        _read_documents(args.input), args.pseudo, config, args.out,
        epochs=args.epochs, learning_rate=args.learning_rate,
    )
    print(f"predictions written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lmembed",
        description="Masked-LM word embeddings in the pipeline's corpus format.",
    )
    parser.add_argument("--verbose", action="store_true")
    subs = parser.add_subparsers(dest="command", required=True)

    def common(sub):
        sub.add_argument("--input", required=True, help="UTF-8 text, one document per line")
        sub.add_argument("--out", required=True)
        sub.add_argument("--model", help="model name or local directory")
        sub.add_argument("--layers", choices=list(LAYER_POLICIES), default="last")
        sub.add_argument("--window", type=int, default=512,
                         help="wordpiece positions per forward pass, specials included")
        sub.add_argument("--stride", type=int, default=None,
                         help="content positions between window starts (default: window/2)")
        sub.add_argument("--batch-size", type=int, default=16, dest="batch_size")
        sub.add_argument("--device", default="cpu")
        sub.add_argument("--seed", type=int, default=0)

    p = subs.add_parser("embed", help="write an embedded corpus directory")
    common(p)
    p.set_defaults(fn=_cmd_embed)

    p = subs.add_parser("finetune", help="fine-tune a classifier on a pseudo-label CSV")
    common(p)
    p.add_argument("--pseudo", required=True, help="doc_index,class_id,confidence CSV")
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--learning-rate", type=float, default=2e-5, dest="learning_rate")
    p.set_defaults(fn=_cmd_finetune)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except (ValueError, CapabilityError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
