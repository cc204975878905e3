"""refscorer command line: train a checkpoint, serve the wire protocol."""

from __future__ import annotations

import argparse
import sys

from .model import save_checkpoint, train
from .serve import serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="refscorer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a checkpoint on a tokenized corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--embedding-size", type=int, default=64)
    p.add_argument("--hidden-size", type=int, default=128)
    p.add_argument("--vocab-size", type=int, default=50000)

    p = sub.add_parser("serve", help="answer scoring requests on stdin/stdout")
    p.add_argument("checkpoint")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "train":
        model, val_ppl = train(
            args.corpus,
            epochs=args.epochs,
            seed=args.seed,
            embedding_size=args.embedding_size,
            hidden_size=args.hidden_size,
            vocab_size=args.vocab_size,
        )
        save_checkpoint(args.out, model, val_ppl, args.seed)
        print(f"validation perplexity: {val_ppl:.4f}", file=sys.stderr)
        return 0
    return serve(args.checkpoint)


if __name__ == "__main__":
    sys.exit(main())
