"""fillserve command line: ``serve`` and ``finetune``."""

from __future__ import annotations

import argparse
import sys

from .count_model import CountModel
from .server import serve_stdio, serve_tcp


def _infer_format(path: str, explicit: str | None) -> str:
    if explicit:
        return explicit
    return "jsonl" if path.endswith(".jsonl") else "csv"


def cmd_serve(args) -> int:
    if args.provider == "count":
        if not args.corpus:
            print("error: count provider needs --corpus", file=sys.stderr)
            return 2
        model = CountModel.from_corpus_file(args.corpus,
                                            _infer_format(args.corpus, args.format))
    else:
        if not args.model_dir:
            print("error: mlm provider needs --model-dir", file=sys.stderr)
            return 2
        from .mlm_model import MlmModel
        model = MlmModel.load(args.model_dir, embed_model=args.embed_model,
                              device=args.device)
    if args.transport == "tcp":
        serve_tcp(model, args.host, args.port)
    else:
        serve_stdio(model)
    return 0


def cmd_finetune(args) -> int:
    from .finetune import FinetuneConfig, finetune
    try:
        config = FinetuneConfig(batch_size=args.batch_size,
                                learning_rate=args.lr,
                                weight_decay=args.weight_decay,
                                epochs=args.epochs,
                                mlm_probability=args.mlm_prob,
                                max_length=args.max_length,
                                seed=args.seed)
        finetune(args.dataset, args.out,
                 format=_infer_format(args.dataset, args.format),
                 base_model=args.base_model, scratch=args.scratch,
                 config=config, hidden_size=args.hidden_size,
                 num_layers=args.num_layers, device=args.device)
    except ValueError as exc:
        print(f"error [config]: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error [training]: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fillserve",
        description="Masked-token fill and sentence-embedding service "
                    "(newline-delimited JSON over stdio or TCP)")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="answer fill/embed requests")
    serve.add_argument("--provider", choices=["count", "mlm"], default="count")
    serve.add_argument("--corpus", help="corpus file for the count provider")
    serve.add_argument("--format", choices=["csv", "jsonl"])
    serve.add_argument("--model-dir", help="fine-tuned model directory (mlm provider)")
    serve.add_argument("--embed-model", help="sentence-transformers model for embeddings")
    serve.add_argument("--device", default="cpu")
    serve.add_argument("--transport", choices=["stdio", "tcp"], default="stdio")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=9900)
    serve.set_defaults(handler=cmd_serve)

    tune = sub.add_parser("finetune", help="fine-tune the masked language model")
    tune.add_argument("--dataset", required=True)
    tune.add_argument("--format", choices=["csv", "jsonl"])
    tune.add_argument("--out", required=True)
    group = tune.add_mutually_exclusive_group(required=True)
    group.add_argument("--base-model", help="checkpoint to fine-tune")
    group.add_argument("--scratch", action="store_true",
                       help="train a small randomly-initialized model offline")
    tune.add_argument("--batch-size", type=int, default=64)
    tune.add_argument("--lr", type=float, default=2e-5)
    tune.add_argument("--weight-decay", type=float, default=0.01)
    tune.add_argument("--epochs", type=int, default=5)
    tune.add_argument("--mlm-prob", type=float, default=0.15)
    tune.add_argument("--max-length", type=int, default=64)
    tune.add_argument("--seed", type=int, default=0)
    tune.add_argument("--hidden-size", type=int, default=64)
    tune.add_argument("--num-layers", type=int, default=2)
    tune.add_argument("--device", default="cpu")
    tune.set_defaults(handler=cmd_finetune)

    args = parser.parse_args(argv)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
