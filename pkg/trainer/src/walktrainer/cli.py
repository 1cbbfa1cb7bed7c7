"""Minimal CLI: train a size/LR sweep on a token-stream file."""

from __future__ import annotations

import argparse
import sys

from .data import read_token_stream
from .train import TrainConfig, train, write_records


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="walktrainer")
    parser.add_argument("--stream", required=True, help="token-stream file")
    parser.add_argument("--out-csv", required=True)
    parser.add_argument("--embd", type=int, nargs="+", default=[64])
    parser.add_argument("--layers", type=int, default=2)
    parser.add_argument("--train-tokens", type=int, nargs="+", required=True)
    parser.add_argument("--test-seqs", type=int, default=1000)
    parser.add_argument("--lrs", type=float, nargs="+", default=None)
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    parser.add_argument("--sp", action="store_true",
                        help="standard parameterization instead of muP")
    parser.add_argument("--batch-size", type=int, default=100)
    parser.add_argument("--dataset-tag", default="walks")
    args = parser.parse_args(argv)

    full = read_token_stream(args.stream)
    pool, test = full.split(args.test_seqs)
    append = False
    for embd in args.embd:
        for tokens in args.train_tokens:
            cfg = TrainConfig(
                n_layers=args.layers, n_embd=embd,
                context_length=full.seq_len, batch_size=args.batch_size,
                mup=not args.sp, seeds=tuple(args.seeds),
                dataset_tag=args.dataset_tag,
                **({"lrs": args.lrs} if args.lrs else {}),
            )
            subset = pool.truncated(tokens)
            print(f"training {cfg.arch_tag} on {subset.total_tokens} tokens")
            records = train(cfg, subset, test,
                            run_prefix=f"{cfg.arch_tag}-d{subset.total_tokens}",
                            log_every=0)
            write_records(args.out_csv, records, append=append)
            append = True
            best = min((r.loss for r in records), default=float("inf"))
            print(f"  best held-out loss {best:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
