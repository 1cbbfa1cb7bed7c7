"""Single-epoch training runs over an LR grid, emitting loss-table CSV rows."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import torch

from .data import TokenStream
from .model import ModelConfig, WalkGPT, param_count

LOSS_TABLE_COLUMNS = [
    "run_id", "n_params_total", "n_params_nonembed", "tokens", "loss",
    "dataset_tag", "arch_tag", "lr", "seed",
]


def lr_grid(n: int = 14, lo: float = 5e-6, hi: float = 0.1) -> list[float]:
    """The log-spaced learning-rate sweep grid."""
    return [float(v) for v in np.geomspace(lo, hi, n)]


@dataclass
class TrainConfig:
    n_layers: int = 2
    n_embd: int = 64
    context_length: int = 50
    batch_size: int = 100
    mup: bool = True
    lrs: list = field(default_factory=lr_grid)
    weight_decay: float = 0.01
    warmup_frac: float = 0.02
    epochs: int = 1
    seeds: tuple = (0, 1, 2)
    rotary_base: float = 10000.0
    dataset_tag: str = "walks"

    def validate(self) -> None:
        if self.epochs != 1:
            raise ValueError("the protocol trains for exactly one epoch")
        if self.context_length not in (50, 100):
            raise ValueError("context length must be 50 or 100")
        if self.batch_size not in (100, 512):
            raise ValueError("batch size must be 100 or 512")
        if not self.lrs or min(self.lrs) < 5e-6 or max(self.lrs) > 0.1:
            raise ValueError("learning rates must lie within [5e-6, 0.1]")
        if not (0 < self.warmup_frac < 1):
            raise ValueError("warmup fraction must be in (0, 1)")

    @property
    def arch_tag(self) -> str:
        par = "mup" if self.mup else "sp"
        return f"gpt{self.n_layers}l-{self.n_embd}e-{par}"

    def model_config(self, vocab_size: int) -> ModelConfig:
        return ModelConfig(vocab_size=vocab_size, n_layers=self.n_layers,
                           n_embd=self.n_embd,
                           context_length=self.context_length,
                           rotary_base=self.rotary_base, mup=self.mup)


@dataclass
class RunRecord:
    run_id: str
    n_params_total: int
    n_params_nonembed: int
    tokens: int
    loss: float  # nats on held-out walks; inf when the run diverged
    dataset_tag: str
    arch_tag: str
    lr: float
    seed: int
    best: bool = False  # best over (lr, seed) at this (size, tokens)


def _lr_schedule(step: int, total: int, warmup: int) -> float:
    """Linear warmup then cosine decay to 0, as a multiplier on the base LR."""
    if step < warmup:
        return (step + 1) / warmup
    progress = (step - warmup) / max(1, total - warmup)
    return 0.5 * (1.0 + math.cos(math.pi * progress))


@torch.no_grad()
def evaluate(model: WalkGPT, test: TokenStream, batch_size: int = 256) -> float:
    """Mean next-token cross-entropy (nats) over the held-out sequences."""
    model.eval()
    total, count = 0.0, 0
    seqs = torch.from_numpy(test.sequences.astype(np.int64))
    for start in range(0, len(seqs), batch_size):
        batch = seqs[start : start + batch_size]
        total += float(model.loss(batch)) * len(batch)
        count += len(batch)
    model.train()
    return total / count


def train_single(config: TrainConfig, train_stream: TokenStream,
                 test_stream: TokenStream, lr: float, seed: int,
                 log_every: int = 0, return_model: bool = False):
    """One training run; returns the held-out loss (inf on divergence),
    or (loss, model) when return_model is set."""
    config.validate()
    if train_stream.seq_len != config.context_length:
        raise ValueError("dataset sequence length must equal the context length")
    torch.manual_seed(seed)
    model = WalkGPT(config.model_config(train_stream.vocab_size))
    opt = torch.optim.AdamW(model.param_groups(lr, config.weight_decay),
                            betas=(0.9, 0.95))
    base_lrs = [g["lr"] for g in opt.param_groups]

    order = np.random.default_rng(seed).permutation(train_stream.n_seqs)
    seqs = torch.from_numpy(
        train_stream.sequences[order].astype(np.int64)
    )
    n_steps = math.ceil(len(seqs) / config.batch_size)
    warmup = max(1, int(round(config.warmup_frac * n_steps)))

    for step in range(n_steps):
        mult = _lr_schedule(step, n_steps, warmup)
        for group, base in zip(opt.param_groups, base_lrs):
            group["lr"] = base * mult
        batch = seqs[step * config.batch_size : (step + 1) * config.batch_size]
        loss = model.loss(batch)
        if not torch.isfinite(loss):
            return (float("inf"), model) if return_model else float("inf")
        opt.zero_grad(set_to_none=True)
        loss.backward()
        opt.step()
        if log_every and step % log_every == 0:
            print(f"    step {step}/{n_steps} train_loss {float(loss):.4f}")

    final = evaluate(model, test_stream)
    final = final if math.isfinite(final) else float("inf")
    return (final, model) if return_model else final


def train(config: TrainConfig, train_stream: TokenStream,
          test_stream: TokenStream, run_prefix: str = "run",
          log_every: int = 0) -> list[RunRecord]:
    """LR-grid x seed sweep at one (model size, dataset size) cell.

    Divergent runs are recorded with non-finite loss and excluded from the
    best-of marking.
    """
    config.validate()
    total, nonembed = param_count(config.model_config(train_stream.vocab_size))
    records = []
    for lr in config.lrs:
        for seed in config.seeds:
            loss = train_single(config, train_stream, test_stream, lr, seed,
                                log_every=log_every)
            records.append(RunRecord(
                run_id=f"{run_prefix}-lr{lr:.2e}-s{seed}",
                n_params_total=total, n_params_nonembed=nonembed,
                tokens=train_stream.total_tokens, loss=loss,
                dataset_tag=config.dataset_tag, arch_tag=config.arch_tag,
                lr=lr, seed=seed,
            ))
    finite = [r for r in records if math.isfinite(r.loss)]
    if finite:
        min(finite, key=lambda r: r.loss).best = True
    return records


def write_records(path, records: list[RunRecord], append: bool = False) -> None:
    """Write loss-table CSV rows; non-finite losses are skipped (they carry
    no information the ingest step could use)."""
    mode = "a" if append else "w"
    with open(path, mode, newline="") as f:
        writer = csv.writer(f)
        if not append:
            writer.writerow(LOSS_TABLE_COLUMNS)
        for r in records:
            if not math.isfinite(r.loss):
                continue
            writer.writerow([r.run_id, r.n_params_total, r.n_params_nonembed,
                             r.tokens, f"{r.loss:.6f}", r.dataset_tag,
                             r.arch_tag, f"{r.lr:.6g}", r.seed])
