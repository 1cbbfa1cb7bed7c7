"""Temperature-1 sampling from a trained model into the token-stream format."""

from __future__ import annotations

import json

import numpy as np
import torch

from .data import TokenStream
from .model import WalkGPT

TEMPERATURE = 1.0  # fixed by the sampling protocol


@torch.no_grad()
def generate_stream(model: WalkGPT, seq_len: int, n_seqs: int, seed: int,
                    batch_size: int = 64) -> TokenStream:
    """Sample sequences autoregressively at temperature 1.

    The first token of each sequence is drawn uniformly; every subsequent
    token from the model's full softmax.
    """
    model.eval()
    cfg = model.cfg
    if seq_len > cfg.context_length:
        raise ValueError("cannot sample beyond the training context length")
    gen = torch.Generator().manual_seed(seed)
    rows = []
    for start in range(0, n_seqs, batch_size):
        b = min(batch_size, n_seqs - start)
        seqs = torch.randint(cfg.vocab_size, (b, 1), generator=gen)
        for _ in range(seq_len - 1):
            logits = model.forward(seqs)[:, -1, :] / TEMPERATURE
            probs = torch.softmax(logits, dim=-1)
            nxt = torch.multinomial(probs, 1, generator=gen)
            seqs = torch.cat([seqs, nxt], dim=1)
        rows.append(seqs.numpy().astype(np.uint32))
    return TokenStream(cfg.vocab_size, seq_len, np.concatenate(rows))


def generate_tnl(model: WalkGPT, out_path, manifest_path, seq_len: int,
                 n_seqs: int, seed: int) -> TokenStream:
    """Sample a synthetic corpus and record provenance alongside it."""
    from .data import write_token_stream

    stream = generate_stream(model, seq_len, n_seqs, seed)
    write_token_stream(out_path, stream)
    with open(manifest_path, "w") as f:
        json.dump({
            "temperature": TEMPERATURE,
            "seq_len": seq_len,
            "n_seqs": n_seqs,
            "seed": seed,
            "vocab_size": stream.vocab_size,
            "n_layers": model.cfg.n_layers,
            "n_embd": model.cfg.n_embd,
        }, f, indent=2)
        f.write("\n")
    return stream
