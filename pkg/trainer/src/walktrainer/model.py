"""Decoder-only pre-norm transformer with rotary positions and tied embeddings.

The ``mup`` flag switches initialization, attention scaling, logit scaling,
and per-group learning rates; it never changes the architecture graph, so
parameter shapes are identical between the two parameterizations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

MUP_BASE_WIDTH = 64


@dataclass
class ModelConfig:
    vocab_size: int
    n_layers: int = 2
    n_embd: int = 64
    context_length: int = 50
    rotary_base: float = 10000.0
    mup: bool = False

    @property
    def n_heads(self) -> int:
        return max(4, self.n_embd // 64)

    @property
    def head_dim(self) -> int:
        return self.n_embd // self.n_heads

    @property
    def width_mult(self) -> float:
        return self.n_embd / MUP_BASE_WIDTH

    def validate(self) -> None:
        if self.n_layers not in (2, 4):
            raise ValueError("n_layers must be 2 or 4")
        if self.n_embd % self.n_heads:
            raise ValueError("embedding dim must divide evenly into heads")
        if self.head_dim % 2:
            raise ValueError("rotary rotation needs an even head dim")


def param_count(cfg: ModelConfig) -> tuple[int, int]:
    """(total, non-embedding) parameter counts, closed form.

    Tied embeddings: the output head shares the token embedding, and rotary
    positions are parameter-free, so the only embedding parameters are
    vocab * embd. Each block: 2 LayerNorms, fused qkv, attention projection,
    and a 4x MLP, all with biases.
    """
    e, L, v = cfg.n_embd, cfg.n_layers, cfg.vocab_size
    per_block = 2 * 2 * e + (3 * e * e + 3 * e) + (e * e + e) \
        + (4 * e * e + 4 * e) + (4 * e * e + e)
    nonembed = L * per_block + 2 * e  # + final LayerNorm
    return v * e + nonembed, nonembed


def _rotary_tables(seq_len: int, dim: int, base: float, device, dtype):
    # rotation applied across the full per-head dimension
    inv_freq = base ** (-torch.arange(0, dim, 2, device=device,
                                      dtype=torch.float32) / dim)
    t = torch.arange(seq_len, device=device, dtype=torch.float32)
    freqs = torch.outer(t, inv_freq)
    return freqs.cos().to(dtype), freqs.sin().to(dtype)


def _apply_rotary(x: torch.Tensor, cos: torch.Tensor, sin: torch.Tensor):
    # x: (B, H, T, D); tables: (T, D/2)
    x1, x2 = x[..., 0::2], x[..., 1::2]
    out = torch.empty_like(x)
    out[..., 0::2] = x1 * cos - x2 * sin
    out[..., 1::2] = x1 * sin + x2 * cos
    return out


class Block(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        e = cfg.n_embd
        self.cfg = cfg
        self.ln1 = nn.LayerNorm(e)
        self.qkv = nn.Linear(e, 3 * e)
        self.proj = nn.Linear(e, e)
        self.ln2 = nn.LayerNorm(e)
        self.fc = nn.Linear(e, 4 * e)
        self.out = nn.Linear(4 * e, e)

    def forward(self, x, cos, sin):
        cfg = self.cfg
        b, t, e = x.shape
        q, k, v = self.qkv(self.ln1(x)).split(e, dim=2)
        shape = (b, t, cfg.n_heads, cfg.head_dim)
        q = _apply_rotary(q.view(shape).transpose(1, 2), cos, sin)
        k = _apply_rotary(k.view(shape).transpose(1, 2), cos, sin)
        v = v.view(shape).transpose(1, 2)
        # muP uses 1/d attention scaling instead of 1/sqrt(d)
        scale = 1.0 / cfg.head_dim if cfg.mup else 1.0 / math.sqrt(cfg.head_dim)
        y = F.scaled_dot_product_attention(q, k, v, is_causal=True, scale=scale)
        y = y.transpose(1, 2).reshape(b, t, e)
        x = x + self.proj(y)
        h = self.ln2(x)
        return x + self.out(F.gelu(self.fc(h)))


class WalkGPT(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        cfg.validate()
        self.cfg = cfg
        self.wte = nn.Embedding(cfg.vocab_size, cfg.n_embd)
        self.blocks = nn.ModuleList(Block(cfg) for _ in range(cfg.n_layers))
        self.ln_f = nn.LayerNorm(cfg.n_embd)
        self._init_weights()

    def _init_weights(self):
        cfg = self.cfg
        hidden_std = 0.02
        if cfg.mup:
            hidden_std = 0.02 / math.sqrt(cfg.width_mult)
        nn.init.normal_(self.wte.weight, std=0.02)
        for block in self.blocks:
            for lin in (block.qkv, block.proj, block.fc, block.out):
                nn.init.normal_(lin.weight, std=hidden_std)
                nn.init.zeros_(lin.bias)

    def forward(self, idx: torch.Tensor) -> torch.Tensor:
        """Logits (B, T, vocab) for token ids (B, T)."""
        cfg = self.cfg
        x = self.wte(idx)
        cos, sin = _rotary_tables(idx.shape[1], cfg.head_dim, cfg.rotary_base,
                                  idx.device, x.dtype)
        for block in self.blocks:
            x = block(x, cos, sin)
        x = self.ln_f(x)
        logits = x @ self.wte.weight.t()  # tied output head
        if cfg.mup:
            logits = logits / cfg.width_mult
        return logits

    def loss(self, idx: torch.Tensor) -> torch.Tensor:
        """Mean next-token cross-entropy (nats) over all positions."""
        logits = self.forward(idx[:, :-1])
        return F.cross_entropy(logits.reshape(-1, self.cfg.vocab_size),
                               idx[:, 1:].reshape(-1).long())

    def param_groups(self, lr: float, weight_decay: float) -> list[dict]:
        """Optimizer groups: muP scales hidden-matrix LR by 1/width_mult;
        vector-like parameters and embeddings keep the base LR."""
        hidden_lr = lr / self.cfg.width_mult if self.cfg.mup else lr
        matrices, others = [], []
        for name, p in self.named_parameters():
            if p.ndim == 2 and not name.startswith("wte"):
                matrices.append(p)
            else:
                others.append(p)
        return [
            {"params": matrices, "lr": hidden_lr, "weight_decay": weight_decay},
            {"params": others, "lr": lr, "weight_decay": 0.0},
        ]
