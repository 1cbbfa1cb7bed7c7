"""Token-stream file I/O (the shared walk-dataset binary format).

Layout, all little-endian: magic ``SLWK``, version u16, vocab_size u32,
seq_len u32, n_seqs u64, then the tokens as u32 row-major.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"SLWK"
VERSION = 1
_HEADER = struct.Struct("<4sHIIQ")


@dataclass
class TokenStream:
    vocab_size: int
    seq_len: int
    sequences: np.ndarray  # (n_seqs, seq_len) uint32

    def __post_init__(self):
        self.sequences = np.asarray(self.sequences, dtype=np.uint32)
        if self.sequences.ndim != 2 or self.sequences.shape[1] != self.seq_len:
            raise ValueError("sequences must be (n_seqs, seq_len)")
        if self.sequences.size and int(self.sequences.max()) >= self.vocab_size:
            raise ValueError("token id outside vocabulary")

    @property
    def n_seqs(self) -> int:
        return self.sequences.shape[0]

    @property
    def total_tokens(self) -> int:
        return self.sequences.size

    def split(self, n_test_seqs: int) -> tuple["TokenStream", "TokenStream"]:
        """Deterministic train/test split: the last sequences are held out."""
        if not 0 < n_test_seqs < self.n_seqs:
            raise ValueError("n_test_seqs must leave both splits nonempty")
        train = TokenStream(self.vocab_size, self.seq_len,
                            self.sequences[:-n_test_seqs])
        test = TokenStream(self.vocab_size, self.seq_len,
                           self.sequences[-n_test_seqs:])
        return train, test

    def truncated(self, n_tokens: int) -> "TokenStream":
        """First sequences totalling at most n_tokens (whole sequences only)."""
        n = max(1, n_tokens // self.seq_len)
        return TokenStream(self.vocab_size, self.seq_len, self.sequences[:n])


def read_token_stream(path) -> TokenStream:
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        magic, version, vocab, seq_len, n_seqs = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        tokens = np.fromfile(f, dtype="<u4", count=n_seqs * seq_len)
    if tokens.size != n_seqs * seq_len:
        raise ValueError(f"{path}: truncated token payload")
    return TokenStream(vocab, seq_len, tokens.reshape(n_seqs, seq_len))


def write_token_stream(path, stream: TokenStream) -> None:
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, stream.vocab_size,
                             stream.seq_len, stream.n_seqs))
        stream.sequences.astype("<u4").tofile(f)
