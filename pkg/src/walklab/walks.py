"""Walk-dataset sampling and distributional diagnostics of transition models.

Sampling uses per-node alias tables (built once per model, O(1) per draw) and
a counter-based uniform stream: row ``i`` consumes the Philox counter block
``[2*T*i, 2*T*(i+1))`` of the stream keyed by the seed, so generation is
reproducible and independent of chunking or parallelism.
"""

from __future__ import annotations

import csv
import struct
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph

from .errors import InvalidArgument, NumericFailure
from .graphs import TransitionModel

SLWK_MAGIC = b"SLWK"
SLWK_VERSION = 1


@dataclass
class WalkDataset:
    """Fixed-length token-ID sequences sampled from a transition model."""

    vocab_size: int
    seq_len: int
    sequences: np.ndarray  # (n_seqs, seq_len) uint32
    seed: int

    def __post_init__(self):
        self.sequences = np.asarray(self.sequences, dtype=np.uint32)
        if self.sequences.ndim != 2 or self.sequences.shape[1] != self.seq_len:
            raise InvalidArgument("sequences must be (n_seqs, seq_len)")
        if self.sequences.size and self.sequences.max() >= self.vocab_size:
            raise InvalidArgument("token id outside vocabulary")

    @property
    def n_seqs(self) -> int:
        return self.sequences.shape[0]

    @property
    def total_tokens(self) -> int:
        return self.sequences.size

    def verify_legal(self, model: TransitionModel) -> None:
        """Check every consecutive pair has positive transition probability."""
        w = model.W.tocsr()
        u = self.sequences[:, :-1].ravel().astype(np.int64)
        v = self.sequences[:, 1:].ravel().astype(np.int64)
        # Dead-end rows fall back to the initial distribution; accept those.
        dead = np.diff(w.indptr) == 0
        probs = np.asarray(w[u, v]).ravel()
        ok = (probs > 0) | dead[u]
        if not ok.all():
            bad = np.flatnonzero(~ok)[0]
            raise InvalidArgument(
                f"illegal transition {u[bad]} -> {v[bad]} with probability 0"
            )


@dataclass
class RankedDistribution:
    """(rank, probability) pairs sorted by descending probability."""

    kind: str  # unigram | bigram-conditional | bigram-joint
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=np.float64)
        if (np.diff(p) > 1e-15).any():
            raise InvalidArgument("probabilities must be non-increasing in rank")
        if self.kind in ("unigram", "bigram-joint") and abs(p.sum() - 1.0) > 1e-9:
            raise InvalidArgument(f"{self.kind} distribution must sum to 1")
        self.probabilities = p

    @property
    def ranks(self) -> np.ndarray:
        return np.arange(1, len(self.probabilities) + 1)


@dataclass
class ModelDiagnostics:
    stationary: np.ndarray
    spectral_gap: float
    entropy_rate: float  # nats
    stationary_entropy: float  # nats


class _AliasTable:
    """Vose alias tables for every row of a transition model, flat-packed."""

    def __init__(self, model: TransitionModel):
        w = model.W
        self.offsets = w.indptr.astype(np.int64)
        self.cols = w.indices.astype(np.int64)
        self.degree = np.diff(self.offsets)
        self.prob = np.empty(w.nnz, dtype=np.float64)
        self.alias = np.empty(w.nnz, dtype=np.int64)  # local neighbor index
        for u in range(model.n_nodes):
            lo, hi = self.offsets[u], self.offsets[u + 1]
            if hi > lo:
                self._build_row(w.data[lo:hi], lo)
        self.m_prob, self.m_alias = _alias_dense(model.M)

    def _build_row(self, p: np.ndarray, base: int) -> None:
        prob, alias = _alias_dense(p / p.sum())
        self.prob[base : base + len(p)] = prob
        self.alias[base : base + len(p)] = alias

    def draw(self, current: np.ndarray, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
        """Vectorized next-node draw; dead-end rows restart from M."""
        d = self.degree[current]
        dead = d == 0
        if self.prob.size:
            slot = np.floor(u1 * np.maximum(d, 1)).astype(np.int64)
            # dead rows have offsets[u] == offsets[u+1], possibly == nnz;
            # park them at index 0 and overwrite below
            idx = np.where(dead, 0, self.offsets[current] + slot)
            local = np.where(u2 >= self.prob[idx], self.alias[idx], slot)
            nxt = self.cols[np.where(dead, 0, self.offsets[current] + local)]
        else:
            nxt = np.zeros_like(current)
        if dead.any():
            nxt[dead] = _alias_draw_dense(
                self.m_prob, self.m_alias, u1[dead], u2[dead]
            )
        return nxt

    def draw_initial(self, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
        return _alias_draw_dense(self.m_prob, self.m_alias, u1, u2)


def _alias_dense(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Standard Vose construction for a dense probability vector."""
    n = len(p)
    scaled = p * n
    prob = np.ones(n, dtype=np.float64)
    alias = np.arange(n, dtype=np.int64)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    scaled = scaled.copy()
    while small and large:
        s = small.pop()
        l = large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = scaled[l] - (1.0 - scaled[s])
        (small if scaled[l] < 1.0 else large).append(l)
    return prob, alias


def _alias_draw_dense(prob, alias, u1, u2) -> np.ndarray:
    n = len(prob)
    slot = np.floor(u1 * n).astype(np.int64)
    return np.where(u2 < prob[slot], slot, alias[slot])


_STREAM_BLOCK_ROWS = 4096


def _row_uniforms(seed: int, start: int, rows: int, per_row: int) -> np.ndarray:
    """Uniforms for rows [start, start+rows), independent of chunking.

    Row ``i`` always reads the same slice of the Philox stream keyed by
    (seed, i // block): a counter-based derivation at fixed block granularity,
    so parallel workers produce bitwise-identical datasets.
    """
    out = np.empty((rows, per_row), dtype=np.float64)
    pos = 0
    while pos < rows:
        row = start + pos
        block, offset = divmod(row, _STREAM_BLOCK_ROWS)
        take = min(_STREAM_BLOCK_ROWS - offset, rows - pos)
        rng = np.random.Generator(np.random.Philox(key=[seed, block]))
        u = rng.random((_STREAM_BLOCK_ROWS, per_row))
        out[pos : pos + take] = u[offset : offset + take]
        pos += take
    return out


def sample_walks(
    model: TransitionModel,
    seq_len: int,
    n_seqs: int,
    seed: int,
    chunk_rows: int = 65536,
) -> WalkDataset:
    """Sample ``n_seqs`` independent walks of length ``seq_len``.

    The first node of each row is drawn from M, each subsequent node from the
    current node's transition row. Results are bitwise-deterministic given
    (model, seq_len, n_seqs, seed) and independent of ``chunk_rows``.
    """
    if seq_len < 1:
        raise InvalidArgument("seq_len must be >= 1")
    tables = _AliasTable(model)
    out = np.empty((n_seqs, seq_len), dtype=np.uint32)
    per_row = 2 * seq_len
    for start in range(0, n_seqs, chunk_rows):
        rows = min(chunk_rows, n_seqs - start)
        u = _row_uniforms(seed, start, rows, per_row).reshape(rows, seq_len, 2)
        cur = tables.draw_initial(u[:, 0, 0], u[:, 0, 1])
        out[start : start + rows, 0] = cur
        for t in range(1, seq_len):
            cur = tables.draw(cur, u[:, t, 0], u[:, t, 1])
            out[start : start + rows, t] = cur
    return WalkDataset(model.n_nodes, seq_len, out, seed)


def giant_component_mask(model: TransitionModel) -> np.ndarray:
    """Boolean mask of the largest weakly-connected component of the support."""
    n_comp, labels = csgraph.connected_components(model.W, directed=True,
                                                  connection="weak")
    if n_comp == 1:
        return np.ones(model.n_nodes, dtype=bool)
    sizes = np.bincount(labels)
    return labels == sizes.argmax()


def stationary_distribution(
    model: TransitionModel, tol: float = 1e-12, max_iter: int = 200_000
) -> np.ndarray:
    """Power-iteration fixed point of W^T, restricted to the giant component."""
    mask = giant_component_mask(model)
    if not mask.all():
        warnings.warn(
            "support graph disconnected; stationary distribution restricted to "
            "the giant component",
            stacklevel=2,
        )
    w = model.W[mask][:, mask].tocsc()
    n = mask.sum()
    pi = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = np.asarray(w.T @ pi).ravel()
        # Half-step damping breaks period-2 oscillation on bipartite supports.
        nxt = 0.5 * (nxt + pi)
        nxt /= nxt.sum()
        if np.abs(nxt - pi).max() <= tol:
            pi = nxt
            break
        pi = nxt
    else:
        raise NumericFailure(
            f"power iteration did not reach tol={tol}; residual "
            f"{np.abs(np.asarray(w.T @ pi).ravel() - pi).max():.3e}"
        )
    full = np.zeros(model.n_nodes)
    full[mask] = pi
    return full


def _second_eigenvalue_magnitude(w: sp.csr_matrix) -> float:
    n = w.shape[0]
    if n <= 2000:
        lam = np.linalg.eigvals(w.toarray())
    else:
        lam = sp.linalg.eigs(w.astype(np.float64), k=min(6, n - 2),
                             which="LM", return_eigenvectors=False)
    mags = np.sort(np.abs(lam))[::-1]
    # Drop the leading (Perron) eigenvalue 1.
    return float(mags[1]) if len(mags) > 1 else 0.0


def _row_entropies(w: sp.csr_matrix) -> np.ndarray:
    ent = np.zeros(w.shape[0])
    for u in range(w.shape[0]):
        p = w.data[w.indptr[u] : w.indptr[u + 1]]
        if len(p):
            ent[u] = -(p * np.log(p)).sum()
    return ent


def entropy(p: np.ndarray) -> float:
    """Shannon entropy in nats, ignoring zero entries."""
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def diagnostics(model: TransitionModel) -> ModelDiagnostics:
    """Stationary distribution, spectral gap 1 - |lambda_2|, and entropies (nats)."""
    pi = stationary_distribution(model)
    mask = pi > 0
    w_sub = model.W[mask][:, mask].tocsr()
    lam2 = _second_eigenvalue_magnitude(w_sub)
    row_ent = _row_entropies(model.W)
    entropy_rate = float(pi @ row_ent)
    return ModelDiagnostics(
        stationary=pi,
        spectral_gap=1.0 - lam2,
        entropy_rate=entropy_rate,
        stationary_entropy=entropy(pi),
    )


def ranked_distributions(model: TransitionModel) -> list[RankedDistribution]:
    """Exact unigram, pooled conditional-bigram, and joint-bigram rank curves."""
    pi = stationary_distribution(model)
    unigram = np.sort(pi[pi > 0])[::-1]
    w = model.W.tocoo()
    cond = np.sort(w.data[w.data > 0])[::-1]
    joint = w.data * pi[w.row]
    joint = np.sort(joint[joint > 0])[::-1]
    joint = joint / joint.sum()  # exact renormalization of giant component
    return [
        RankedDistribution("unigram", unigram),
        RankedDistribution("bigram-conditional", cond),
        RankedDistribution("bigram-joint", joint),
    ]


def rank_law_profile(model: TransitionModel, degree: int) -> np.ndarray:
    """Mean log transition probability by rank over all nodes of one out-degree.

    Averaging across same-degree nodes estimates the rank law without
    single-node sampling noise (the pooled view of the rank plots).
    """
    w = model.W
    deg = np.diff(w.indptr)
    nodes = np.flatnonzero(deg == degree)
    if len(nodes) == 0:
        raise InvalidArgument(f"no node has out-degree {degree}")
    profile = np.zeros(degree)
    for u in nodes:
        p = np.sort(w.data[w.indptr[u] : w.indptr[u + 1]])[::-1]
        profile += np.log(p)
    return profile / len(nodes)


def empirical_unigram(dataset: WalkDataset) -> np.ndarray:
    counts = np.bincount(dataset.sequences.ravel().astype(np.int64),
                         minlength=dataset.vocab_size)
    return counts / counts.sum()


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(p - q).sum())


# --- file formats ---------------------------------------------------------


def write_walks(path, dataset: WalkDataset) -> None:
    """Token-stream file: magic SLWK, version u16, vocab u32, seq_len u32,
    n_seqs u64, tokens u32 little-endian row-major."""
    with open(path, "wb") as f:
        f.write(SLWK_MAGIC)
        f.write(struct.pack("<H", SLWK_VERSION))
        f.write(struct.pack("<I", dataset.vocab_size))
        f.write(struct.pack("<I", dataset.seq_len))
        f.write(struct.pack("<Q", dataset.n_seqs))
        f.write(dataset.sequences.astype("<u4").tobytes())


def read_walks(path) -> WalkDataset:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != SLWK_MAGIC:
            raise InvalidArgument(f"{path}: bad magic {magic!r}")
        (version,) = struct.unpack("<H", f.read(2))
        if version != SLWK_VERSION:
            raise InvalidArgument(f"{path}: unsupported version {version}")
        (vocab,) = struct.unpack("<I", f.read(4))
        (seq_len,) = struct.unpack("<I", f.read(4))
        (n_seqs,) = struct.unpack("<Q", f.read(8))
        tokens = np.frombuffer(f.read(4 * seq_len * n_seqs), dtype="<u4")
    return WalkDataset(vocab, seq_len, tokens.reshape(n_seqs, seq_len).copy(), seed=-1)


def write_ranked_csv(path, dists: list[RankedDistribution]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["rank", "probability", "kind"])
        for d in dists:
            for r, p in zip(d.ranks, d.probabilities):
                writer.writerow([r, f"{p:.12g}", d.kind])
