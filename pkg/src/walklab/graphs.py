"""Random-graph ensembles and normalized transition models.

Conventions:

* Erdos-Renyi graphs use the fixed-edge-count G(n, M) convention so node and
  edge counts match exactly.
* Barabasi-Albert graphs start from a complete seed graph on ``m_attach + 1``
  nodes, which makes the final edge count ``C(m+1, 2) + (n - m - 1) * m``
  reproducible in closed form.
* Edge weights are directed even though the supporting graph is undirected:
  the weights for (u, v) and (v, u) are sampled independently.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateInput, InvalidArgument

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph: no self-loops, no multi-edges.

    ``edges`` is an (E, 2) int64 array with each row (u, v), u < v, sorted
    lexicographically so that equal graphs compare equal.
    """

    n_nodes: int
    edges: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= self.n_nodes):
            raise InvalidArgument("edge endpoint out of node range")
        if e.size and not (e[:, 0] < e[:, 1]).all():
            raise InvalidArgument("edges must be stored as (u, v) with u < v")
        object.__setattr__(self, "edges", e)
        if len(np.unique(e, axis=0)) != len(e):
            raise InvalidArgument("duplicate edges")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_nodes, dtype=np.int64)
        np.add.at(deg, self.edges[:, 0], 1)
        np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def adjacency(self) -> sp.csr_matrix:
        u, v = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(self.edges))
        a = sp.coo_matrix(
            (data, (np.concatenate([u, v]), np.concatenate([v, u]))),
            shape=(self.n_nodes, self.n_nodes),
        )
        return a.tocsr()


@dataclass(frozen=True)
class WeightedGraph:
    """Directed integer weights on the directed expansion of an undirected graph.

    ``weights_uv[i]`` is the weight of edge ``(edges[i, 0] -> edges[i, 1])`` and
    ``weights_vu[i]`` the reverse direction; both lie in [k_min, k_max].
    """

    graph: Graph
    weights_uv: np.ndarray
    weights_vu: np.ndarray
    kappa: float
    k_min: int
    k_max: int

    def __post_init__(self):
        for w in (self.weights_uv, self.weights_vu):
            if len(w) != self.graph.n_edges:
                raise InvalidArgument("one weight per directed edge required")
            if w.size and (w.min() < self.k_min or w.max() > self.k_max):
                raise InvalidArgument("weight outside [k_min, k_max]")

    def weight(self, u: int, v: int) -> int:
        """Weight of the directed edge (u, v); 0 if the support edge is absent."""
        a, b = (u, v) if u < v else (v, u)
        idx = np.flatnonzero(
            (self.graph.edges[:, 0] == a) & (self.graph.edges[:, 1] == b)
        )
        if len(idx) == 0:
            return 0
        i = idx[0]
        return int(self.weights_uv[i] if u < v else self.weights_vu[i])


@dataclass
class TransitionModel:
    """Row-stochastic transition matrix W and initial distribution M."""

    n_nodes: int
    W: sp.csr_matrix
    M: np.ndarray

    def __post_init__(self):
        self.W = sp.csr_matrix(self.W, shape=(self.n_nodes, self.n_nodes))
        self.M = np.asarray(self.M, dtype=np.float64)
        self.validate()

    def validate(self) -> None:
        if self.W.nnz and self.W.data.min() < 0:
            raise InvalidArgument("negative transition probability")
        if self.M.min() < 0:
            raise InvalidArgument("negative initial probability")
        row_sums = np.asarray(self.W.sum(axis=1)).ravel()
        occupied = row_sums > 0
        if occupied.any() and np.abs(row_sums[occupied] - 1.0).max() > ROW_SUM_TOL:
            raise InvalidArgument("transition rows must sum to 1")
        if abs(self.M.sum() - 1.0) > ROW_SUM_TOL:
            raise InvalidArgument("initial distribution must sum to 1")

    def row(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        """Column indices and probabilities of row u."""
        lo, hi = self.W.indptr[u], self.W.indptr[u + 1]
        return self.W.indices[lo:hi], self.W.data[lo:hi]

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.W.indptr)


@dataclass(frozen=True)
class BigramCounts:
    """Occurrence counts of ordered token pairs."""

    vocab_size: int
    pairs: np.ndarray  # (n, 2) int64
    counts: np.ndarray  # (n,) int64

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        counts = np.asarray(self.counts, dtype=np.int64).ravel()
        if len(pairs) != len(counts):
            raise InvalidArgument("pairs and counts must have equal length")
        if counts.size and counts.min() <= 0:
            raise InvalidArgument("counts must be strictly positive")
        if pairs.size and (pairs.min() < 0 or pairs.max() >= self.vocab_size):
            raise InvalidArgument("token id outside vocabulary")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_tokens(cls, tokens, vocab_size: int) -> "BigramCounts":
        """Count consecutive pairs in a single token sequence."""
        t = np.asarray(tokens, dtype=np.int64)
        pairs = np.stack([t[:-1], t[1:]], axis=1)
        uniq, counts = np.unique(pairs, axis=0, return_counts=True)
        return cls(vocab_size, uniq, counts)


def gen_erdos_renyi(n_nodes: int, n_edges: int, seed: int) -> Graph:
    """Uniform simple graph with exactly ``n_edges`` edges (G(n, M) convention)."""
    max_edges = n_nodes * (n_nodes - 1) // 2
    if not 0 <= n_edges <= max_edges:
        raise InvalidArgument(
            f"n_edges={n_edges} outside [0, {max_edges}] for n_nodes={n_nodes}"
        )
    rng = np.random.default_rng(seed)
    if n_edges > max_edges // 2:
        # Dense regime: choosing among all pairs directly avoids slow rejection.
        iu = np.triu_indices(n_nodes, k=1)
        idx = rng.choice(max_edges, size=n_edges, replace=False)
        idx.sort()
        edges = np.stack([iu[0][idx], iu[1][idx]], axis=1).astype(np.int64)
        return Graph(n_nodes, edges)
    chosen: set[int] = set()
    while len(chosen) < n_edges:
        need = n_edges - len(chosen)
        u = rng.integers(0, n_nodes, size=2 * need + 16)
        v = rng.integers(0, n_nodes, size=2 * need + 16)
        ok = u != v
        lo = np.minimum(u[ok], v[ok])
        hi = np.maximum(u[ok], v[ok])
        for code in lo * n_nodes + hi:
            chosen.add(int(code))
            if len(chosen) == n_edges:
                break
    codes = np.sort(np.fromiter(chosen, dtype=np.int64, count=n_edges))
    edges = np.stack([codes // n_nodes, codes % n_nodes], axis=1)
    return Graph(n_nodes, edges)


def gen_barabasi_albert(n_nodes: int, m_attach: int, seed: int) -> Graph:
    """Preferential-attachment graph from a complete seed graph on m+1 nodes.

    Each node beyond the seed attaches ``m_attach`` edges to distinct existing
    nodes chosen with probability proportional to current degree, so the edge
    count is exactly C(m+1, 2) + (n - m - 1) * m.
    """
    if not 1 <= m_attach < n_nodes:
        raise InvalidArgument(f"m_attach={m_attach} must be in [1, n_nodes)")
    rng = np.random.default_rng(seed)
    m = m_attach
    edges: list[tuple[int, int]] = [
        (i, j) for i in range(m + 1) for j in range(i + 1, m + 1)
    ]
    # Degree-weighted sampling via the repeated-nodes list.
    repeated: list[int] = [i for i in range(m + 1) for _ in range(m)]
    for new in range(m + 1, n_nodes):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(repeated[rng.integers(0, len(repeated))])
        for t in sorted(targets):
            edges.append((t, new))
            repeated.append(t)
        repeated.extend([new] * m)
    arr = np.array(edges, dtype=np.int64)
    arr = arr[np.lexsort((arr[:, 1], arr[:, 0]))]
    return Graph(n_nodes, arr)


def power_law_weight_table(kappa: float, k_min: int, k_max: int) -> np.ndarray:
    """Normalized Pr(W = k) proportional to k^-kappa on [k_min, k_max]."""
    ks = np.arange(k_min, k_max + 1, dtype=np.float64)
    p = ks**-kappa
    return p / p.sum()


def assign_weights(
    graph: Graph, kappa: float, k_min: int, k_max: int, seed: int
) -> WeightedGraph:
    """Sample directed integer weights from the truncated discrete power law.

    kappa = 0 gives the uniform distribution over [k_min, k_max]. Exact
    inverse-CDF sampling over the normalized probability table.
    """
    if kappa < 0:
        raise InvalidArgument("kappa must be >= 0")
    if not 1 <= k_min <= k_max:
        raise InvalidArgument(f"need 1 <= k_min <= k_max, got ({k_min}, {k_max})")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(power_law_weight_table(kappa, k_min, k_max))
    e = graph.n_edges
    draws = np.searchsorted(cdf, rng.random(2 * e), side="right") + k_min
    draws = np.minimum(draws, k_max)  # guard against cdf[-1] rounding below 1
    return WeightedGraph(graph, draws[:e], draws[e:], kappa, k_min, k_max)


def _model_from_init(w_init: sp.csr_matrix, n_nodes: int) -> TransitionModel:
    row_sums = np.asarray(w_init.sum(axis=1)).ravel()
    total = row_sums.sum()
    if total <= 0:
        raise DegenerateInput("transition weights are all zero")
    inv = np.zeros_like(row_sums)
    occupied = row_sums > 0
    inv[occupied] = 1.0 / row_sums[occupied]
    w = sp.csr_matrix(w_init.multiply(inv[:, None]))
    m = row_sums / total
    return TransitionModel(n_nodes, w, m)


def build_transition_model(wg: WeightedGraph) -> TransitionModel:
    """Row-normalize the weighted graph: W[u][v] = W_init[u][v] / row sum.

    M is proportional to the row sums of W_init. For the unbiased case this
    reduces exactly to W = A / deg and M = deg / 2E.
    """
    deg = wg.graph.degrees()
    isolated = np.flatnonzero(deg == 0)
    if len(isolated):
        raise DegenerateInput(f"isolated node(s) {isolated[:10].tolist()} have no edges")
    u, v = wg.graph.edges[:, 0], wg.graph.edges[:, 1]
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    data = np.concatenate([wg.weights_uv, wg.weights_vu]).astype(np.float64)
    w_init = sp.coo_matrix((data, (rows, cols)), shape=(wg.graph.n_nodes,) * 2).tocsr()
    if wg.kappa == 0 and wg.k_min == wg.k_max:
        # Exact unbiased reduction: constant weights cancel bit-for-bit.
        deg_f = deg.astype(np.float64)
        w = sp.csr_matrix(wg.graph.adjacency().multiply(1.0 / deg_f[:, None]))
        return TransitionModel(wg.graph.n_nodes, w, deg_f / (2.0 * wg.graph.n_edges))
    return _model_from_init(w_init, wg.graph.n_nodes)


def unbiased_transition_model(graph: Graph) -> TransitionModel:
    """Unbiased walk on ``graph``: W = A/deg, M = deg/2E."""
    return build_transition_model(
        assign_weights(graph, kappa=0.0, k_min=1, k_max=1, seed=0)
    )


def build_bigram_model(counts: BigramCounts, min_count: int) -> TransitionModel:
    """Normalize bigram counts into a transition model.

    Bigrams occurring ``min_count`` times or fewer are removed before
    normalization. Tokens with no surviving outgoing bigram keep a zero row
    and zero initial probability.
    """
    keep = counts.counts > min_count
    if not keep.any():
        raise DegenerateInput(f"no bigrams survive min_count={min_count}")
    pairs = counts.pairs[keep]
    c = counts.counts[keep].astype(np.float64)
    w_init = sp.coo_matrix(
        (c, (pairs[:, 0], pairs[:, 1])), shape=(counts.vocab_size,) * 2
    ).tocsr()
    return _model_from_init(w_init, counts.vocab_size)


# --- file formats ---------------------------------------------------------

SLTM_MAGIC = b"SLTM"
SLTM_VERSION = 1


def write_graph(path, graph: Graph, wg: WeightedGraph | None = None) -> None:
    """Text edge list with `#nodes=<n> edges=<E>` header; weighted rows carry
    the forward and reverse weights."""
    with open(path, "w") as f:
        f.write(f"#nodes={graph.n_nodes} edges={graph.n_edges}\n")
        if wg is None:
            for u, v in graph.edges:
                f.write(f"{u} {v}\n")
        else:
            for (u, v), wuv, wvu in zip(graph.edges, wg.weights_uv, wg.weights_vu):
                f.write(f"{u} {v} {wuv} {wvu}\n")


def read_graph(path) -> tuple[Graph, WeightedGraph | None]:
    with open(path) as f:
        header = f.readline().strip()
        if not header.startswith("#nodes="):
            raise InvalidArgument(f"bad graph header in {path}: {header!r}")
        n_nodes = int(header.split()[0].split("=")[1])
        n_edges = int(header.split()[1].split("=")[1])
        rows = [line.split() for line in f if line.strip()]
    if len(rows) != n_edges:
        raise InvalidArgument(f"{path}: header says {n_edges} edges, found {len(rows)}")
    edges = np.array([[int(r[0]), int(r[1])] for r in rows], dtype=np.int64)
    graph = Graph(n_nodes, edges.reshape(-1, 2))
    if rows and len(rows[0]) == 4:
        wuv = np.array([int(r[2]) for r in rows], dtype=np.int64)
        wvu = np.array([int(r[3]) for r in rows], dtype=np.int64)
        k_min = int(min(wuv.min(), wvu.min()))
        k_max = int(max(wuv.max(), wvu.max()))
        return graph, WeightedGraph(graph, wuv, wvu, float("nan"), k_min, k_max)
    return graph, None


def write_bigram_counts(path, counts: BigramCounts) -> None:
    with open(path, "w") as f:
        for (u, v), c in zip(counts.pairs, counts.counts):
            f.write(f"{u} {v} {c}\n")


def read_bigram_counts(path, vocab_size: int) -> BigramCounts:
    pairs, counts = [], []
    with open(path) as f:
        for line in f:
            if not line.strip():
                continue
            u, v, c = line.split()
            pairs.append((int(u), int(v)))
            counts.append(int(c))
    return BigramCounts(vocab_size, np.array(pairs, dtype=np.int64).reshape(-1, 2),
                        np.array(counts, dtype=np.int64))


def write_transition_model(path, model: TransitionModel) -> None:
    """Binary CSR dump: magic SLTM, version u16, V u64, indptr u64[V+1],
    indices u32[nnz], probabilities f64[nnz], M f64[V]; little-endian."""
    w = model.W
    with open(path, "wb") as f:
        f.write(SLTM_MAGIC)
        f.write(struct.pack("<H", SLTM_VERSION))
        f.write(struct.pack("<Q", model.n_nodes))
        f.write(w.indptr.astype("<u8").tobytes())
        f.write(w.indices.astype("<u4").tobytes())
        f.write(w.data.astype("<f8").tobytes())
        f.write(model.M.astype("<f8").tobytes())


def read_transition_model(path) -> TransitionModel:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != SLTM_MAGIC:
            raise InvalidArgument(f"{path}: bad magic {magic!r}")
        (version,) = struct.unpack("<H", f.read(2))
        if version != SLTM_VERSION:
            raise InvalidArgument(f"{path}: unsupported version {version}")
        (v,) = struct.unpack("<Q", f.read(8))
        indptr = np.frombuffer(f.read(8 * (v + 1)), dtype="<u8").astype(np.int64)
        nnz = int(indptr[-1])
        indices = np.frombuffer(f.read(4 * nnz), dtype="<u4").astype(np.int32)
        data = np.frombuffer(f.read(8 * nnz), dtype="<f8").astype(np.float64)
        m = np.frombuffer(f.read(8 * v), dtype="<f8").astype(np.float64)
    w = sp.csr_matrix((data, indices, indptr), shape=(v, v))
    return TransitionModel(int(v), w, m)
