"""Analytic loss baselines for the counting estimator, with Monte-Carlo oracles.

The counting estimator for a distribution pi over V outcomes, fit on D samples,
has expected losses (in nats for cross-entropy):

* MSE:  (1/V) * sum_a pi_a (1 - pi_a) / D
* CSE:  S_pi + (V - 1) / (2 D) + (V - 2/3 - (1/3) sum_a 1/pi_a) / D^2 + ...

For an unbiased random walk, averaging the per-node estimate over the
stationary distribution gives  <S_{p(.|v)}> + (2E - n) / (2D) + O(1/D^2).

The Monte-Carlo oracle uses additive smoothing (n_a + eps) / (D + eps*V),
since cross-entropy of an unsmoothed counting estimate is infinite whenever a
supported outcome was never sampled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .graphs import TransitionModel
from .walks import sample_walks, stationary_distribution

DEFAULT_SMOOTHING = 1e-3


@dataclass(frozen=True)
class Distribution:
    """Probability vector over a finite outcome space."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.min() < 0:
            raise InvalidArgument("negative probability")
        if abs(p.sum() - 1.0) > 1e-12:
            raise InvalidArgument("probabilities must sum to 1")
        object.__setattr__(self, "probs", p)

    @property
    def n_outcomes(self) -> int:
        return len(self.probs)

    def entropy(self) -> float:
        p = self.probs[self.probs > 0]
        return float(-(p * np.log(p)).sum())


@dataclass(frozen=True)
class BaselinePrediction:
    """Truncated 1/D expansion of an expected counting-model loss."""

    loss_kind: str  # "mse" | "cse"
    leading: float  # irreducible term: 0 for MSE, S_pi for CSE
    coeff_1: float  # 1/D coefficient
    coeff_2: float = 0.0  # 1/D^2 coefficient (CSE order 2 only)

    def value_at(self, d: float) -> float:
        return self.leading + self.coeff_1 / d + self.coeff_2 / d**2


def mse_prediction(pi: Distribution) -> BaselinePrediction:
    p = pi.probs
    return BaselinePrediction("mse", 0.0, float((p * (1 - p)).sum() / len(p)))


def cse_prediction(pi: Distribution, order: int = 1) -> BaselinePrediction:
    if order not in (1, 2):
        raise InvalidArgument("order must be 1 or 2")
    v = pi.n_outcomes
    coeff_2 = 0.0
    if order == 2:
        if pi.probs.min() < 1e-12:
            raise InvalidArgument("order-2 CSE term undefined for zero-probability outcomes")
        coeff_2 = v - 2.0 / 3.0 - (1.0 / pi.probs).sum() / 3.0
    return BaselinePrediction("cse", pi.entropy(), (v - 1) / 2.0, coeff_2)


def expected_mse(pi: Distribution, d: int) -> float:
    """E[L_MSE] of the counting estimator on D samples."""
    if d < 1:
        raise InvalidArgument("D must be >= 1")
    return mse_prediction(pi).value_at(d)


def expected_cse(pi: Distribution, d: int, order: int = 1) -> float:
    """E[L_CSE] of the counting estimator, truncated at 1/D or 1/D^2."""
    if d < 1:
        raise InvalidArgument("D must be >= 1")
    return cse_prediction(pi, order).value_at(d)


def walk_baseline_cse(model: TransitionModel, d: int) -> float:
    """First-order counting baseline for next-node prediction on a walk.

    General form sum_v pi(v) [S_{p(.|v)} + (deg_out(v) - 1) / (2 pi(v) D)],
    which reduces to <S> + (2E - n)/(2D) for unbiased graph walks.
    """
    if d < 1:
        raise InvalidArgument("D must be >= 1")
    pi = stationary_distribution(model)
    support = pi > 0
    w = model.W
    entropy_terms = 0.0
    coeff = 0.0
    for v in np.flatnonzero(support):
        p = w.data[w.indptr[v] : w.indptr[v + 1]]
        entropy_terms += pi[v] * float(-(p * np.log(p)).sum())
        coeff += (len(p) - 1) / 2.0
    return entropy_terms + coeff / d


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_trials: int


def _smoothed_cse(pi: np.ndarray, counts: np.ndarray, d: int, eps: float) -> np.ndarray:
    """Cross-entropy of smoothed counting estimates, rows = trials."""
    v = counts.shape[-1]
    p_hat = (counts + eps) / (d + eps * v)
    return -(pi * np.log(p_hat)).sum(axis=-1)


def mc_counting_loss(
    pi: Distribution,
    d: int,
    loss_kind: str,
    n_trials: int,
    seed: int,
    smoothing: float = DEFAULT_SMOOTHING,
) -> McEstimate:
    """Empirical mean and standard error of the counting-estimator loss.

    Each trial draws D i.i.d. samples from pi, forms the counting estimate,
    and evaluates the loss against the true pi. CSE trials smooth the
    estimate; MSE trials use the raw counts.
    """
    if n_trials < 2:
        raise InvalidArgument("n_trials must be >= 2")
    if loss_kind not in ("mse", "cse"):
        raise InvalidArgument(f"unknown loss_kind {loss_kind!r}")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(d, pi.probs, size=n_trials).astype(np.float64)
    if loss_kind == "mse":
        losses = ((counts / d - pi.probs) ** 2).mean(axis=1)
    else:
        losses = _smoothed_cse(pi.probs, counts, d, smoothing)
    return McEstimate(float(losses.mean()),
                      float(losses.std(ddof=1) / np.sqrt(n_trials)), n_trials)


def mc_walk_counting_loss(
    model: TransitionModel,
    d: int,
    n_trials: int,
    seed: int,
    seq_len: int = 100,
    smoothing: float = DEFAULT_SMOOTHING,
) -> McEstimate:
    """Monte-Carlo oracle for the graph-walk counting baseline.

    Samples D-token walk datasets, builds per-node counting estimates of the
    transition rows (smoothed over each node's support), and evaluates the
    stationary-weighted cross-entropy against the true model.
    """
    if n_trials < 2:
        raise InvalidArgument("n_trials must be >= 2")
    pi = stationary_distribution(model)
    n_seqs = max(1, d // seq_len)
    w = model.W
    losses = np.empty(n_trials)
    for trial in range(n_trials):
        ds = sample_walks(model, seq_len, n_seqs, seed=seed * 100_003 + trial)
        u = ds.sequences[:, :-1].ravel().astype(np.int64)
        v = ds.sequences[:, 1:].ravel().astype(np.int64)
        # Count transitions on each node's support.
        loss = 0.0
        order = np.lexsort((v, u))
        u_s, v_s = u[order], v[order]
        bounds = np.searchsorted(u_s, np.arange(model.n_nodes + 1))
        for node in np.flatnonzero(pi > 0):
            cols = w.indices[w.indptr[node] : w.indptr[node + 1]]
            p = w.data[w.indptr[node] : w.indptr[node + 1]]
            seen = v_s[bounds[node] : bounds[node + 1]]
            counts = np.searchsorted(np.sort(seen), cols, side="right") - np.searchsorted(
                np.sort(seen), cols, side="left"
            )
            n_v = len(seen)
            p_hat = (counts + smoothing) / (n_v + smoothing * len(cols))
            loss += pi[node] * float(-(p * np.log(p_hat)).sum())
        losses[trial] = loss
    return McEstimate(float(losses.mean()),
                      float(losses.std(ddof=1) / np.sqrt(n_trials)), n_trials)
