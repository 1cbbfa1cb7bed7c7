"""Laboratory for scaling-law experiments on Markov random walks.

Subpackages cover graph ensembles and transition models (:mod:`walklab.graphs`),
walk-dataset generation and diagnostics (:mod:`walklab.walks`), analytic
counting-model baselines (:mod:`walklab.baselines`), robust 1d power-law fits
with bootstrap confidence intervals (:mod:`walklab.powerlaw`), 2d loss-surface
fits (:mod:`walklab.surface`), and compute-optimal frontier extraction
(:mod:`walklab.frontier`).
"""

__version__ = "0.1.0"
