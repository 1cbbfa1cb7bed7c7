"""Compute-optimal frontier extraction from a fitted loss surface.

Compute is defined as C = 6 N D. For each C on a log grid the loss surface is
minimized in two directions, min_N L(N, C/6N) and min_D L(C/6D, D); samples
whose argmin lands on a grid boundary are flagged. The optimal-loss curve is
fit with the robust power-law protocol (L_opt = E_C + K C^-gamma, 200
bootstrap replicates), and N_opt, D_opt with ordinary log-log regression.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import FitFailure, InvalidArgument
from .powerlaw import FitCI, PowerLawFit, Series1D, bca_ci, fit_power_law
from .surface import ChinchillaFit, SurfaceModel

COMPUTE_PER_PARAM_TOKEN = 6.0
DEFAULT_CLIP = (0.1, 0.1)


@dataclass
class FrontierSamples:
    compute: np.ndarray
    l_opt: np.ndarray  # min over the N direction
    l_opt_alt: np.ndarray  # min over the D direction
    n_opt: np.ndarray
    d_opt: np.ndarray
    flagged: np.ndarray  # argmin hit a grid boundary
    grid_points: int
    clip: tuple[float, float]

    def unflagged(self) -> "FrontierSamples":
        keep = ~self.flagged
        return FrontierSamples(
            self.compute[keep], self.l_opt[keep], self.l_opt_alt[keep],
            self.n_opt[keep], self.d_opt[keep], self.flagged[keep],
            self.grid_points, self.clip,
        )


@dataclass
class FrontierResult:
    gamma: float
    K: float
    E_C: float
    a: float
    N0: float
    b: float
    D0: float
    l_opt_fit: PowerLawFit
    l_opt_ci: FitCI | None

    @property
    def a_plus_b(self) -> float:
        return self.a + self.b


def sample_frontier(
    surface: SurfaceModel,
    grid_points: int = 100,
    clip: tuple[float, float] = DEFAULT_CLIP,
) -> FrontierSamples:
    """Minimize the surface along both directions for each compute value."""
    if grid_points < 20:
        raise InvalidArgument("grid_points must be >= 20")
    if not (0 <= clip[0] < 1 and 0 <= clip[1] < 1 and clip[0] + clip[1] < 1):
        raise InvalidArgument("clip fractions must leave a nonempty C window")
    n_lo, n_hi = surface.n_range
    d_lo, d_hi = surface.d_range
    n_grid = np.logspace(np.log10(n_lo), np.log10(n_hi), grid_points)
    d_grid = np.logspace(np.log10(d_lo), np.log10(d_hi), grid_points)

    lc_min = np.log10(COMPUTE_PER_PARAM_TOKEN * n_lo * d_lo)
    lc_max = np.log10(COMPUTE_PER_PARAM_TOKEN * n_hi * d_hi)
    span = lc_max - lc_min
    lo = lc_min + clip[0] * span
    hi = lc_max - clip[1] * span
    if hi <= lo:
        raise InvalidArgument("empty feasible compute range after clipping")
    computes = np.logspace(lo, hi, grid_points)

    l_opt = np.full(grid_points, np.nan)
    l_alt = np.full(grid_points, np.nan)
    n_opt = np.full(grid_points, np.nan)
    d_opt = np.full(grid_points, np.nan)
    flagged = np.zeros(grid_points, dtype=bool)

    for i, c in enumerate(computes):
        # Direction 1: sweep N, D implied by the compute constraint.
        d_implied = c / (COMPUTE_PER_PARAM_TOKEN * n_grid)
        feasible = (d_implied >= d_lo) & (d_implied <= d_hi)
        if not feasible.any():
            flagged[i] = True
            continue
        losses = surface.predict(n_grid[feasible], d_implied[feasible])
        j = int(np.argmin(losses))
        l_opt[i] = losses[j]
        n_opt[i] = n_grid[feasible][j]
        if j == 0 or j == feasible.sum() - 1:
            flagged[i] = True

        # Direction 2: sweep D, N implied.
        n_implied = c / (COMPUTE_PER_PARAM_TOKEN * d_grid)
        feasible_d = (n_implied >= n_lo) & (n_implied <= n_hi)
        losses_d = surface.predict(n_implied[feasible_d], d_grid[feasible_d])
        j2 = int(np.argmin(losses_d))
        l_alt[i] = losses_d[j2]
        d_opt[i] = d_grid[feasible_d][j2]
        if j2 == 0 or j2 == feasible_d.sum() - 1:
            flagged[i] = True

    ok = ~np.isnan(l_opt)
    return FrontierSamples(
        computes[ok], l_opt[ok], l_alt[ok], n_opt[ok], d_opt[ok], flagged[ok],
        grid_points, clip,
    )


def fit_frontier(samples: FrontierSamples, n_boot: int = 200,
                 seed: int = 0) -> FrontierResult:
    """Power-law fit of L_opt(C) plus log-log OLS for N_opt(C), D_opt(C)."""
    use = samples.unflagged()
    if len(use.compute) < 10:
        raise FitFailure(
            f"only {len(use.compute)} unflagged frontier samples (need >= 10)"
        )
    series = Series1D(use.compute, use.l_opt, held_fixed="frontier")
    l_fit = fit_power_law(series)
    ci = bca_ci(series, l_fit, n_boot=n_boot, seed=seed) if n_boot else None

    lc = np.log(use.compute)
    a, ln_n0 = np.polyfit(lc, np.log(use.n_opt), 1)
    b, ln_d0 = np.polyfit(lc, np.log(use.d_opt), 1)
    return FrontierResult(
        gamma=l_fit.beta,
        K=l_fit.B,
        E_C=l_fit.E,
        a=float(a),
        N0=float(np.exp(ln_n0)),
        b=float(b),
        D0=float(np.exp(ln_d0)),
        l_opt_fit=l_fit,
        l_opt_ci=ci,
    )


def closed_form_frontier(fit: ChinchillaFit) -> tuple[float, float, float]:
    """(gamma, a, b) implied analytically by the additive parametric surface."""
    if fit.alpha <= 0 or fit.beta <= 0:
        raise InvalidArgument("alpha and beta must be positive")
    s = fit.alpha + fit.beta
    return fit.alpha * fit.beta / s, fit.beta / s, fit.alpha / s


def write_frontier_csv(path, samples: FrontierSamples) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["C", "L_opt", "N_opt", "D_opt", "flagged"])
        for c, l, n, d, fl in zip(samples.compute, samples.l_opt,
                                  samples.n_opt, samples.d_opt, samples.flagged):
            writer.writerow([f"{c:.9g}", f"{l:.9g}", f"{n:.9g}", f"{d:.9g}", int(fl)])
