"""Two-dimensional loss-surface fits over (N, D).

All methods fit in (log10 N, log10 D) space with a Huber objective
(delta = 1e-3 by default, matching the reference Chinchilla-refit setting):

* the additive parametric surface L = E + A/N^alpha + B/D^beta, optimized in
  log-sum-exp form over a grid of initializations;
* the early-stopping form L = [(Nc/N)^(alpha/beta) + Dc/D]^beta;
* kernel ridge regression with an additive ANOVA-style RBF kernel, solved by
  iteratively reweighted least squares;
* a 3-layer GeLU MLP trained full-batch with decoupled weight decay.

Inputs are centered and scaled, outputs centered; raw-loss MSE is the shared
comparison metric.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import DegenerateInput, FitFailure, InvalidArgument, NumericFailure
from .powerlaw import Series1D, fit_power_law, huber_rho

DEFAULT_HUBER_DELTA = 1e-3
LOSS_TABLE_COLUMNS = [
    "run_id",
    "n_params_total",
    "n_params_nonembed",
    "tokens",
    "loss",
    "dataset_tag",
    "arch_tag",
    "lr",
    "seed",
]


@dataclass(frozen=True)
class LossRun:
    run_id: str
    n_params_total: float
    n_params_nonembed: float
    tokens: float
    loss: float
    dataset_tag: str = ""
    arch_tag: str = ""
    lr: float = float("nan")
    seed: int = 0


@dataclass
class LossTable:
    """Loss records plus the axis convention (total vs non-embedding N)."""

    runs: list[LossRun]
    axis: str = "total"  # "total" | "nonembed"

    def __post_init__(self):
        if self.axis not in ("total", "nonembed"):
            raise InvalidArgument(f"unknown axis {self.axis!r}")
        ids = [r.run_id for r in self.runs]
        if len(set(ids)) != len(ids):
            raise InvalidArgument("run_ids must be unique")
        for r in self.runs:
            if r.tokens <= 0 or r.loss <= 0 or self._n_of(r) <= 0:
                raise InvalidArgument(f"run {r.run_id}: N, D, loss must be positive")

    def _n_of(self, run: LossRun) -> float:
        return run.n_params_total if self.axis == "total" else run.n_params_nonembed

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = np.array([self._n_of(r) for r in self.runs])
        d = np.array([r.tokens for r in self.runs])
        y = np.array([r.loss for r in self.runs])
        return n, d, y

    def __len__(self) -> int:
        return len(self.runs)

    def minimized(self) -> "LossTable":
        """Per (N, D), keep the run with the minimal loss over hyperparameters."""
        best: dict[tuple[float, float], LossRun] = {}
        for r in self.runs:
            key = (self._n_of(r), r.tokens)
            if key not in best or r.loss < best[key].loss:
                best[key] = r
        return LossTable(sorted(best.values(), key=lambda r: r.run_id), self.axis)

    def drop_largest_losses(self, k: int) -> "LossTable":
        """Remove the k rows with the largest losses (outlier rule)."""
        if k <= 0:
            return LossTable(list(self.runs), self.axis)
        keep = sorted(self.runs, key=lambda r: r.loss)[: max(len(self.runs) - k, 0)]
        return LossTable(sorted(keep, key=lambda r: r.run_id), self.axis)

    def subset(self, indices) -> "LossTable":
        return LossTable([self.runs[i] for i in indices], self.axis)

    def slices_over_tokens(self, min_points: int = 4) -> list[Series1D]:
        """L(D)_N series, one per N value with enough points."""
        groups: dict[float, list[LossRun]] = {}
        for r in self.runs:
            groups.setdefault(self._n_of(r), []).append(r)
        out = []
        for n_val in sorted(groups):
            rs = groups[n_val]
            if len(rs) >= min_points:
                out.append(
                    Series1D(
                        np.array([r.tokens for r in rs]),
                        np.array([r.loss for r in rs]),
                        held_fixed="N",
                        held_value=n_val,
                    )
                )
        return out

    def slices_over_params(self, min_points: int = 4) -> list[Series1D]:
        """L(N)_D series, one per D value with enough points."""
        groups: dict[float, list[LossRun]] = {}
        for r in self.runs:
            groups.setdefault(r.tokens, []).append(r)
        out = []
        for d_val in sorted(groups):
            rs = groups[d_val]
            if len(rs) >= min_points:
                out.append(
                    Series1D(
                        np.array([self._n_of(r) for r in rs]),
                        np.array([r.loss for r in rs]),
                        held_fixed="D",
                        held_value=d_val,
                    )
                )
        return out


def read_loss_table(path, axis: str = "total") -> tuple[LossTable, list[str]]:
    """Parse the LossTable CSV; returns (table, warnings about dropped rows)."""
    runs: list[LossRun] = []
    notes: list[str] = []
    seen: dict[tuple, int] = {}
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise InvalidArgument(f"{path}: empty file")
        missing = [c for c in LOSS_TABLE_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise InvalidArgument(f"{path}: missing columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            try:
                run = LossRun(
                    run_id=row["run_id"],
                    n_params_total=float(row["n_params_total"]),
                    n_params_nonembed=float(row["n_params_nonembed"]),
                    tokens=float(row["tokens"]),
                    loss=float(row["loss"]),
                    dataset_tag=row["dataset_tag"],
                    arch_tag=row["arch_tag"],
                    lr=float(row["lr"]) if row["lr"] else float("nan"),
                    seed=int(row["seed"]) if row["seed"] else 0,
                )
            except (ValueError, TypeError, KeyError) as exc:
                notes.append(f"line {lineno}: malformed row ({exc})")
                continue
            key = (run.n_params_total, run.tokens, run.lr, run.seed)
            if key in seen:
                # duplicated configuration: keep the lower loss (the loss
                # table is defined as the per-configuration minimum)
                idx = seen[key]
                notes.append(
                    f"line {lineno}: duplicate (N, D, lr, seed); kept the minimum"
                )
                if run.loss < runs[idx].loss:
                    runs[idx] = run
                continue
            seen[key] = len(runs)
            runs.append(run)
    if not runs:
        raise InvalidArgument(f"{path}: no valid rows")
    return LossTable(runs, axis), notes


def write_loss_table(path, table: LossTable) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(LOSS_TABLE_COLUMNS)
        for r in table.runs:
            writer.writerow(
                [r.run_id, r.n_params_total, r.n_params_nonembed, r.tokens,
                 r.loss, r.dataset_tag, r.arch_tag, r.lr, r.seed]
            )


# --- parametric fits -------------------------------------------------------


@dataclass
class ChinchillaFit:
    """L(N, D) = E + A/N^alpha + B/D^beta."""

    A: float
    B: float
    E: float
    alpha: float
    beta: float
    huber_delta: float
    objective: float
    train_mse: float = float("nan")
    val_mse: float = float("nan")

    def predict(self, n, d) -> np.ndarray:
        n = np.asarray(n, dtype=np.float64)
        d = np.asarray(d, dtype=np.float64)
        return self.E + self.A * n**-self.alpha + self.B * d**-self.beta


@dataclass
class KaplanFit:
    """L(N, D) = [(Nc/N)^(alpha/beta) + Dc/D]^beta."""

    N_c: float
    D_c: float
    alpha: float
    beta: float
    huber_delta: float
    objective: float
    train_mse: float = float("nan")
    val_mse: float = float("nan")

    def predict(self, n, d) -> np.ndarray:
        n = np.asarray(n, dtype=np.float64)
        d = np.asarray(d, dtype=np.float64)
        return ((self.N_c / n) ** (self.alpha / self.beta) + self.D_c / d) ** self.beta


def _logsumexp_rows(cols: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    stacked = np.stack(cols, axis=0)
    m = stacked.max(axis=0)
    z = np.exp(stacked - m)
    s = z.sum(axis=0)
    return m + np.log(s), z / s


def fit_chinchilla_2d(
    table: LossTable,
    delta: float = DEFAULT_HUBER_DELTA,
    extra_starts: int = 0,
) -> ChinchillaFit:
    """Huber fit of log L to log(e^e + e^(a - alpha ln N) + e^(b - beta ln D)).

    Initialization grid: alpha, beta in {0, 0.5, ..., 2}; a, b in {0, 5, ...,
    25}; e in {-1, ..., 1.5}; L-BFGS-B from each start, best objective kept.
    """
    n, d, y = table.arrays()
    if len({(ni, di) for ni, di in zip(n, d)}) < 10:
        raise InvalidArgument("need at least 10 distinct (N, D) points")
    ln_n, ln_d, ln_y = np.log(n), np.log(d), np.log(y)

    def objective(theta):
        e, a, b, alpha, beta = theta
        f, w = _logsumexp_rows([np.full_like(ln_y, e), a - alpha * ln_n,
                                b - beta * ln_d])
        r = f - ln_y
        drho = np.clip(r, -delta, delta)
        grad_f = np.array(
            [
                (drho * w[0]).sum(),
                (drho * w[1]).sum(),
                (drho * w[2]).sum(),
                -(drho * w[1] * ln_n).sum(),
                -(drho * w[2] * ln_d).sum(),
            ]
        )
        return huber_rho(r, delta).sum(), grad_f

    starts = [
        (e0, a0, b0, al0, be0)
        for e0 in (-1.0, 0.0, 0.5, 1.0, 1.5)
        for a0 in (0.0, 5.0, 10.0, 15.0, 20.0, 25.0)
        for b0 in (0.0, 5.0, 10.0, 15.0, 20.0, 25.0)
        for al0 in (0.0, 0.5, 1.0, 1.5, 2.0)
        for be0 in (0.0, 0.5, 1.0, 1.5, 2.0)
    ]
    bounds = [(-5, 10), (-5, 40), (-5, 40), (0, 4), (0, 4)]
    best = None
    for theta0 in starts:
        res = minimize(objective, theta0, jac=True, method="L-BFGS-B",
                       bounds=bounds, options={"maxiter": 200})
        if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise FitFailure("no 2d-fit initialization converged")
    # Polish the winner with tight tolerances.
    best = minimize(objective, best.x, jac=True, method="L-BFGS-B", bounds=bounds,
                    options={"maxiter": 5000, "ftol": 1e-16, "gtol": 1e-12})
    e, a, b, alpha, beta = best.x
    fit = ChinchillaFit(
        A=float(np.exp(a)),
        B=float(np.exp(b)),
        E=float(np.exp(e)),
        alpha=float(alpha),
        beta=float(beta),
        huber_delta=delta,
        objective=float(best.fun),
    )
    fit.train_mse = float(((fit.predict(n, d) - y) ** 2).mean())
    return fit


def fit_kaplan_2d(table: LossTable, delta: float = DEFAULT_HUBER_DELTA) -> KaplanFit:
    """Huber fit of the early-stopping form in log space."""
    n, d, y = table.arrays()
    if len({(ni, di) for ni, di in zip(n, d)}) < 10:
        raise InvalidArgument("need at least 10 distinct (N, D) points")
    if len(set(n)) < 2 or len(set(d)) < 2:
        raise FitFailure("Kaplan form unidentifiable without variation in both N and D")
    ln_n, ln_d, ln_y = np.log(n), np.log(d), np.log(y)

    # theta = (ln Nc, ln Dc, alpha, beta); log L = beta * LSE((alpha/beta)(lnNc - lnN), lnDc - lnD)
    def objective(theta):
        lnc, ldc, alpha, beta = theta
        t1 = (alpha / beta) * (lnc - ln_n)
        t2 = ldc - ln_d
        f, w = _logsumexp_rows([t1, t2])
        r = beta * f - ln_y
        drho = np.clip(r, -delta, delta)
        grad = np.array(
            [
                (drho * alpha * w[0]).sum(),
                (drho * beta * w[1]).sum(),
                (drho * w[0] * (lnc - ln_n)).sum(),
                (drho * (f - w[0] * (alpha / beta) * (lnc - ln_n))).sum(),
            ]
        )
        return huber_rho(r, delta).sum(), grad

    starts = [
        (lnc, ldc, al, be)
        for lnc in (10.0, 15.0, 20.0, 25.0)
        for ldc in (10.0, 15.0, 20.0, 25.0)
        for al in (0.25, 0.5, 1.0)
        for be in (0.25, 0.5, 1.0)
    ]
    bounds = [(-5, 60), (-5, 60), (1e-3, 4), (1e-3, 4)]
    best = None
    for theta0 in starts:
        res = minimize(objective, theta0, jac=True, method="L-BFGS-B",
                       bounds=bounds, options={"maxiter": 200})
        if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise FitFailure("no Kaplan-fit initialization converged")
    best = minimize(objective, best.x, jac=True, method="L-BFGS-B", bounds=bounds,
                    options={"maxiter": 5000, "ftol": 1e-16, "gtol": 1e-12})
    lnc, ldc, alpha, beta = best.x
    fit = KaplanFit(
        N_c=float(np.exp(lnc)),
        D_c=float(np.exp(ldc)),
        alpha=float(alpha),
        beta=float(beta),
        huber_delta=delta,
        objective=float(best.fun),
    )
    fit.train_mse = float(((fit.predict(n, d) - y) ** 2).mean())
    return fit


# --- nonparametric surfaces -------------------------------------------------


@dataclass
class Normalization:
    """Affine map between raw (log10 N, log10 D) and centered/scaled inputs."""

    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: float

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return (x - self.x_mean) / self.x_scale

    def denormalize(self, z: np.ndarray) -> np.ndarray:
        return z * self.x_scale + self.x_mean

    @classmethod
    def fit(cls, x: np.ndarray, y: np.ndarray) -> "Normalization":
        scale = x.std(axis=0)
        scale[scale == 0] = 1.0
        return cls(x.mean(axis=0), scale, float(y.mean()))


@dataclass
class SurfaceModel:
    """Predictor of loss over (log10 N, log10 D), with the raw data ranges."""

    kind: str  # parametric | kernel | mlp
    predict_fn: object
    n_range: tuple[float, float]
    d_range: tuple[float, float]
    diagnostics: dict = field(default_factory=dict)

    def predict(self, n, d) -> np.ndarray:
        """Loss at raw parameter count(s) n and token count(s) d."""
        n = np.atleast_1d(np.asarray(n, dtype=np.float64))
        d = np.atleast_1d(np.asarray(d, dtype=np.float64))
        x = np.stack(np.broadcast_arrays(np.log10(n), np.log10(d)), axis=-1)
        return np.asarray(self.predict_fn(x.reshape(-1, 2))).reshape(x.shape[:-1])


def surface_from_parametric(fit: ChinchillaFit | KaplanFit,
                            n_range: tuple[float, float],
                            d_range: tuple[float, float]) -> SurfaceModel:
    def predict_fn(x):
        return fit.predict(10.0 ** x[:, 0], 10.0 ** x[:, 1])

    return SurfaceModel("parametric", predict_fn, n_range, d_range,
                        {"fit": fit})


def _table_xy(table: LossTable) -> tuple[np.ndarray, np.ndarray]:
    n, d, y = table.arrays()
    return np.stack([np.log10(n), np.log10(d)], axis=1), y


def _anova_kernel(xa: np.ndarray, xb: np.ndarray,
                  weights=(1.0, 1.0, 1.0), lengthscale=1.0) -> np.ndarray:
    w_n, w_d, w_nd = weights
    dn = (xa[:, None, 0] - xb[None, :, 0]) ** 2
    dd = (xa[:, None, 1] - xb[None, :, 1]) ** 2
    s = 2.0 * lengthscale**2
    return w_n * np.exp(-dn / s) + w_d * np.exp(-dd / s) + w_nd * np.exp(-(dn + dd) / s)


def fit_kernel_surface(
    table: LossTable,
    lam: float = 1e-3,
    delta: float = DEFAULT_HUBER_DELTA,
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0),
    lengthscale: float = 1.0,
    max_iter: int = 100,
    tol: float = 1e-8,
) -> SurfaceModel:
    """Huber kernel ridge regression via IRLS on the ANOVA RBF kernel.

    Per-sample weights w_i = min(1, delta/|r_i|); each step solves
    (W K + lam I) alpha = W y_c.
    """
    if lam <= 0:
        raise InvalidArgument("lam must be positive")
    x_raw, y = _table_xy(table)
    if len(y) < 3:
        raise InvalidArgument("need at least 3 points")
    norm = Normalization.fit(x_raw, y)
    x = norm.normalize(x_raw)
    y_c = y - norm.y_mean
    k = _anova_kernel(x, x, weights, lengthscale)
    n = len(y)
    w = np.ones(n)
    alpha = np.zeros(n)
    for _ in range(max_iter):
        a_mat = w[:, None] * k + lam * np.eye(n)
        try:
            alpha = np.linalg.solve(a_mat, w * y_c)
        except np.linalg.LinAlgError as exc:
            raise NumericFailure(
                f"IRLS system singular (cond ~ {np.linalg.cond(a_mat):.2e})"
            ) from exc
        r = y_c - k @ alpha
        w_new = np.where(np.abs(r) <= delta, 1.0, delta / np.maximum(np.abs(r), 1e-300))
        if np.abs(w_new - w).max() < tol:
            w = w_new
            break
        w = w_new

    def predict_fn(x_query):
        z = norm.normalize(np.asarray(x_query, dtype=np.float64))
        return _anova_kernel(z, x, weights, lengthscale) @ alpha + norm.y_mean

    n_arr, d_arr, _ = table.arrays()
    model = SurfaceModel(
        "kernel",
        predict_fn,
        (n_arr.min(), n_arr.max()),
        (d_arr.min(), d_arr.max()),
        {"lam": lam, "delta": delta, "irls_weights_final": w},
    )
    model.diagnostics["train_mse"] = float(((model.predict(n_arr, d_arr) - y) ** 2).mean())
    return model


def fit_mlp_surface(
    table: LossTable,
    width: int = 256,
    seed: int = 0,
    delta: float = DEFAULT_HUBER_DELTA,
    max_epochs: int = 5000,
    patience: int = 200,
    improve_tol: float = 1e-6,
    lr: float = 1e-3,
    lr_min: float = 1e-5,
    weight_decay: float = 1e-4,
) -> SurfaceModel:
    """3-layer GeLU MLP regression on normalized log inputs, Huber loss.

    Full-batch AdamW with cosine decay; keeps the best-loss checkpoint and
    stops early once the loss has not improved by ``improve_tol`` for
    ``patience`` consecutive epochs. Deterministic given the seed.
    """
    import torch

    if len(table) == 0:
        raise InvalidArgument("empty table")
    x_raw, y = _table_xy(table)
    norm = Normalization.fit(x_raw, y)
    xt = torch.tensor(norm.normalize(x_raw), dtype=torch.float64)
    yt = torch.tensor(y - norm.y_mean, dtype=torch.float64).unsqueeze(1)

    torch.manual_seed(seed)
    net = torch.nn.Sequential(
        torch.nn.Linear(2, width, dtype=torch.float64),
        torch.nn.GELU(),
        torch.nn.Linear(width, width, dtype=torch.float64),
        torch.nn.GELU(),
        torch.nn.Linear(width, 1, dtype=torch.float64),
    )
    opt = torch.optim.AdamW(net.parameters(), lr=lr, weight_decay=weight_decay)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, T_max=max_epochs,
                                                       eta_min=lr_min)
    loss_fn = torch.nn.HuberLoss(delta=delta)
    best_loss = float("inf")
    best_state = {k: v.clone() for k, v in net.state_dict().items()}
    stall = 0
    for _ in range(max_epochs):
        opt.zero_grad()
        loss = loss_fn(net(xt), yt)
        if not torch.isfinite(loss):
            raise FitFailure(f"MLP training diverged; last finite loss {best_loss:.6g}")
        loss.backward()
        opt.step()
        sched.step()
        cur = float(loss.detach())
        if cur < best_loss - improve_tol:
            stall = 0
        else:
            stall += 1
        if cur < best_loss:
            best_loss = cur
            best_state = {k: v.clone() for k, v in net.state_dict().items()}
        if stall > patience:
            break
    net.load_state_dict(best_state)
    net.eval()

    def predict_fn(x_query):
        z = norm.normalize(np.asarray(x_query, dtype=np.float64))
        with torch.no_grad():
            out = net(torch.tensor(z, dtype=torch.float64))
        return out.numpy().ravel() + norm.y_mean

    n_arr, d_arr, _ = table.arrays()
    model = SurfaceModel(
        "mlp",
        predict_fn,
        (n_arr.min(), n_arr.max()),
        (d_arr.min(), d_arr.max()),
        {"width": width, "seed": seed, "best_huber": best_loss},
    )
    model.diagnostics["train_mse"] = float(((model.predict(n_arr, d_arr) - y) ** 2).mean())
    return model


# --- cross-validated comparison ---------------------------------------------


@dataclass
class MethodMse:
    train_mse_mean: float
    val_mse_mean: float
    n_failures: int


@dataclass
class MseReport:
    methods: dict  # name -> MethodMse
    n_splits: int
    seed: int


def _eval_1d_slices(train: LossTable, val: LossTable) -> tuple[float, float]:
    """Per-N-slice power-law fits; MSE over points in covered slices."""
    fits = {}
    for s in train.slices_over_tokens(min_points=4):
        fits[s.held_value] = fit_power_law(s)
    if not fits:
        raise FitFailure("no N slice has enough training points")
    tr_err, va_err = [], []
    for tbl, errs in ((train, tr_err), (val, va_err)):
        n, d, y = tbl.arrays()
        for ni, di, yi in zip(n, d, y):
            if ni in fits:
                errs.append((fits[ni].predict(di) - yi) ** 2)
    return float(np.mean(tr_err)), float(np.mean(va_err)) if va_err else float("nan")


def compare_fits(
    table: LossTable,
    methods: list[str] = ("chinchilla2d", "kernel", "mlp", "1d"),
    n_splits: int = 20,
    seed: int = 0,
    val_fraction: float = 0.2,
    mlp_width: int = 256,
    kernel_lam: float = 1e-3,
    delta: float = DEFAULT_HUBER_DELTA,
) -> MseReport:
    """Mean train/val MSE per method over identical 80/20 split sequences."""
    if n_splits < 2:
        raise InvalidArgument("n_splits must be >= 2")
    rng = np.random.default_rng(seed)
    n = len(table)
    n_val = max(1, int(round(val_fraction * n)))
    splits = []
    for _ in range(n_splits):
        perm = rng.permutation(n)
        splits.append((perm[n_val:], perm[:n_val]))

    results = {}
    for name in methods:
        tr_list, va_list, failures = [], [], 0
        for i, (tr_idx, va_idx) in enumerate(splits):
            train, val = table.subset(tr_idx), table.subset(va_idx)
            nv, dv, yv = val.arrays()
            nt, dt, yt_ = train.arrays()
            try:
                if name == "chinchilla2d":
                    fit = fit_chinchilla_2d(train, delta=delta)
                    pred_t, pred_v = fit.predict(nt, dt), fit.predict(nv, dv)
                elif name == "kaplan2d":
                    fit = fit_kaplan_2d(train, delta=delta)
                    pred_t, pred_v = fit.predict(nt, dt), fit.predict(nv, dv)
                elif name == "kernel":
                    m = fit_kernel_surface(train, lam=kernel_lam, delta=delta)
                    pred_t, pred_v = m.predict(nt, dt), m.predict(nv, dv)
                elif name == "mlp":
                    m = fit_mlp_surface(train, width=mlp_width, seed=seed + i,
                                        delta=delta)
                    pred_t, pred_v = m.predict(nt, dt), m.predict(nv, dv)
                elif name == "1d":
                    tr_mse, va_mse = _eval_1d_slices(train, val)
                    tr_list.append(tr_mse)
                    va_list.append(va_mse)
                    continue
                else:
                    raise InvalidArgument(f"unknown method {name!r}")
            except (FitFailure, NumericFailure):
                failures += 1
                continue
            tr_list.append(float(((pred_t - yt_) ** 2).mean()))
            va_list.append(float(((pred_v - yv) ** 2).mean()))
        results[name] = MethodMse(
            train_mse_mean=float(np.mean(tr_list)) if tr_list else float("nan"),
            val_mse_mean=float(np.nanmean(va_list)) if va_list else float("nan"),
            n_failures=failures,
        )
    return MseReport(methods=results, n_splits=n_splits, seed=seed)
