"""Command-line orchestration for the full pipeline.

Subcommands: gen-graph, gen-walks, diagnostics, baseline, ingest, fit-1d,
fit-2d, frontier, compare-fits, report.

Exit codes: 0 success, 2 partial fit failure, 3 invalid input.
All randomness is driven by explicit seeds; without a seed the tools refuse
to run rather than fall back to wall-clock seeding.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import baselines, frontier, graphs, powerlaw, surface, walks
from .errors import FitFailure, InvalidArgument, NumericFailure, WalklabError

EXIT_OK = 0
EXIT_PARTIAL = 2
EXIT_INVALID = 3


@dataclasses.dataclass
class FitSettings:
    """Every fitting constant, surfaced with its default."""

    huber_delta_2d: float = 1e-3
    n_starts: int = 40
    n_boot: int = 4000
    n_boot_frontier: int = 200
    beta_min: float = 1e-3
    beta_max: float = 10.0
    grid_points: int = 100
    clip_lo: float = 0.1
    clip_hi: float = 0.1
    mlp_width: int = 256
    mlp_epochs: int = 5000
    kernel_lam: float = 1e-3
    drop_outliers: int = 0
    n_splits: int = 20


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise InvalidArgument(f"config file not found: {p}")
    with open(p, "rb") as f:
        return tomllib.load(f)


def settings_from(cfg: dict, args: argparse.Namespace) -> FitSettings:
    s = FitSettings(**{k: v for k, v in cfg.get("fit", {}).items()
                       if k in {f.name for f in dataclasses.fields(FitSettings)}})
    for f in dataclasses.fields(FitSettings):
        flag = f.name
        if hasattr(args, flag) and getattr(args, flag) is not None:
            setattr(s, flag, getattr(args, flag))
    return s


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(out_dir: Path, params: dict, files: list[Path]) -> Path:
    manifest = {
        "params": params,
        "files": {p.name: _sha256(p) for p in files},
    }
    path = out_dir / "manifest.json"
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _require_out_dir(path_str: str) -> Path:
    out = Path(path_str)
    if not out.parent.exists():
        raise InvalidArgument(f"output directory does not exist: {out.parent}")
    out.mkdir(exist_ok=True)
    return out


# --- subcommands ------------------------------------------------------------


def cmd_gen_graph(args) -> int:
    out = _require_out_dir(args.out)
    if args.family == "er":
        if args.edges is None:
            raise InvalidArgument("--edges required for the ER family")
        g = graphs.gen_erdos_renyi(args.nodes, args.edges, args.seed)
    elif args.family == "ba":
        if args.m_attach is None:
            raise InvalidArgument("--m-attach required for the BA family")
        g = graphs.gen_barabasi_albert(args.nodes, args.m_attach, args.seed)
    else:
        raise InvalidArgument(f"unknown family {args.family!r}")
    wg = graphs.assign_weights(g, args.kappa, args.k_min, args.k_max,
                               seed=args.seed + 1)
    model = graphs.build_transition_model(wg)
    graph_path = out / "graph.txt"
    model_path = out / "model.sltm"
    graphs.write_graph(graph_path, g, wg if args.kappa > 0 else None)
    graphs.write_transition_model(model_path, model)
    write_manifest(
        out,
        {
            "family": args.family,
            "nodes": args.nodes,
            "edges": g.n_edges,
            "kappa": args.kappa,
            "k_min": args.k_min,
            "k_max": args.k_max,
            "seed": args.seed,
        },
        [graph_path, model_path],
    )
    print(f"wrote {graph_path} and {model_path}")
    return EXIT_OK


def cmd_gen_walks(args) -> int:
    out = _require_out_dir(args.out)
    model = graphs.read_transition_model(args.model)
    ds = walks.sample_walks(model, args.seq_len, args.n_seqs, args.seed)
    walk_path = out / "walks.slwk"
    walks.write_walks(walk_path, ds)
    write_manifest(
        out,
        {
            "model": str(args.model),
            "seq_len": args.seq_len,
            "n_seqs": args.n_seqs,
            "total_tokens": ds.total_tokens,
            "seed": args.seed,
        },
        [walk_path],
    )
    print(f"wrote {walk_path} ({ds.total_tokens} tokens)")
    return EXIT_OK


def cmd_diagnostics(args) -> int:
    model = graphs.read_transition_model(args.model)
    diag = walks.diagnostics(model)
    payload = {
        "spectral_gap": diag.spectral_gap,
        "entropy_rate_nats": diag.entropy_rate,
        "stationary_entropy_nats": diag.stationary_entropy,
    }
    if args.ranked_csv:
        walks.write_ranked_csv(args.ranked_csv, walks.ranked_distributions(model))
        payload["ranked_csv"] = str(args.ranked_csv)
    json.dump(payload, sys.stdout, indent=2)
    print()
    return EXIT_OK


def cmd_baseline(args) -> int:
    model = graphs.read_transition_model(args.model)
    d_values = [int(float(v)) for v in args.d_values.split(",")]
    rows = []
    for d in d_values:
        analytic = baselines.walk_baseline_cse(model, d)
        if args.mc_trials:
            est = baselines.mc_walk_counting_loss(model, d, args.mc_trials, args.seed)
            rows.append((d, analytic, est.mean, est.stderr))
        else:
            rows.append((d, analytic, "", ""))
    print("D,analytic,mc_mean,mc_stderr")
    for row in rows:
        print(",".join(str(v) for v in row))
    return EXIT_OK


def _load_table(args, settings: FitSettings) -> surface.LossTable:
    table, notes = surface.read_loss_table(args.csv, axis=args.axis)
    for note in notes:
        print(f"warning: {note}", file=sys.stderr)
    table = table.minimized()
    if settings.drop_outliers:
        table = table.drop_largest_losses(settings.drop_outliers)
    return table


def cmd_ingest(args) -> int:
    settings = settings_from(load_config(args.config), args)
    table = _load_table(args, settings)
    if args.out:
        surface.write_loss_table(args.out, table)
    print(f"{len(table)} rows after minimization"
          + (f" and dropping {settings.drop_outliers} outliers"
             if settings.drop_outliers else ""))
    return EXIT_OK


def cmd_fit_1d(args) -> int:
    settings = settings_from(load_config(args.config), args)
    table = _load_table(args, settings)
    k = args.min_slice_points
    slices = (table.slices_over_tokens(min_points=k) if args.slice_axis == "D"
              else table.slices_over_params(min_points=k))
    if not slices:
        raise InvalidArgument("no slice has enough points for a 3-parameter fit")
    reports, failures = [], 0
    beta_bounds = (settings.beta_min, settings.beta_max)
    for s in slices:
        entry = {"held_fixed": s.held_fixed, "held_value": s.held_value,
                 "n_points": len(s)}
        try:
            fit = powerlaw.fit_power_law(s, beta_bounds=beta_bounds,
                                         fix_E_zero=args.fix_e_zero)
            exp_fit = powerlaw.fit_exponential(s)
            entry.update(
                params=fit.params(),
                mse=fit.mse,
                exp_baseline_mse=exp_fit.mse,
                mse_ratio=powerlaw.mse_ratio(fit, exp_fit),
                status="ok",
            )
            if settings.n_boot:
                ci = powerlaw.bca_ci(s, fit, n_boot=settings.n_boot,
                                     seed=args.seed, beta_bounds=beta_bounds)
                entry["ci"] = {"lo": ci.lo, "hi": ci.hi, "stderr": ci.stderr,
                               "n_failed": ci.n_failed}
            reports.append((entry, fit))
        except (FitFailure, NumericFailure) as exc:
            entry.update(status="failed", error=str(exc))
            reports.append((entry, None))
            failures += 1
    fits = [f for _, f in reports if f is not None]
    summary = powerlaw.summarize_exponents(
        fits, axis=args.slice_axis) if fits else None
    payload = {
        "slices": [e for e, _ in reports],
        "summary": None if summary is None else dataclasses.asdict(summary),
        "settings": dataclasses.asdict(settings),
    }
    _dump_json(payload, args.out)
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_fit_2d(args) -> int:
    settings = settings_from(load_config(args.config), args)
    table = _load_table(args, settings)
    payload = {"method": args.method, "settings": dataclasses.asdict(settings)}
    try:
        if args.method == "chinchilla":
            fit = surface.fit_chinchilla_2d(table, delta=settings.huber_delta_2d)
            payload["params"] = {"A": fit.A, "B": fit.B, "E": fit.E,
                                 "alpha": fit.alpha, "beta": fit.beta}
            payload["train_mse"] = fit.train_mse
        elif args.method == "kaplan":
            fit = surface.fit_kaplan_2d(table, delta=settings.huber_delta_2d)
            payload["params"] = {"N_c": fit.N_c, "D_c": fit.D_c,
                                 "alpha": fit.alpha, "beta": fit.beta}
            payload["train_mse"] = fit.train_mse
        elif args.method == "kernel":
            m = surface.fit_kernel_surface(table, lam=settings.kernel_lam,
                                           delta=settings.huber_delta_2d)
            payload["train_mse"] = m.diagnostics["train_mse"]
        elif args.method == "mlp":
            m = surface.fit_mlp_surface(table, width=settings.mlp_width,
                                        seed=args.seed,
                                        delta=settings.huber_delta_2d,
                                        max_epochs=settings.mlp_epochs)
            payload["train_mse"] = m.diagnostics["train_mse"]
        else:
            raise InvalidArgument(f"unknown method {args.method!r}")
    except (FitFailure, NumericFailure) as exc:
        payload["status"] = "failed"
        payload["error"] = str(exc)
        _dump_json(payload, args.out)
        return EXIT_PARTIAL
    payload["status"] = "ok"
    _dump_json(payload, args.out)
    return EXIT_OK


def _build_surface(table, method: str, settings: FitSettings, seed: int):
    if method == "mlp":
        return surface.fit_mlp_surface(table, width=settings.mlp_width, seed=seed,
                                       delta=settings.huber_delta_2d,
                                       max_epochs=settings.mlp_epochs)
    if method == "kernel":
        return surface.fit_kernel_surface(table, lam=settings.kernel_lam,
                                          delta=settings.huber_delta_2d)
    if method == "chinchilla":
        fit = surface.fit_chinchilla_2d(table, delta=settings.huber_delta_2d)
        n, d, _ = table.arrays()
        return surface.surface_from_parametric(fit, (n.min(), n.max()),
                                               (d.min(), d.max()))
    raise InvalidArgument(f"unknown surface method {method!r}")


def cmd_frontier(args) -> int:
    settings = settings_from(load_config(args.config), args)
    table = _load_table(args, settings)
    surf = _build_surface(table, args.method, settings, args.seed)
    samples = frontier.sample_frontier(surf, grid_points=settings.grid_points,
                                       clip=(settings.clip_lo, settings.clip_hi))
    try:
        result = frontier.fit_frontier(samples, n_boot=settings.n_boot_frontier,
                                       seed=args.seed)
    except FitFailure as exc:
        print(f"frontier fit failed: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    if args.samples_csv:
        frontier.write_frontier_csv(args.samples_csv, samples)
    payload = {
        "gamma": result.gamma, "K": result.K, "E_C": result.E_C,
        "a": result.a, "N0": result.N0, "b": result.b, "D0": result.D0,
        "a_plus_b": result.a_plus_b,
        "method": args.method,
        "settings": dataclasses.asdict(settings),
    }
    if result.l_opt_ci is not None:
        payload["l_opt_ci"] = {"lo": result.l_opt_ci.lo, "hi": result.l_opt_ci.hi}
    _dump_json(payload, args.out)
    return EXIT_OK


def cmd_compare_fits(args) -> int:
    settings = settings_from(load_config(args.config), args)
    table = _load_table(args, settings)
    report = surface.compare_fits(
        table,
        methods=args.methods.split(","),
        n_splits=settings.n_splits,
        seed=args.seed,
        mlp_width=settings.mlp_width,
        kernel_lam=settings.kernel_lam,
        delta=settings.huber_delta_2d,
    )
    payload = {
        name: dataclasses.asdict(m) for name, m in report.methods.items()
    }
    payload["n_splits"] = report.n_splits
    _dump_json(payload, args.out)
    any_failed = any(m.n_failures for m in report.methods.values())
    return EXIT_PARTIAL if any_failed else EXIT_OK


def cmd_report(args) -> int:
    """Full reanalysis: 2d parameters, per-slice 1d exponents, frontier."""
    settings = settings_from(load_config(args.config), args)
    table = _load_table(args, settings)
    out_dir = _require_out_dir(args.out)
    status = EXIT_OK
    payload: dict = {"settings": dataclasses.asdict(settings)}

    fit2d = surface.fit_chinchilla_2d(table, delta=settings.huber_delta_2d)
    payload["chinchilla_2d"] = {"A": fit2d.A, "B": fit2d.B, "E": fit2d.E,
                                "alpha": fit2d.alpha, "beta": fit2d.beta,
                                "train_mse": fit2d.train_mse}
    gamma, a, b = frontier.closed_form_frontier(fit2d)
    payload["closed_form_frontier"] = {"gamma": gamma, "a": a, "b": b}

    betas = []
    slice_rows = []
    for s in table.slices_over_tokens():
        try:
            fit = powerlaw.fit_power_law(
                s, beta_bounds=(settings.beta_min, settings.beta_max))
            betas.append(fit.beta)
            slice_rows.append({"N": s.held_value, **fit.params(), "mse": fit.mse})
        except FitFailure as exc:
            slice_rows.append({"N": s.held_value, "error": str(exc)})
            status = EXIT_PARTIAL
    payload["slices_L_of_D"] = slice_rows
    if betas:
        arr = np.array(betas)
        payload["beta_N"] = {"mean": float(arr.mean()),
                             "std": float(arr.std(ddof=0)), "n": len(arr)}

    surf = _build_surface(table, args.method, settings, args.seed)
    samples = frontier.sample_frontier(surf, grid_points=settings.grid_points,
                                       clip=(settings.clip_lo, settings.clip_hi))
    frontier.write_frontier_csv(out_dir / "frontier_samples.csv", samples)
    try:
        result = frontier.fit_frontier(samples, n_boot=settings.n_boot_frontier,
                                       seed=args.seed)
        payload["frontier"] = {"gamma": result.gamma, "a": result.a,
                               "b": result.b, "a_plus_b": result.a_plus_b}
    except FitFailure as exc:
        payload["frontier"] = {"error": str(exc)}
        status = EXIT_PARTIAL

    # Fig-1-style panel data.
    for tag, slices in (("L_of_D", table.slices_over_tokens()),
                        ("L_of_N", table.slices_over_params())):
        with open(out_dir / f"panel_{tag}.csv", "w") as f:
            f.write("held_value,x,loss\n")
            for s in slices:
                for x, y in zip(s.xs, s.ys):
                    f.write(f"{s.held_value:.9g},{x:.9g},{y:.9g}\n")

    with open(out_dir / "report.json", "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"wrote {out_dir}/report.json")
    return status


def _dump_json(payload: dict, out: str | None) -> None:
    if out:
        with open(out, "w") as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write("\n")
    else:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        print()


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="walklab")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", default=None, help="TOML config file")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("gen-graph", help="generate a graph and transition model")
    p.add_argument("--family", choices=["er", "ba"], required=True)
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--edges", type=int, default=None)
    p.add_argument("--m-attach", type=int, default=None)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen_graph)

    p = sub.add_parser("gen-walks", help="sample a walk dataset from a model")
    p.add_argument("--model", required=True)
    p.add_argument("--seq-len", type=int, required=True)
    p.add_argument("--n-seqs", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen_walks)

    p = sub.add_parser("diagnostics", help="spectral gap and entropies of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--ranked-csv", default=None)
    p.set_defaults(fn=cmd_diagnostics)

    p = sub.add_parser("baseline", help="counting-model baseline sweep")
    p.add_argument("--model", required=True)
    p.add_argument("--d-values", required=True, help="comma-separated token counts")
    p.add_argument("--mc-trials", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_baseline)

    def add_table_args(p):
        p.add_argument("--csv", required=True)
        p.add_argument("--axis", choices=["total", "nonembed"], default="total")
        p.add_argument("--drop-outliers", dest="drop_outliers", type=int,
                       default=None)
        add_common(p)

    p = sub.add_parser("ingest", help="normalize a loss table")
    add_table_args(p)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("fit-1d", help="per-slice power-law fits")
    add_table_args(p)
    p.add_argument("--slice-axis", choices=["D", "N"], default="D")
    p.add_argument("--min-slice-points", dest="min_slice_points", type=int,
                   default=4)
    p.add_argument("--fix-e-zero", action="store_true")
    p.add_argument("--n-boot", dest="n_boot", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_fit_1d)

    p = sub.add_parser("fit-2d", help="two-dimensional surface fit")
    add_table_args(p)
    p.add_argument("--method", choices=["chinchilla", "kaplan", "kernel", "mlp"],
                   default="chinchilla")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_fit_2d)

    p = sub.add_parser("frontier", help="compute-optimal frontier extraction")
    add_table_args(p)
    p.add_argument("--method", choices=["chinchilla", "kernel", "mlp"],
                   default="mlp")
    p.add_argument("--grid-points", dest="grid_points", type=int, default=None)
    p.add_argument("--samples-csv", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_frontier)

    p = sub.add_parser("compare-fits", help="cross-validated method comparison")
    add_table_args(p)
    p.add_argument("--methods", default="chinchilla2d,kernel,mlp,1d")
    p.add_argument("--n-splits", dest="n_splits", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_compare_fits)

    p = sub.add_parser("report", help="full reanalysis report")
    add_table_args(p)
    p.add_argument("--method", choices=["chinchilla", "kernel", "mlp"],
                   default="mlp")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (InvalidArgument, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except WalklabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
