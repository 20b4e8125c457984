"""Experiment command line: dataset generation, identification runs, sweeps.

Subcommands:
  generate   write ground-truth graphs as JSON files
  sample     draw filtered Gaussian signals from a graph into a CSV
  identify   run one identification on signals or a covariance file
  sweep      Monte-Carlo sweep over trials and sample sizes, CSV + summary
  report     aggregate a results CSV into plot-ready series and a summary

Exit codes: 0 success, 2 usage error, 1 runtime error. All outputs are pure
functions of (config, seed); the one exception is the wall_ms timing column
of sweep results.
"""

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import rng
from .cgl import CglProblem, estimate_cgl
from .filters import FILTER_KINDS, FilterSpec, apply_filter
from .graphs import GRAPH_KINDS, GraphModelSpec, WeightedGraph, build_cgl
from .identify import GsiOptions, baseline_ipf, identify
from .metrics import METHODS, alpha_sweep_detailed, f_score, relative_error, trace_normalize
from .signals import SignalBatch, sample_covariance, sample_signals

RESULTS_HEADER = "method,graph_kind,filter_kind,beta_true,beta_hat,n,k,trial_seed,alpha,re,fs,wall_ms"

DEFAULT_K_OVER_N = (0.5, 1, 2, 5, 10, 30)


class UsageError(Exception):
    pass


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return "" if x is None else str(x)


def write_signals_csv(path, batch: SignalBatch):
    with open(path, "w", newline="") as fh:
        for row in batch.data:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_matrix_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(v) for v in line.split(",")])
    return np.array(rows)


def graph_spec_from_dict(d, seed):
    return GraphModelSpec(
        kind=d["kind"],
        n=int(d["n"]),
        p=float(d.get("p", 0.2)),
        p1=float(d.get("p1", 0.1)),
        p2=float(d.get("p2", 0.2)),
        module_count=int(d.get("module_count", 4)),
        weight_low=float(d.get("weight_low", 0.1)),
        weight_high=float(d.get("weight_high", 3.0)),
        seed=seed,
    )


def cmd_generate(args):
    from .graphs import generate_graph

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model = {
        "kind": args.kind,
        "n": args.n,
        "p": args.p,
        "p1": args.p1,
        "p2": args.p2,
        "module_count": args.modules,
        "weight_low": args.weight_low,
        "weight_high": args.weight_high,
    }
    for t in range(args.trials):
        spec = graph_spec_from_dict(model, rng.derive_seed(args.seed, "graph", t))
        g = generate_graph(spec)
        path = out / f"graph_{t:03d}.json"
        with open(path, "w") as fh:
            json.dump(g.to_dict(), fh)
            fh.write("\n")
        print(path)
    return 0


def cmd_sample(args):
    if args.k < 1:
        raise UsageError("need k >= 1 samples")
    with open(args.graph) as fh:
        g = WeightedGraph.from_dict(json.load(fh))
    spec = FilterSpec(args.filter, args.beta)
    sigma = apply_filter(spec, build_cgl(g))
    batch = sample_signals(sigma, args.k, args.seed)
    write_signals_csv(args.out, batch)
    print(args.out)
    return 0


def _load_input_covariance(args):
    data = read_matrix_csv(args.input)
    if args.covariance:
        if data.shape[0] != data.shape[1]:
            raise UsageError("covariance input must be a square matrix CSV")
        return data, 0
    batch = SignalBatch(n=data.shape[1], k=data.shape[0], data=data)
    return sample_covariance(batch), batch.k


def cmd_identify(args):
    if args.filter is None:
        raise UsageError("--filter is required")
    S, k = _load_input_covariance(args)
    opts = GsiOptions(filter_kind=args.filter, beta_init=args.beta)
    L_star = None
    if args.truth:
        with open(args.truth) as fh:
            L_star = build_cgl(WeightedGraph.from_dict(json.load(fh)))

    if args.alpha == "grid":
        if L_star is None:
            raise UsageError("--alpha grid requires --truth for the RE-based selection")
        if k < 1:
            raise UsageError("--alpha grid needs a signal input (sample count sets the grid)")
        alpha, report, L_eval, beta_hat = alpha_sweep_detailed(
            S, k, L_star, opts, method=args.method, beta_true=args.beta
        )
        converged = True
        out = {
            "L_hat": [float(v) for v in L_eval.ravel()],
            "beta_hat": None if beta_hat is None else float(beta_hat),
            "converged": True,
            "iterations": 0,
            "scale_note": args.filter in ("frequency_scaling", "exponential_decay"),
        }
    else:
        alpha = float(args.alpha)
        opts.alpha = alpha
        if args.method == "gsi":
            res = identify(S, opts)
            L_raw, beta_hat, out = res.L_hat, res.beta_hat, res.to_dict()
        elif args.method == "cgl_noprefilter":
            L_raw, rep = estimate_cgl(CglProblem(S, alpha=alpha))
            beta_hat = None
            out = {
                "L_hat": [float(v) for v in L_raw.ravel()],
                "beta_hat": None,
                "converged": bool(rep.converged),
                "iterations": rep.iterations,
                "scale_note": False,
            }
        elif args.method == "ipf":
            if args.beta is None:
                raise UsageError("--method ipf requires --beta")
            L_raw = baseline_ipf(S, FilterSpec(args.filter, args.beta))
            beta_hat = args.beta
            out = {
                "L_hat": [float(v) for v in L_raw.ravel()],
                "beta_hat": float(args.beta),
                "converged": True,
                "iterations": 1,
                "scale_note": False,
            }
        else:
            raise UsageError(f"unknown method {args.method}")
        if L_star is not None:
            L_eval = trace_normalize(L_raw, L_star)
            out["metrics"] = _metrics_dict(L_eval, L_star, alpha)

    if args.alpha == "grid":
        out["metrics"] = {
            "re": report.re,
            "fs": report.fs,
            "tp": report.tp,
            "fp": report.fp,
            "fn": report.fn,
            "alpha": report.alpha_used,
        }
    with open(args.out, "w") as fh:
        json.dump(out, fh)
        fh.write("\n")
    print(args.out)
    return 0


def _metrics_dict(L_eval, L_star, alpha):
    fs, tp, fp, fn = f_score(L_eval, L_star)
    return {
        "re": relative_error(L_eval, L_star),
        "fs": fs,
        "tp": tp,
        "fp": fp,
        "fn": fn,
        "alpha": alpha,
    }


def _sweep_cell(payload):
    """One (trial, k) cell: generate, sample, run every method, emit rows."""
    cfg, root_seed, trial, k_over_n = payload
    from .graphs import generate_graph

    trial_seed = rng.derive_seed(root_seed, "trial", trial)
    gspec = graph_spec_from_dict(cfg["graph"], trial_seed)
    g = generate_graph(gspec)
    L_star = build_cgl(g)
    n = gspec.n
    fspec = FilterSpec(cfg["filter"]["kind"], cfg["filter"]["beta"])
    sigma = apply_filter(fspec, L_star)

    exact = bool(cfg.get("exact_covariance", False))
    if exact:
        S, k = sigma, 0
    else:
        k = int(round(k_over_n * n))
        batch = sample_signals(sigma, k, rng.derive_seed(root_seed, "signals", trial, k))
        S = sample_covariance(batch)

    normalize = bool(cfg.get("trace_normalize", True))
    alpha_mode = cfg.get("alpha_mode", "grid" if not exact else "fixed")
    fixed_alpha = float(cfg.get("alpha", 0.0))
    beta_range = tuple(cfg.get("beta_search_range", (1, 10)))

    rows = []
    for method in cfg.get("methods", list(METHODS)):
        t0 = time.perf_counter()
        opts = GsiOptions(filter_kind=fspec.kind, alpha=fixed_alpha, beta_search_range=beta_range)
        if alpha_mode == "grid":
            alpha, report, L_eval, beta_hat = alpha_sweep_detailed(
                S, k, L_star, opts, method=method, normalize=normalize, beta_true=fspec.beta
            )
            re_val, fs_val = report.re, report.fs
        else:
            from .metrics import run_method

            L_raw, beta_hat, _ = run_method(method, S, fixed_alpha, opts, beta_true=fspec.beta)
            L_eval = trace_normalize(L_raw, L_star) if normalize else L_raw
            alpha = fixed_alpha
            re_val = relative_error(L_eval, L_star)
            fs_val = f_score(L_eval, L_star)[0]
        wall_ms = int(round(1000 * (time.perf_counter() - t0)))
        rows.append(
            {
                "method": method,
                "graph_kind": gspec.kind,
                "filter_kind": fspec.kind,
                "beta_true": fspec.beta,
                "beta_hat": beta_hat,
                "n": n,
                "k": k,
                "trial_seed": trial_seed,
                "alpha": alpha,
                "re": re_val,
                "fs": fs_val,
                "wall_ms": wall_ms,
            }
        )
    return rows


def run_sweep(cfg, root_seed, out_dir, workers=1):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    k_ratios = [0] if cfg.get("exact_covariance", False) else list(cfg.get("k_over_n", DEFAULT_K_OVER_N))
    cells = [
        (cfg, root_seed, trial, kn) for trial in range(int(cfg["trials"])) for kn in k_ratios
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_cell = list(pool.map(_sweep_cell, cells))
    else:
        per_cell = [_sweep_cell(c) for c in cells]

    rows = [row for cell_rows in per_cell for row in cell_rows]
    results_path = out / "results.csv"
    with open(results_path, "w", newline="") as fh:
        fh.write(RESULTS_HEADER + "\n")
        for r in rows:
            fh.write(",".join(_fmt(r[col]) for col in RESULTS_HEADER.split(",")) + "\n")
    write_report(results_path, out)
    return results_path


def cmd_sweep(args):
    with open(args.config) as fh:
        cfg = json.load(fh)
    path = run_sweep(cfg, args.seed, args.out, workers=args.workers)
    print(path)
    return 0


def _aggregate(rows):
    """Group rows by (method, filter, beta_true, k) and average RE/FS."""
    groups = {}
    for r in rows:
        key = (r["method"], r["filter_kind"], r["beta_true"], r["n"], r["k"])
        groups.setdefault(key, []).append(r)
    table = []
    for key in sorted(groups, key=lambda t: tuple(str(x) for x in t)):
        rs = groups[key]
        res = np.array([float(r["re"]) for r in rs])
        fss = np.array([float(r["fs"]) for r in rs])
        method, fkind, beta_true, n, k = key
        table.append(
            {
                "method": method,
                "filter_kind": fkind,
                "beta_true": beta_true,
                "n": int(n),
                "k": int(k),
                "k_over_n": float(k) / float(n),
                "count": len(rs),
                "mean_re": res.mean(),
                "stderr_re": res.std(ddof=1) / np.sqrt(len(res)) if len(res) > 1 else 0.0,
                "mean_fs": fss.mean(),
                "stderr_fs": fss.std(ddof=1) / np.sqrt(len(fss)) if len(fss) > 1 else 0.0,
            }
        )
    return table


def write_report(results_path, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(results_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    table = _aggregate(rows)

    series_path = out / "series.csv"
    cols = [
        "method",
        "filter_kind",
        "beta_true",
        "n",
        "k",
        "k_over_n",
        "count",
        "mean_re",
        "stderr_re",
        "mean_fs",
        "stderr_fs",
    ]
    with open(series_path, "w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for row in table:
            fh.write(",".join(_fmt(row[c]) for c in cols) + "\n")

    lines = ["mean RE / FS by method and sample ratio", ""]
    ks = sorted({row["k_over_n"] for row in table})
    methods = sorted({row["method"] for row in table})
    lines.append("k/n      " + "  ".join(f"{m:>24s}" for m in methods))
    for kn in ks:
        cells = []
        for m in methods:
            match = [r for r in table if r["method"] == m and r["k_over_n"] == kn]
            if match:
                cells.append(f"RE={match[0]['mean_re']:.4f} FS={match[0]['mean_fs']:.4f}")
            else:
                cells.append("-")
        lines.append(f"{kn:<8g} " + "  ".join(f"{c:>24s}" for c in cells))
    summary_path = out / "summary.txt"
    summary_path.write_text("\n".join(lines) + "\n")
    return series_path, summary_path


def cmd_report(args):
    series, summary = write_report(args.results, args.out)
    print(series)
    print(summary)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="graphsysid", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write ground-truth graphs as JSON")
    g.add_argument("--kind", choices=GRAPH_KINDS, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--trials", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--p", type=float, default=0.2)
    g.add_argument("--p1", type=float, default=0.1)
    g.add_argument("--p2", type=float, default=0.2)
    g.add_argument("--modules", type=int, default=4)
    g.add_argument("--weight-low", type=float, default=0.1)
    g.add_argument("--weight-high", type=float, default=3.0)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("sample", help="draw filtered Gaussian signals into a CSV")
    s.add_argument("--graph", required=True)
    s.add_argument("--filter", choices=FILTER_KINDS, required=True)
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    i = sub.add_parser("identify", help="identify a graph system from signals or a covariance")
    i.add_argument("--input", required=True, help="signals CSV (default) or covariance CSV")
    i.add_argument("--covariance", action="store_true", help="treat input as a dense covariance")
    i.add_argument("--filter", choices=FILTER_KINDS)
    i.add_argument("--beta", type=float, default=None, help="filter parameter override/init")
    i.add_argument("--alpha", default="0.0", help="l1 weight, or 'grid' for the RE-best sweep")
    i.add_argument("--method", choices=METHODS, default="gsi")
    i.add_argument("--truth", help="ground-truth graph JSON (enables metrics)")
    i.add_argument("--out", required=True)
    i.set_defaults(func=cmd_identify)

    w = sub.add_parser("sweep", help="Monte-Carlo sweep from a JSON config")
    w.add_argument("--config", required=True)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--out", required=True)
    w.add_argument("--workers", type=int, default=1)
    w.set_defaults(func=cmd_sweep)

    r = sub.add_parser("report", help="aggregate a results CSV")
    r.add_argument("--results", required=True)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures keep a distinct exit code
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
