"""Estimation metrics, trace normalization and the regularization grid."""

from dataclasses import dataclass

import numpy as np

from .cgl import CglProblem, estimate_cgl, weights_from_laplacian
from .filters import FilterSpec
from .identify import GsiOptions, baseline_ipf, identify

DEFAULT_EDGE_EPS = 1e-4

ALPHA_GRID_DECAY = 0.75
ALPHA_GRID_POINTS = 14

METHODS = ("gsi", "cgl_noprefilter", "ipf")


@dataclass
class MetricReport:
    re: float
    fs: float
    tp: int
    fp: int
    fn: int
    alpha_used: float


def relative_error(L_hat, L_star) -> float:
    """Frobenius error of the estimate relative to the ground truth."""
    L_hat = np.asarray(L_hat, dtype=float)
    L_star = np.asarray(L_star, dtype=float)
    if L_hat.shape != L_star.shape:
        raise ValueError("shape mismatch")
    denom = np.linalg.norm(L_star)
    if denom == 0:
        raise ValueError("ground truth is the zero matrix")
    return float(np.linalg.norm(L_hat - L_star) / denom)


def _detected_edges(L, edge_eps):
    n = L.shape[0]
    iu = np.triu_indices(n, k=1)
    return -np.asarray(L, dtype=float)[iu] > edge_eps


def f_score(L_hat, L_star, edge_eps: float = DEFAULT_EDGE_EPS):
    """Edge-detection F-score 2tp / (2tp + fn + fp) plus the raw counts.

    An edge is detected at (i, j) when -L_ij exceeds edge_eps. Two empty
    edge sets count as a perfect match.
    """
    if edge_eps <= 0:
        raise ValueError("edge_eps must be positive")
    got = _detected_edges(L_hat, edge_eps)
    want = _detected_edges(L_star, edge_eps)
    tp = int(np.sum(got & want))
    fp = int(np.sum(got & ~want))
    fn = int(np.sum(~got & want))
    fs = 1.0 if (tp + fp + fn) == 0 else 2.0 * tp / (2.0 * tp + fn + fp)
    return fs, tp, fp, fn


def trace_normalize(L_hat, L_star) -> np.ndarray:
    """Rescale the estimate to the ground truth's trace.

    Removes the scale ambiguity of the frequency-scaling and
    exponential-decay systems before the relative error is computed.
    """
    tr_hat = float(np.trace(L_hat))
    if tr_hat <= 0:
        raise ValueError("estimate has nonpositive trace; cannot normalize")
    return (float(np.trace(L_star)) / tr_hat) * np.asarray(L_hat, dtype=float)


def alpha_grid(S, n: int, k: int):
    """Regularization grid {0} plus 14 geometrically decaying points.

    The nonzero points are 0.75^r * s_max * sqrt(log(n)/k) for r = 1..14,
    with s_max the largest off-diagonal magnitude of S and a natural log.
    """
    if k < 1 or n < 2:
        raise ValueError("need k >= 1 and n >= 2")
    S = np.asarray(S, dtype=float)
    off = np.abs(S - np.diag(np.diag(S)))
    s_max = float(off.max())
    base = s_max * np.sqrt(np.log(n) / k)
    return [0.0] + [ALPHA_GRID_DECAY**r * base for r in range(1, ALPHA_GRID_POINTS + 1)]


def run_method(method, S, alpha, opts: GsiOptions, beta_true=None):
    """One estimate of the given method at a fixed regularization weight.

    Returns (L_raw, beta_hat, warm_state) where warm_state carries the
    solver warm start (and selected hop count) to the next grid point.
    """
    if method == "gsi":
        res = identify(S, opts)
        return res.L_hat, res.beta_hat, weights_from_laplacian(res.L_hat)
    if method == "cgl_noprefilter":
        L, _ = estimate_cgl(
            CglProblem(S, alpha=alpha),
            tol=opts.solver_tol,
            max_iter=opts.solver_max_iter,
            w_init=opts.w_init,
        )
        return L, None, weights_from_laplacian(L)
    if method == "ipf":
        if beta_true is None:
            raise ValueError("ipf baseline needs the filter parameter")
        L = baseline_ipf(S, FilterSpec(opts.filter_kind, beta_true), opts.eps_zero)
        return L, beta_true, None
    raise ValueError(f"unknown method {method!r}")


def alpha_sweep_detailed(
    S,
    k: int,
    L_star,
    opts: GsiOptions,
    method: str = "gsi",
    edge_eps: float = DEFAULT_EDGE_EPS,
    normalize: bool = True,
    beta_true=None,
):
    """Full grid sweep: returns (alpha, MetricReport, L_best, beta_hat).

    Runs the method at every grid weight, trace-normalizes, and keeps the
    weight minimizing RE (first grid entry wins ties); the F-score is
    computed from that same estimate, per the experimental protocol. Solver
    warm starts and the selected hop count are chained through the grid in
    ascending-alpha order, which does not affect which alpha is selected.
    """
    grid = [0.0] if method == "ipf" else alpha_grid(S, S.shape[0], k)
    order = sorted(range(len(grid)), key=lambda i: grid[i])
    results = {}
    chain_opts = opts
    warm = opts.w_init
    beta_known = opts.beta_init
    for idx in order:
        a = grid[idx]
        chain_opts = GsiOptions(
            filter_kind=opts.filter_kind,
            alpha=a,
            beta_init=beta_known,
            beta_search_range=opts.beta_search_range,
            max_outer_iters=opts.max_outer_iters,
            tol_rel_change=opts.tol_rel_change,
            eps_zero=opts.eps_zero,
            solver_tol=opts.solver_tol,
            solver_max_iter=opts.solver_max_iter,
            hop_nll_margin=opts.hop_nll_margin,
            hop_scan_max_iter=opts.hop_scan_max_iter,
            w_init=warm,
        )
        L_raw, beta_hat, warm = run_method(method, S, a, chain_opts, beta_true=beta_true)
        if method == "gsi" and opts.filter_kind == "hop_localized":
            beta_known = beta_hat  # scan once, reuse along the grid
        L_eval = trace_normalize(L_raw, L_star) if normalize else L_raw
        results[idx] = (relative_error(L_eval, L_star), L_eval, beta_hat)
    best_idx = min(range(len(grid)), key=lambda i: (results[i][0], i))
    re_best, L_best, beta_best = results[best_idx]
    fs, tp, fp, fn = f_score(L_best, L_star, edge_eps)
    report = MetricReport(re=re_best, fs=fs, tp=tp, fp=fp, fn=fn, alpha_used=grid[best_idx])
    return grid[best_idx], report, L_best, beta_best


def best_alpha_sweep(S, k, L_star, opts: GsiOptions, method="gsi", edge_eps=DEFAULT_EDGE_EPS):
    """Grid search for the RE-minimizing regularization; see alpha_sweep_detailed."""
    alpha, report, _, _ = alpha_sweep_detailed(S, k, L_star, opts, method=method, edge_eps=edge_eps)
    return alpha, report
