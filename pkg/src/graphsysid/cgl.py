"""Regularized maximum-likelihood estimation of combinatorial graph Laplacians.

Solves  minimize  Tr(L K) - log|L| + ||L (.) H||_1  over CGL matrices, where
|L| is the pseudo-determinant. Because CGLs have zero row sums and
nonpositive off-diagonals, the weighted l1 term folds into the trace:
||L (.) H||_1 = Tr(L A) with A_ii = |H_ii| and A_ij = -|H_ij|, so the solver
works on K_reg = K + A. The pseudo-determinant of a connected CGL equals
det(L + J) with J = (1/n) ones, which keeps the objective smooth.

The production solver is an exact coordinate descent over edge weights: for
edge e with incidence vector b_e, the one-dimensional problem in the weight
w_e has the closed-form minimizer w_e + 1/c_e - 1/(b_e^T Theta^{-1} b_e)
clipped at zero, and Theta^{-1} is maintained by Sherman-Morrison updates.
Feasibility (zero row sums, nonpositive off-diagonals) holds by construction
since only the weights are free and the diagonal is derived from them.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

DISCONNECT_TOL = 1e-9

_INIT_FLOOR = 1e-3


@dataclass
class CglProblem:
    """Input matrix K (a prefiltered or raw covariance) plus regularization.

    H defaults to alpha * (2 I - ones), which reduces the weighted l1 term to
    the plain alpha * ||L||_1.
    """

    K: np.ndarray
    alpha: float = 0.0
    H: np.ndarray = None

    def __post_init__(self):
        self.K = np.asarray(self.K, dtype=float)
        n = self.K.shape[0]
        if self.K.shape != (n, n):
            raise ValueError("K must be square")
        if np.abs(self.K - self.K.T).max() > 1e-9 * max(1.0, np.abs(self.K).max()):
            raise ValueError("K must be symmetric")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.H is None:
            self.H = self.alpha * (2.0 * np.eye(n) - np.ones((n, n)))
        else:
            self.H = np.asarray(self.H, dtype=float)
            if self.H.shape != (n, n) or np.abs(self.H - self.H.T).max() > 1e-12 * max(
                1.0, np.abs(self.H).max()
            ):
                raise ValueError("H must be a symmetric n x n matrix")

    @property
    def n(self):
        return self.K.shape[0]

    def regularized_input(self):
        """K + A with the l1 weights folded in under the CGL sign pattern."""
        A = -np.abs(self.H)
        np.fill_diagonal(A, np.abs(np.diag(self.H)))
        return self.K + A


@dataclass
class SolverReport:
    objective_trace: list = field(default_factory=list)
    iterations: int = 0
    kkt_residual: float = np.inf
    converged: bool = False


def edge_index_arrays(n):
    """Lexicographic (i, j) index arrays over all vertex pairs."""
    iu = np.triu_indices(n, k=1)
    return iu[0], iu[1]


def laplacian_from_weights(n, w):
    """Dense CGL from a weight vector over lexicographic pairs."""
    I, J = edge_index_arrays(n)
    A = np.zeros((n, n))
    A[I, J] = w
    A[J, I] = w
    return np.diag(A.sum(axis=1)) - A


def weights_from_laplacian(L):
    """Nonnegative edge weights -L_ij over lexicographic pairs."""
    I, J = edge_index_arrays(L.shape[0])
    return np.maximum(0.0, -np.asarray(L, dtype=float)[I, J])


def log_pseudo_det(L):
    """log of the product of nonzero eigenvalues via det(L + (1/n) ones).

    Only valid when the zero eigenvalue is simple (connected estimate);
    raises otherwise since the determinant identity silently breaks there.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    ev = np.linalg.eigvalsh(L)
    lam_max = ev[-1]
    if n > 1 and ev[1] <= DISCONNECT_TOL * max(lam_max, 1e-300):
        raise ValueError(
            "Laplacian has a repeated zero eigenvalue (disconnected estimate); "
            "its pseudo-determinant of rank n-1 is undefined"
        )
    sign, logdet = np.linalg.slogdet(L + np.ones((n, n)) / n)
    if sign <= 0:
        raise ValueError("L + (1/n) ones is not positive definite")
    return logdet


def objective(L, prob: CglProblem) -> float:
    """Tr(L K) - log|L| + ||L (.) H||_1 at a connected CGL iterate."""
    L = np.asarray(L, dtype=float)
    return float(np.sum(L * prob.K) - log_pseudo_det(L) + np.abs(L * prob.H).sum())


def _edge_costs(K_reg, I, J):
    return K_reg[I, I] + K_reg[J, J] - 2.0 * K_reg[I, J]


def _check_problem(prob, c):
    if np.any(np.diag(prob.K) <= 0):
        raise ValueError("K has a nonpositive diagonal entry; no finite minimizer (degenerate input)")
    if np.any(c <= 0):
        raise ValueError(
            "regularized input has a vertex-pair cost <= 0; the objective is unbounded below "
            "(K is too degenerate for this alpha)"
        )


def _default_init(K_reg, n, I, J):
    # warm start near inv(K_reg + J), which is exact for noiseless inputs,
    # plus a uniform floor that keeps the starting graph connected
    H0 = np.linalg.pinv(K_reg + np.ones((n, n)) / n, hermitian=True)
    w = np.maximum(0.0, -H0[I, J])
    return w + _INIT_FLOOR * n / np.trace(K_reg)


def _kkt_residual(w, grad):
    active = w > 1e-10
    res = 0.0
    if active.any():
        res = float(np.abs(grad[active]).max())
    if (~active).any():
        res = max(res, float(np.maximum(0.0, -grad[~active]).max()))
    return res


def estimate_cgl(prob: CglProblem, tol: float = 1e-6, max_iter: int = 10000, w_init=None):
    """Coordinate-descent solution of the CGL estimation problem.

    Returns (L, SolverReport). The KKT residual is the largest violation of
    the stationarity conditions in the edge-weight gradient
    g_e = b_e^T (K_reg - Theta^{-1}) b_e: |g_e| on active edges and
    max(0, -g_e) on zero edges.
    """
    n = prob.n
    I, J = edge_index_arrays(n)
    K_reg = prob.regularized_input()
    c = _edge_costs(K_reg, I, J)
    _check_problem(prob, c)

    w = _default_init(K_reg, n, I, J) if w_init is None else np.maximum(0.0, np.asarray(w_init, float).copy())
    Jmat = np.ones((n, n)) / n
    Q = np.linalg.inv(laplacian_from_weights(n, w) + Jmat)
    Q = 0.5 * (Q + Q.T)

    report = SolverReport()
    m = len(c)
    best_kkt = np.inf
    stalled = 0
    for sweep in range(max_iter):
        for e in range(m):
            i, j = I[e], J[e]
            qi = Q[i]
            qj = Q[j]
            r = qi[i] + qj[j] - 2.0 * qi[j]
            new_w = max(0.0, w[e] + 1.0 / c[e] - 1.0 / r)
            delta = new_w - w[e]
            if delta != 0.0:
                q = qi - qj
                Q -= (delta / (1.0 + delta * r)) * np.outer(q, q)
                w[e] = new_w
        # fresh inverse once per sweep kills Sherman-Morrison drift and gives
        # an exact gradient for the stopping test
        Theta = laplacian_from_weights(n, w) + Jmat
        Q = np.linalg.inv(Theta)
        Q = 0.5 * (Q + Q.T)
        sign, logdet = np.linalg.slogdet(Theta)
        f_new = float(w @ c - logdet)
        d = np.diag(Q)
        grad = c - (d[I] + d[J] - 2.0 * Q[I, J])
        report.kkt_residual = _kkt_residual(w, grad)
        report.iterations = sweep + 1
        if report.objective_trace and f_new >= report.objective_trace[-1]:
            # objective at the noise floor of this arithmetic; keep sweeping
            # only while the stationarity residual still improves (on badly
            # scaled problems the absolute KKT target may stay out of reach)
            stalled += 1
            if report.kkt_residual >= best_kkt or stalled >= 50:
                report.converged = report.kkt_residual <= tol
                break
        else:
            stalled = 0
            report.objective_trace.append(f_new)
        best_kkt = min(best_kkt, report.kkt_residual)
        if report.kkt_residual <= tol:
            report.converged = True
            break

    L = laplacian_from_weights(n, w)
    ev = np.linalg.eigvalsh(L)
    if n > 1 and ev[1] < DISCONNECT_TOL * max(ev[-1], 1e-300):
        warnings.warn(
            "CGL estimate is (near) disconnected; the fitted pseudo-determinant is unreliable",
            RuntimeWarning,
        )
    return L, report


def _reference_objective(w, n, c_fold, eps=1e-12):
    """Objective for the oracle, pseudo-determinant straight from eigenvalues."""
    lam = np.linalg.eigvalsh(laplacian_from_weights(n, w))
    lam_max = lam[-1]
    if lam_max <= 0:
        return np.inf
    nonzero = lam > eps * lam_max
    if nonzero.sum() != n - 1:
        return np.inf
    return float(w @ c_fold - np.log(lam[nonzero]).sum())


def estimate_cgl_reference(prob: CglProblem, grad_tol: float = 1e-9, max_iter: int = 50000):
    """Projected-gradient oracle for validating estimate_cgl (n <= 12 only).

    Deliberately shares no numerical machinery with the production solver:
    edge-weight parameterization with explicit projection onto w >= 0,
    Barzilai-Borwein steps safeguarded by backtracking, gradients through the
    Moore-Penrose pseudoinverse, objective through raw eigenvalues.
    """
    n = prob.n
    if n > 12:
        raise ValueError("reference oracle is limited to n <= 12")
    I, J = edge_index_arrays(n)
    K_reg = prob.regularized_input()
    c = _edge_costs(K_reg, I, J)
    _check_problem(prob, c)

    w = np.full(len(c), n / np.trace(prob.K) / n)
    f = _reference_objective(w, n, c)
    while not np.isfinite(f):
        w *= 2.0
        f = _reference_objective(w, n, c)

    def gradient(w):
        P = np.linalg.pinv(laplacian_from_weights(n, w), hermitian=True)
        d = np.diag(P)
        return c - (d[I] + d[J] - 2.0 * P[I, J])

    g = gradient(w)
    step = 1.0 / max(np.abs(g).max(), 1.0)
    for it in range(max_iter):
        if _kkt_residual(w, g) <= grad_tol:
            break
        accepted = False
        t = step
        for _ in range(60):
            w_new = np.maximum(0.0, w - t * g)
            move = w_new - w
            f_new = _reference_objective(w_new, n, c)
            if f_new <= f + g @ move + (move @ move) / (2.0 * t) + 1e-15:
                accepted = True
                break
            t *= 0.5
        if not accepted or not np.any(move):
            break
        g_new = gradient(w_new)
        dg = g_new - g
        denom = move @ dg
        step = (move @ move) / denom if denom > 0 else t * 2.0
        step = float(np.clip(step, 1e-12, 1e12))
        w, f, g = w_new, f_new, g_new
    return laplacian_from_weights(n, w)
