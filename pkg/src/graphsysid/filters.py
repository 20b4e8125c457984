"""Parametric graph-based filters and their inverses.

Five single-parameter filter families, each a nonnegative one-to-one map of
the graph frequency. Applied to a CGL they produce the model covariance
h(L) = U h(Lambda) U^T; their inverses undo the filtering spectrum-wise.
scalar dagger notation: x^+ = 1/x for x != 0 and 0 at x = 0.
"""

from dataclasses import dataclass

import numpy as np

from .spectral import DEFAULT_EPS_ZERO, eig_sym, pseudoinverse_spectrum

FILTER_KINDS = (
    "frequency_scaling",
    "frequency_shifting",
    "variance_shifting",
    "exponential_decay",
    "hop_localized",
)

# beta > 0 required (others allow beta = 0)
_POSITIVE_BETA = ("frequency_scaling", "exponential_decay")

# the covariance is only determined up to the factor beta/beta_hat
SCALE_AMBIGUOUS = ("frequency_scaling", "exponential_decay")

JOINTLY_IDENTIFIABLE = ("frequency_shifting", "variance_shifting", "hop_localized")


@dataclass(frozen=True)
class FilterSpec:
    """Filter kind plus its scalar parameter."""

    kind: str
    beta: float

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise ValueError(f"unknown filter kind {self.kind!r}")
        if self.kind == "hop_localized":
            if self.beta != int(self.beta) or self.beta < 1:
                raise ValueError("hop_localized needs an integer beta >= 1")
        elif self.kind in _POSITIVE_BETA:
            if not self.beta > 0:
                raise ValueError(f"{self.kind} needs beta > 0")
        else:
            if not self.beta >= 0:
                raise ValueError(f"{self.kind} needs beta >= 0")

    def to_dict(self):
        beta = int(self.beta) if self.kind == "hop_localized" else float(self.beta)
        return {"kind": self.kind, "beta": beta}

    @classmethod
    def from_dict(cls, d):
        return cls(kind=d["kind"], beta=d["beta"])


def filter_response(spec: FilterSpec, lam: float, eps_zero: float = DEFAULT_EPS_ZERO) -> float:
    """Scalar response h_beta(lambda) for lambda >= 0.

    Eigenvalues with |lambda| <= eps_zero are treated as exactly zero, which
    is how computed spectra of CGLs reach the lambda = 0 branch.
    """
    beta = spec.beta
    zero = abs(lam) <= eps_zero
    if spec.kind == "frequency_scaling":
        return 0.0 if zero else 1.0 / (beta * lam)
    if spec.kind == "frequency_shifting":
        shifted = lam + beta
        return 0.0 if abs(shifted) <= eps_zero else 1.0 / shifted
    if spec.kind == "variance_shifting":
        return beta if zero else 1.0 / lam + beta
    if spec.kind == "exponential_decay":
        return float(np.exp(-beta * lam))
    # hop_localized
    return 0.0 if zero else float(lam ** (-beta))


def inverse_response(spec: FilterSpec, s: float, eps_zero: float = DEFAULT_EPS_ZERO) -> float:
    """Scalar inverse h_beta^{-1}(s), the graph frequency producing response s."""
    beta = spec.beta
    zero = abs(s) <= eps_zero
    if spec.kind == "frequency_scaling":
        return 0.0 if zero else 1.0 / (beta * s)
    if spec.kind == "frequency_shifting":
        if zero:
            raise ValueError("frequency_shifting inverse undefined at s = 0")
        return 1.0 / s - beta
    if spec.kind == "variance_shifting":
        shifted = s - beta
        return 0.0 if abs(shifted) <= eps_zero else 1.0 / shifted
    if spec.kind == "exponential_decay":
        if s <= 0:
            raise ValueError("exponential_decay inverse needs s > 0")
        return float(-np.log(s) / beta)
    # hop_localized
    return 0.0 if zero else float((1.0 / s) ** (1.0 / beta))


def response_spectrum(spec: FilterSpec, lambdas, eps_zero: float = DEFAULT_EPS_ZERO) -> np.ndarray:
    """h_beta applied to a whole spectrum, zero branch relative to max|lambda|."""
    lambdas = np.asarray(lambdas, dtype=float)
    scale = np.abs(lambdas).max() if lambdas.size else 0.0
    beta = spec.beta
    if spec.kind == "frequency_scaling":
        inv = pseudoinverse_spectrum(lambdas, eps_zero)
        return inv / beta
    if spec.kind == "frequency_shifting":
        return pseudoinverse_spectrum(lambdas + beta, eps_zero)
    if spec.kind == "variance_shifting":
        return pseudoinverse_spectrum(lambdas, eps_zero) + beta
    if spec.kind == "exponential_decay":
        return np.exp(-beta * lambdas)
    nonzero = np.abs(lambdas) > eps_zero * scale if scale > 0 else np.zeros(lambdas.shape, bool)
    out = np.zeros_like(lambdas)
    out[nonzero] = lambdas[nonzero] ** (-float(beta))
    return out


def apply_filter(spec: FilterSpec, L: np.ndarray, eps_zero: float = DEFAULT_EPS_ZERO) -> np.ndarray:
    """Model covariance h_beta(L) = U h_beta(Lambda) U^T (symmetric PSD)."""
    d = eig_sym(L)
    out = d.reassemble(response_spectrum(spec, d.lambdas, eps_zero))
    return 0.5 * (out + out.T)


def diffusion_kernel_limit(L: np.ndarray, beta: float, t: int) -> np.ndarray:
    """(I - beta L / t)^t by repeated multiplication.

    Converges to the exponential-decay kernel exp(-beta L) as t grows; kept
    as an explicit product so the finite-t diffusion interpretation is
    directly computable.
    """
    if t < 1:
        raise ValueError("t must be a positive integer")
    n = L.shape[0]
    step = np.eye(n) - (beta / t) * np.asarray(L, dtype=float)
    out = np.eye(n)
    for _ in range(int(t)):
        out = out @ step
    return out
