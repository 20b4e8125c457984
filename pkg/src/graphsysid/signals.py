"""Filtered Gaussian signal sampling and the underlying diffusion process."""

import warnings
from dataclasses import dataclass

import numpy as np

from . import rng
from .spectral import eig_sym

PSD_REL_TOL = 1e-10


@dataclass(frozen=True)
class SignalBatch:
    """k signal samples of dimension n, one per row of `data`."""

    n: int
    k: int
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (self.k, self.n):
            raise ValueError("data shape does not match (k, n)")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("signal batch has non-finite entries")


@dataclass(frozen=True)
class DiffusionConfig:
    """Discrete diffusion parameters: rate r in (0,1), initial variance, steps."""

    r: float
    sigma2: float
    steps: int

    def __post_init__(self):
        if not (0.0 < self.r < 1.0):
            raise ValueError("diffusion rate r must lie in (0, 1)")
        if not self.sigma2 > 0:
            raise ValueError("initial variance must be positive")
        if self.steps < 0:
            raise ValueError("step count must be nonnegative")


def sample_signals(sigma: np.ndarray, k: int, seed: int) -> SignalBatch:
    """k zero-mean Gaussian samples with covariance `sigma`.

    Each sample is U diag(sqrt(max(lambda, 0))) z with z standard normal, so
    singular covariances (filters with h(0) = 0) are handled exactly: the
    sample simply carries no energy in the null directions. Normals come from
    the seeded Box-Muller stream, sample 0 first, row-major.
    """
    if k < 1:
        raise ValueError("need at least one sample")
    d = eig_sym(sigma)
    scale = np.abs(d.lambdas).max() if d.n else 0.0
    if d.lambdas.min() < -PSD_REL_TOL * max(scale, 1.0):
        raise ValueError("covariance is not positive semidefinite")
    root = d.U * np.sqrt(np.maximum(d.lambdas, 0.0))
    gen = rng.stream(seed, "signals")
    z = rng.normals(gen, k * d.n).reshape(k, d.n)
    return SignalBatch(n=d.n, k=k, data=z @ root.T)


def sample_covariance(batch: SignalBatch) -> np.ndarray:
    """Second-moment sample covariance (1/k) sum_i x_i x_i^T (zero-mean model)."""
    return batch.data.T @ batch.data / batch.k


def simulate_diffusion(L: np.ndarray, cfg: DiffusionConfig, x0: np.ndarray) -> np.ndarray:
    """Iterate x <- (I - r L) x for cfg.steps steps.

    Warns when r >= 1/lambda_max: the paper's rate range (0,1) does not by
    itself keep the iteration contractive.
    """
    x = np.asarray(x0, dtype=float)
    if x.shape != (L.shape[0],):
        raise ValueError("initial state length does not match the Laplacian")
    lam_max = float(np.linalg.eigvalsh(L).max())
    if lam_max > 0 and cfg.r >= 1.0 / lam_max:
        warnings.warn(
            f"diffusion rate r={cfg.r} >= 1/lambda_max={1.0 / lam_max:.4g}; iteration may diverge",
            RuntimeWarning,
        )
    step = np.eye(L.shape[0]) - cfg.r * L
    for _ in range(cfg.steps):
        x = step @ x
    return x


def diffusion_covariance(L: np.ndarray, cfg: DiffusionConfig) -> np.ndarray:
    """Covariance sigma^2 (I - r L)^(2 steps) of the diffused random state.

    Computed spectrally: the iteration matrix shares eigenvectors with L and
    has eigenvalues (1 - r lambda_i)^(2 steps).
    """
    d = eig_sym(L)
    factors = (1.0 - cfg.r * d.lambdas) ** (2 * cfg.steps)
    out = cfg.sigma2 * d.reassemble(factors)
    return 0.5 * (out + out.T)
