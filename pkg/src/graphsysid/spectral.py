"""Symmetric eigendecompositions, spectral matrix functions and the GFT."""

from dataclasses import dataclass

import numpy as np

# Relative threshold below which an eigenvalue counts as zero; shared by all
# pseudoinverse branches in the package.
DEFAULT_EPS_ZERO = 1e-10

SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class SpectralDecomposition:
    """Orthonormal eigenvectors (columns of U) with ascending eigenvalues."""

    U: np.ndarray
    lambdas: np.ndarray

    @property
    def n(self):
        return self.lambdas.shape[0]

    def reassemble(self, values=None):
        v = self.lambdas if values is None else np.asarray(values, dtype=float)
        return (self.U * v) @ self.U.T


def eig_sym(M: np.ndarray) -> SpectralDecomposition:
    """Eigendecomposition of a symmetric matrix with a fixed sign convention.

    The input is symmetrised as (M + M^T)/2 first. Each eigenvector is
    flipped, if needed, so that its first component of largest magnitude is
    positive, making the output deterministic across runs.
    """
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    if np.abs(M - M.T).max() > SYMMETRY_TOL * max(1.0, np.abs(M).max()):
        raise ValueError("matrix is not symmetric")
    sym = 0.5 * (M + M.T)
    lambdas, U = np.linalg.eigh(sym)
    for col in range(U.shape[1]):
        lead = np.argmax(np.abs(U[:, col]))
        if U[lead, col] < 0:
            U[:, col] = -U[:, col]
    return SpectralDecomposition(U=U, lambdas=lambdas)


def matrix_function(d: SpectralDecomposition, f) -> np.ndarray:
    """U diag(f(lambda_1), ..., f(lambda_n)) U^T for a scalar map f."""
    values = np.array([float(f(lam)) for lam in d.lambdas])
    if not np.all(np.isfinite(values)):
        raise ValueError("scalar map produced a non-finite value on the spectrum")
    out = d.reassemble(values)
    return 0.5 * (out + out.T)


def pseudoinverse_spectrum(lambdas, eps_zero=DEFAULT_EPS_ZERO) -> np.ndarray:
    """Scalar pseudoinverse of a spectrum: 1/lambda, with near-zeros mapped to 0.

    "Near zero" means |lambda| <= eps_zero * max|lambda|.
    """
    if eps_zero <= 0:
        raise ValueError("eps_zero must be positive")
    lambdas = np.asarray(lambdas, dtype=float)
    scale = np.abs(lambdas).max() if lambdas.size else 0.0
    if scale == 0.0:
        return np.zeros_like(lambdas)
    nonzero = np.abs(lambdas) > eps_zero * scale
    out = np.zeros_like(lambdas)
    out[nonzero] = 1.0 / lambdas[nonzero]
    return out


def gft(d: SpectralDecomposition, x: np.ndarray) -> np.ndarray:
    """Graph Fourier transform of x: coefficients U^T x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (d.n,):
        raise ValueError(f"signal length {x.shape} does not match n={d.n}")
    return d.U.T @ x
