"""Joint identification of graph Laplacians and graph-based filters."""

from .cgl import CglProblem, SolverReport, estimate_cgl, estimate_cgl_reference, objective
from .filters import FILTER_KINDS, FilterSpec, apply_filter, diffusion_kernel_limit, filter_response, inverse_response
from .graphs import GraphModelSpec, WeightedGraph, build_cgl, generate_graph, quadratic_form
from .identify import GsiOptions, GsiResult, baseline_ipf, identify, init_beta, prefilter, update_beta_hop
from .metrics import MetricReport, alpha_grid, best_alpha_sweep, f_score, relative_error, trace_normalize
from .signals import DiffusionConfig, SignalBatch, diffusion_covariance, sample_covariance, sample_signals, simulate_diffusion
from .spectral import SpectralDecomposition, eig_sym, gft, matrix_function, pseudoinverse_spectrum

__version__ = "0.1.0"
