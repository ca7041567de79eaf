"""GCRF regression on Kronecker product networks with factored spectral bases."""
from .errors import *  # noqa: F401,F403
from .gcrf import FitOptions, FitResult, GcrfProblem, build_problem, fit, gradients, log_likelihood, mse, predict
from .graph import SimilarityMatrix, degree, kronecker, laplacian, normalized_laplacian
from .nkp import KronFactors, kron_residual, nearest_kron, rearrange, sparsify_factors
from .randnet import GraphTopology, RngStream, gen_barabasi_albert, gen_erdos_renyi, gen_watts_strogatz
from .spectral import (
    BasisKind,
    SpectralBasis,
    approx_laplace_vec,
    approx_msn,
    approx_norm_laplace_vec,
    back_project,
    exact_basis,
    exact_kron_basis,
    project,
)
from .synthdata import Dataset, gen_dataset, gen_nkp_dataset, violate_kron

__version__ = "0.1.0"
