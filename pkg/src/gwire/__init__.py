"""Sparse Frechet sufficient dimension reduction with graphical structure."""

__version__ = "0.1.0"

from .graph import NeighborhoodGraph, glasso, neighborhoods_from_precision, tau_weights
from .kernels import (
    KernelEstimates,
    cume_kernel,
    estimate_kernels,
    sample_covariance,
    sir_kernel,
    wire_kernel,
)
from .linalg import cholesky_sample, norms, sym_eig, sym_inv_sqrt
from .metrics import (
    DiscretePmf,
    EuclideanVector,
    GaussianLocation,
    QuantileFunction,
    SpherePoint,
    bounded_transform,
    distance,
    pairwise_distances,
)
from .selection import cross_validate, ladle, standardize_directions
from .solver import (
    AdmmConfig,
    ElementwiseL1,
    FitResult,
    GraphicalPenalty,
    RowGroup,
    admm_fit,
    extract_directions,
    kkt_check,
    lambda_max,
)
from .synthetic import (
    ScenarioSpec,
    general_loss,
    generate,
    make_sigma1,
    make_sigma2,
    run_scenario,
    selection_metrics,
)
