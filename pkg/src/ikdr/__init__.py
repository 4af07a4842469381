"""Interpretable kernel dimension reduction via iterative spectral updates.

Learns an orthonormal projection W maximizing the kernel dependence
Tr(Gamma K_XW) by iterating eigendecompositions of a small d x d surrogate
matrix, for a family of kernels closed under conic combination, with
supervised, unsupervised, semi-supervised, and alternative-clustering
drivers built on top.
"""

from .kernels import (
    KernelSpec,
    KernelError,
    conic_kernel,
    gaussian_kernel,
    kernel_matrix,
    kernel_token,
    linear_kernel,
    median_bandwidth,
    multiquadratic_kernel,
    parse_kernel_token,
    polynomial_kernel,
    relative_bandwidths,
    relative_rbf_kernel,
    resolve,
    squared_kernel,
)
from .coupling import (
    CouplingMatrix,
    alternative_coupling,
    centering_matrix,
    hsic,
    one_hot,
    semisupervised_coupling,
    supervised_coupling,
    unsupervised_coupling,
)
from .surrogate import (
    SurrogateMatrix,
    conic_surrogate,
    degree_matrix,
    laplacian,
    surrogate,
    surrogate_bruteforce,
    surrogate_init,
)
from .solver import (
    ProjectionResult,
    dominant_eigenvectors,
    eigenvalue_converged,
    ism_solve,
    objective_cost,
    objective_gradient,
    principal_angle,
)

__version__ = "0.1.0"
