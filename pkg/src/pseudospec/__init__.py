"""Spectra, pseudospectra and resolvent estimates for the complex harmonic oscillator.

``H_c = -d^2/dx^2 + c x^2`` with ``Re c > 0`` is discretized by Chebyshev
collocation on ``[-L, L]``; the package computes its spectrum, samples
``sigma_min(H - zI)`` over the complex plane, traces resolvent norms along
``z_eta = b eta + c eta^p`` and checks the semiclassical kernel bounds behind
the ``|z|^{-1/3}`` decay estimate.
"""

from .chebyshev import ChebGrid, DiffMatrix, barycentric_eval, cheb_points, diff_matrix
from .fitting import ExponentFit, FitRefusedError, loglog_fit
from .kernelbound import (
    KernelScalingReport,
    SchurBound,
    SemiclassicalParams,
    airy_head_integral,
    airy_tail_integral,
    g_function,
    kernel_value,
    lambda_symbol,
    lemma1_check,
    scaling_fit,
    schur_bound,
    theorem2_inequality_check,
    theorem2_search,
)
from .linalg import (
    ConvergenceError,
    LinalgError,
    SingularMatrixError,
    eigenvalues,
    lu_decompose,
    matrix_two_norm,
    reference_singular_values,
    smallest_singular_value,
    solve,
)
from .operator import (
    DiscretizedOperator,
    OscillatorParams,
    SpectrumResult,
    compute_spectrum,
    discretize,
    eigenfunction_residual,
    exact_eigenfunction,
    exact_eigenvalue,
)
from .pseudospectra import (
    ComplexWindow,
    CurveTrace,
    PseudospectrumField,
    compute_field,
    contours,
    fit_exponent,
    omega_parameters,
    omega_region_membership,
    perturbation_check,
    resolvent_norm_at,
    sector_membership,
    trace_curve,
)

__version__ = "0.1.0"
