"""Correlation kernels for Hermitian ensembles with a low-rank external source.

The package builds the rank-n projection kernel of an even polynomial
weight, its finite-rank correction under an exponential source tilt, an
independent Gram-matrix oracle, the largest-eigenvalue distribution via
Fredholm determinants, and a direct Monte Carlo sampler for the Gaussian
case.
"""

from .quadrature import (
    QuadratureRule,
    WeightSpec,
    custom_weight_rule,
    gauss_hermite_rule,
    integrate_weighted,
    legendre_rule,
)
from .orthopoly import (
    PolyCoeffs,
    RecurrenceTable,
    build_recurrence,
    cd_kernel_k0,
    eval_monic,
    extract_coeffs,
)
from .source_kernel import (
    KernelModel,
    SourceSpec,
    build_model,
    kernel_K,
    kernel_K_det_form,
    kernel_grid,
    matrix_B,
    vector_t,
    vector_v,
    vector_w,
)
from .gram_oracle import GramOracle, build_gram, oracle_K
from .fredholm import FredholmConfig, lmax_cdf
from .sampling import SampleBatch, empirical_density, empirical_lmax_cdf, sample_spectra

__version__ = "0.1.0"
