"""Exact correlators <|U_ij|^2> of Haar unitaries under the Itzykson-Zuber weight.

The two-point resolvent W(x, y) is one determinant of the kernel
E_ij = exp(x_i y_j); its double residues are the correlators.
"""
from .clinalg import KernelMatrix, LUFactors, build_kernel, condition_estimate, resolve_precision
from .correlators import (
    CorrelatorMatrix,
    correlator_entry_affine,
    correlator_entry_quadrature,
    correlator_matrix,
)
from .errors import *  # noqa: F401,F403
from .hciz import haar_constant, hciz_probability_normalized, hciz_value
from .logcomplex import LogComplex
from .oracles import (
    HaarSample,
    MCEstimate,
    mc_correlator,
    mc_correlator_matrix,
    mc_hciz,
    morozov_subset_sum,
    permutation_product_form,
    sample_haar_unitary,
)
from .resolvent import ResolventEvaluator, ResolventPoint, pole_expansion_check, resolvent_w, resolvent_w_ratio_form
from .schur import HookSchurInput, complete_homogeneous, schur_generating_partial, schur_hook_det, schur_hook_sum
from .spectra import ProblemPair, Spectrum, make_pair, validate_spectrum, vandermonde

__version__ = "0.1.0"
