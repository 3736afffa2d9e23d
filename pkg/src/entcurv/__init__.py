"""Certified lower bounds and searched upper bounds for entropy contraction."""

from .certify import CertReport, PairSet, certify_kappa, lipschitz_constant, pair_set
from .contraction import (
    EstimateConfig,
    EstimateReport,
    bl_duality_check,
    entropy_ratio,
    estimate_rho,
    lambda_op,
    variance_contraction_spectral,
)
from .measure import (
    ContractViolation,
    FiniteSpace,
    MarkovKernel,
    Metric,
    adjoint,
    apply,
    conditional_kernel,
    entropy,
    identity_kernel,
    mixing_kernel,
    mixture,
)
from .transport import TransportPlan, w1, winf
from .zoo import (
    BlockFamily,
    build_nsets,
    build_permutations,
    build_product,
    downup_theoretical_kappa,
    theta_star,
    theta_star_star,
)

__version__ = "0.1.0"

__all__ = [
    "BlockFamily", "CertReport", "ContractViolation", "EstimateConfig", "EstimateReport", "FiniteSpace",
    "MarkovKernel", "Metric", "PairSet", "TransportPlan", "adjoint", "apply", "bl_duality_check",
    "build_nsets", "build_permutations", "build_product", "certify_kappa", "conditional_kernel",
    "downup_theoretical_kappa", "entropy", "entropy_ratio", "estimate_rho", "identity_kernel", "lambda_op",
    "lipschitz_constant", "mixing_kernel", "mixture", "pair_set", "theta_star", "theta_star_star",
    "variance_contraction_spectral", "w1", "winf",
]
