"""Quantum Airy ideals in the Rees Weyl algebra and W(sp_2N) constraints."""

from .airy import (AiryReport, FgnTable, GeneratorFamily, check_airy, extract_transvection,
                   normalize, reduce_mod_ideal, solve_partition)
from .estimator import AiryIdealEstimator, WspAiryEstimator
from .heisenberg import ModePolynomial, ZeroModeScenario, to_weyl
from .weyl import AlgebraConfig, ExponentData, Transvection, WeylOperator
from .wsp import TwistConfig, build_family, compute_ck, verify_wsp_airy

__all__ = [
    "AiryReport", "FgnTable", "GeneratorFamily", "check_airy", "extract_transvection",
    "normalize", "reduce_mod_ideal", "solve_partition", "AiryIdealEstimator",
    "WspAiryEstimator", "ModePolynomial", "ZeroModeScenario", "to_weyl", "AlgebraConfig",
    "ExponentData", "Transvection", "WeylOperator", "TwistConfig", "build_family",
    "compute_ck", "verify_wsp_airy",
]
