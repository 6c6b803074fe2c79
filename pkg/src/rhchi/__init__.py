"""Exact Chow-ring arithmetic for logarithmic Euler characteristics and Riemann-Hurwitz checks."""
from .charclass import SheafClass, q_polynomial, q_polynomial_report
from .combinat import delta, lambda_, ordered_factorizations, signed_count
from .cover import CoverData, determine_sign, rh_lhs, rh_rhs_corollary, rh_rhs_theorem
from .exactring import ChowModel, GradedElement, ModelError
from .geometry import Arrangement, ChiConvention, chi, chi_log, chi_stratum_log, chi_stratum_plain
from .selfx import RewriteRuleSet, expand_full

__all__ = [
    "Arrangement",
    "ChiConvention",
    "ChowModel",
    "CoverData",
    "GradedElement",
    "ModelError",
    "RewriteRuleSet",
    "SheafClass",
    "chi",
    "chi_log",
    "chi_stratum_log",
    "chi_stratum_plain",
    "delta",
    "determine_sign",
    "expand_full",
    "lambda_",
    "ordered_factorizations",
    "q_polynomial",
    "q_polynomial_report",
    "rh_lhs",
    "rh_rhs_corollary",
    "rh_rhs_theorem",
    "signed_count",
]
