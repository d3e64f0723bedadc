"""Stability toolkit for l1 minimization under mixed residual constraints."""

from .bounds import StabilityConstants, bound_rhs, compute_constants, estimate_robinson
from .l0 import L0Result, solve_l0
from .l1solver import (DualPoint, PrimalPoint, ThetaSystem, assemble_lp, assemble_theta,
                       construct_dual_witness, solve_l1, theta_residual)
from .lp import LinearProgram, LPSolution, Status
from .polytope import Polytope, build_p0, circumscription_gap, membership
from .problem import ProblemData, SpecialCase, best_k_term_error, make_special_case
from .rsp import RspCertificate, certify_restricted, certify_weak

__version__ = "0.1.0"
