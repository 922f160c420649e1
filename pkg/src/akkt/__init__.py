"""Asymptotic KKT certificates and a safeguarded augmented Lagrangian solver."""

from .alm import AlmConfig, AlmTrace, alm_solve
from .certificates import (AkktRecord, Certificate, MembershipWitness, akkt_residuals, is_kkt,
                           lagrangian_grad_x, m_membership, quadratic_penalty_generator)
from .families import SpecError, build, load_problem
from .problem import Problem

__version__ = "0.1.0"

__all__ = ["AlmConfig", "AlmTrace", "alm_solve", "AkktRecord", "Certificate",
           "MembershipWitness", "akkt_residuals", "is_kkt", "lagrangian_grad_x",
           "m_membership", "quadratic_penalty_generator", "SpecError", "build", "load_problem",
           "Problem"]
