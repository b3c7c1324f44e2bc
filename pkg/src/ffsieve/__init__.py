"""Exact computations for the large sieve over F_q[t]."""
__version__ = "0.1.0"

from .bounds import (bound_dim1, bound_general, bound_report, bound_tineq, dim1_power_bound, full_bound,
                     kth_corollary_bound, lemma_bound, m_tilde, m_tilde_recursion_check, power_bound)
from .farey import FareyPoint, ModuliFamily, close_pair, count_m, enumerate_moduli, farey_set
from .gfpoly import FieldConfig, PolyRing, enumerate_monic, euler_phi, trace
from .laurent import CharValue, FracExpansion, e_char, frac_expansion, psi, torus_norm
from .sieve import (BallIndex, SieveForm, char_ball_sum, duality_check, dual_sum_T, gram_matrix, operator_norm,
                    sieve_sum_T)

__all__ = [
    "BallIndex", "CharValue", "FareyPoint", "FieldConfig", "FracExpansion", "ModuliFamily", "PolyRing", "SieveForm",
    "bound_dim1", "bound_general", "bound_report", "bound_tineq", "char_ball_sum", "close_pair", "count_m",
    "dim1_power_bound", "dual_sum_T", "duality_check", "e_char", "enumerate_moduli", "enumerate_monic", "euler_phi",
    "farey_set", "frac_expansion", "full_bound", "gram_matrix", "kth_corollary_bound", "lemma_bound", "m_tilde",
    "m_tilde_recursion_check", "operator_norm", "power_bound", "psi", "sieve_sum_T", "torus_norm", "trace",
]
