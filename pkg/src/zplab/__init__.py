"""Finite-dimensional numerics for the Kalton-Peck twisted sums Z_p.

The main entry points are re-exported here; the CLI lives in
:mod:`zplab.cli`.
"""
from .biorth_distortion import (BiorthReport, BiorthSystem, BiorthValidationError,
                                InevitabilityProbe, PreconditionError, distortion_bound,
                                distortion_lower_bound, inevitability_proxy, lift_system,
                                perturbation_chain_check, renorm, synth_system,
                                validate_biorth)
from .blocks_psp import (BlockSequence, GrowthTable, block_sum_growth, disjoint_lift_vector,
                         log_lift, log_lift_lower_bound_check, make_disjoint_blocks,
                         normalize_flattened, psp_flatten)
from .kernels import BACKEND
from .kp_centralizer import (CentralizerSpec, DegenerateSampleError, ExponentMismatch,
                             TwistedVector, centralizer_defect, estimate_centralizer_constant,
                             omega_p, quasi_norm, quasi_triangle_defect, twisted_pairing)
from .seq_core import (PExponent, SeqVector, are_disjoint, lp_norm, pairing, pointwise_mul,
                       sup_norm, unit)

__version__ = "0.1.0"
