"""Exact infinite matrix rings over general coefficient rings, and the
decomposition of their derivations into inner and coefficient parts."""

__version__ = "0.1.0"

from .rings import (CoefficientDerivation, Diagnostic, Integers, IntegersMod, Matrix2Mod,
                    PolynomialsZ, Ring, UsageError, check_derivation_law, check_ring_axioms,
                    commutator, d_dt, derivation_bracket, inner_ring_derivation, parse_ring,
                    zero_derivation)
from .matrices import (ColumnFiniteOperator, FiniteMatrix, RcfOperator, add, bracket, diag,
                       identity, is_rcf_consistent_on_window, lemma1_shape, mul, neg, ones_row,
                       operator_from_accessors, shift, trace, unit, window_of)
from .derivations import (Ambient, DecompositionReport, MatrixDerivation, coefficient_map,
                          cocycle_correct, decompose, derivation_sum, evaluate, extract_v, inner,
                          lemma3_row_probe, lift, validate_derivation)
from .lie import (LieAmbient, LieDerivation, SlMembershipOracle, lie_decompose,
                  lie_extract_offdiag, lie_inner, lie_lift, lie_validate, sl_member)

__all__ = [name for name in dir() if not name.startswith("_")]
