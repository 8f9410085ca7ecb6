"""Exact lazy operator algebra for checking tetrablock-isometric dilations."""
from .spaces import Finite, FinVec, SequenceOf, SpaceMismatch, Sum, direct_sum, window
from .operators import (LocalOp, adjoint_op, apply_op, block_op, combine_op, commutator_op,
                        compose_op, identity_op, matrix_op, ops_equal, scale_op, zero_op)
from .dense import (DenseWindow, NormEstimate, NotPSDError, operator_norm_estimate,
                    psd_sqrt_dense, truncate_dense)
from .hardy import (OperatorSymbol, SupNormBracket, analytic_symbol_check, extract_symbol,
                    shift_op, symbol_sup_norm, toeplitz_from_symbol,
                    tz2_commutant_pattern_check)
from .tetrablock import (DefectData, DilationTriple, FundamentalPair, FundamentalSolveError,
                         MembershipResult, NotContractionError, OperatorTriple,
                         TetrablockPoint, commutator_balance, defect_operator,
                         dilation_compression_check, membership_oracle, pi_map,
                         solve_fundamental, tetrablock_isometry_check)
from .constructions import (AdjointData, PalParameters, XiCandidate, adjoint_dilation,
                            pal_fundamentals, pal_triple, explicit_dilation,
                            toeplitz_dilation, xi_conditions, xi_search)
from .report import Check, Report, emit_report

__version__ = "0.1.0"
