"""Hopf algebras, operads, and properads of flow charts.

Exact combinatorial Dyson-Schwinger solvers over decorated planar rooted
trees, a fuel-bounded interpreter for primitive/partial recursive functions,
and BPHZ renormalization of the halting-problem Feynman rule.
"""

from .trees import (FREE, Flag, Forest, ParseError, PlanarTree, canonicalize,
                    empty_forest, enumerate_binary_trees, enumerate_forests,
                    enumerate_trees, forest_product, mk_binary_corolla,
                    mk_corolla, mk_flag, mk_forest, mk_tree, parse_forest,
                    parse_tree, render_forest, render_terms, render_tree)
from .algebra import AlgebraElement, TensorElement, TermBudgetExceeded, power
from .linalg import Echelon, solve_linear_membership
from .hopf import (Character, admissible_cuts, antipode, convolution, coproduct,
                   counit, counit_character, reduced_coproduct)
from .grafting import (BinaryGraft, CocycleWitness, CorollaGraft, GraftError,
                       GraftOperator, SumGraft, cocycle_check, parse_graft)
from .dse import (FormalSeries, GradedSolution, MultiSeries,
                  bk_coproduct_formula_check, foissy_series_check,
                  hopf_ideal_check, parse_multiseries, parse_series, solve_bk,
                  solve_dse, solve_dse_system, subalgebra_closure_check,
                  verify_bk, verify_dse, verify_dse_system)
from .recfun import (AdmissibilityFailure, Halted, InadmissibleTree, OutOfFuel,
                     RecFunExpr, SignatureError, admissible_check,
                     admissible_output, attach_sigma, binarize, bracket, comp,
                     const, empty, evaluate, fbar,
                     flowchart_output_vertexmode, krec, mu, parse_recfun,
                     primrec, proj, recfun_flag_parser, render_recfun, S,
                     sigma_assignments, signature)
from .operad import (IDENT, OperadElement, OperadSolution, delta_corolla,
                     forget_flags, matching_hopf_series, operad_compose,
                     operad_hopf_correspondence_check, parse_operad_tree,
                     render_operad, solve_operad_dse, suboperad_closure_check,
                     suboperad_span, verify_operad_dse)
from .properad import (DagError, EDGE, FlowDag, ProperadElement,
                       ProperadSolution, mk_dag, parse_dag, properad_compose,
                       render_dag, solve_properad_dse,
                       subproperad_closure_check, subproperad_span,
                       tree_to_dag, verify_properad_dse, vertex_dag)
from .renorm import (BPHZ, FeynmanRule, LaurentElement, bphz,
                     phi_series_value, phisumc_equivalence_check,
                     rb_complement, rb_T, rota_baxter_check)
from .presets import PRESETS, load_preset

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
