"""Envelopes of A-crosses over products of balls: exact combinatorics, closed-form
descriptions, and a grid oracle for rotation-invariant extremal functions."""
from .cross_algebra import (
    CrossClass, CrossMatrix, Filter, canonical_form, classify, contains_point, covers_x_n1,
    dominates, enumerate_crosses, format_matrix, full_columns, lex_compare, nk_rows,
    parse_matrix, reduce, split,
)
from .envelope import (
    RULES, Closed, Product, TwoFold, build_envelope, closing_pivots, flatten, nine_cases,
    nk_envelope, rule_claim_q6, rule_claim_q7, rule_cross_in_envelope, rule_env_in_env,
    rule_prop_center,
)
from .checks import desc_equal, qtilde_check, systems_equiv_check
from .hexpr import evaluate, parse as parse_expr, to_text
from .radial import RadialFactor, RadialModel, h_disc, h_vector, membership

__version__ = "0.1.0"

__all__ = [
    "CrossClass", "CrossMatrix", "Filter", "canonical_form", "classify", "contains_point",
    "covers_x_n1", "dominates", "enumerate_crosses", "format_matrix", "full_columns",
    "lex_compare", "nk_rows", "parse_matrix", "reduce", "split",
    "RULES", "Closed", "Product", "TwoFold", "build_envelope", "closing_pivots", "flatten",
    "nine_cases", "nk_envelope", "rule_claim_q6", "rule_claim_q7", "rule_cross_in_envelope",
    "rule_env_in_env", "rule_prop_center",
    "desc_equal", "qtilde_check", "systems_equiv_check",
    "evaluate", "parse_expr", "to_text",
    "RadialFactor", "RadialModel", "h_disc", "h_vector", "membership",
]
