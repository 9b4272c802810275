"""Rule formulas against a float linear program solved by scipy.

At a point x of the domain the extremal function of a union of boxes is
the smallest s such that x lies below a convex combination
``(1-s) a + s y`` with ``a`` in the hull of the boxes and ``y`` in the
closed domain.  This is the primal of the affine-minorant problem solved
exactly by the envelope engine, computed here by a different route.
"""
import itertools
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from acrosses.cross_algebra import nk_rows
from acrosses.envelope import (
    extremal_dual, nk_envelope, rule_claim_q6, rule_claim_q7, rule_cross_in_envelope,
    rule_env_in_env, rule_prop_center,
)
from acrosses.hexpr import affine_pieces, evaluate, evaluate_array

pytestmark = pytest.mark.invariant


def lp_value(rows, domain, x):
    n, r = len(x), len(rows)
    pieces = affine_pieces(domain)
    # variable layout: s, mu_1..mu_r, p_1 (n) .. p_r (n), q (n)
    nv = 1 + r + r * n + n
    P = lambda i, j: 1 + r + i * n + j
    Q = lambda j: 1 + r + r * n + j
    A_ub, b_ub = [], []

    def ub(coefs, rhs):
        row = np.zeros(nv)
        for k, v in coefs:
            row[k] += v
        A_ub.append(row)
        b_ub.append(rhs)

    for i, beta in enumerate(rows):
        for j in range(n):
            if beta[j]:
                ub([(P(i, j), 1), (1 + i, -1)], 0)
    for j in range(n):
        ub([(Q(j), 1), (0, -1)], 0)
        ub([(Q(j), -1)] + [(P(i, j), -1) for i in range(r)], -float(x[j]))
    for coeffs, c0 in pieces:
        ub([(Q(j - 1), float(c)) for j, c in coeffs] + [(0, float(c0) - 1)], 0)
    bounds = [(0, None)] * (1 + r) + [
        (0, None if rows[i][j] else 0) for i in range(r) for j in range(n)] + [(0, None)] * n
    eq = np.zeros((1, nv))
    eq[0, :1 + r] = 1
    cost = np.zeros(nv)
    cost[0] = 1
    res = linprog(cost, A_ub=np.array(A_ub), b_ub=b_ub, A_eq=eq, b_eq=[1], bounds=bounds,
                  method="highs")
    assert res.status == 0, res.message
    return res.fun


def domain_points(domain, n, count, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        h = [Fraction(int(v), 997) for v in rng.integers(0, 997, size=n)]
        if evaluate(domain, h) < 1:
            out.append(h)
    return out


def box_rows(a_slots, n):
    return [tuple(0 if j + 1 in a_slots else 1 for j in range(n))]


CASES = [
    ("prop_center(3,2)", box_rows({1, 2, 3}, 3), nk_envelope(3, 2),
     rule_prop_center((1, 2, 3), (), 2)),
    ("prop_center(4,3)", box_rows({1, 2, 3, 4}, 4), nk_envelope(4, 3),
     rule_prop_center((1, 2, 3, 4), (), 3)),
    ("lifted center a=2 d=2 k=2", box_rows({1, 2}, 4), nk_envelope(4, 2),
     rule_prop_center((1, 2), (3, 4), 2)),
    ("lifted center a=2 d=1 k=1", box_rows({1, 2}, 3), nk_envelope(3, 1),
     rule_prop_center((1, 2), (3,), 1)),
    ("claim q6", box_rows({1}, 2), nk_envelope(2, 1), rule_claim_q6(1, 2)),
    ("claim q7", box_rows({1, 2}, 3), nk_envelope(3, 2), rule_claim_q7((1, 2), 3)),
    ("env_in_env(3,1,2)", nk_rows(3, 1), nk_envelope(3, 2), rule_env_in_env(3, 1, 2)),
    ("env_in_env(4,2,3)", nk_rows(4, 2), nk_envelope(4, 3), rule_env_in_env(4, 2, 3)),
    ("cross_in_envelope(3,1,3)", nk_rows(3, 1), nk_envelope(3, 3),
     rule_cross_in_envelope(3, 1, 3)),
    ("cross_in_envelope(4,1,3)", nk_rows(4, 1), nk_envelope(4, 3),
     rule_cross_in_envelope(4, 1, 3)),
    ("cross_in_envelope(4,1,4)", nk_rows(4, 1), nk_envelope(4, 4),
     rule_cross_in_envelope(4, 1, 4)),
]


@pytest.mark.parametrize("name,rows,domain,rule", CASES, ids=[c[0] for c in CASES])
def test_rule_matches_linear_program(name, rows, domain, rule):
    n = len(rows[0])
    for h in domain_points(domain, n, 40):
        assert abs(lp_value(rows, domain, h) - float(evaluate(rule, h))) < 1e-7, h


@pytest.mark.parametrize("name,rows,domain,rule", CASES[:6], ids=[c[0] for c in CASES[:6]])
def test_engine_dual_matches_linear_program(name, rows, domain, rule):
    n = len(rows[0])
    exact = extremal_dual(rows, domain, n)
    for h in domain_points(domain, n, 20, seed=1):
        assert abs(lp_value(rows, domain, h) - float(evaluate(exact, h))) < 1e-7


def test_two_step_formula_undershoots_for_wide_gap():
    # (sum h - k)/(l - k) is the extremal function only when l = k + 1
    rows, domain = nk_rows(3, 1), nk_envelope(3, 3)
    h = [Fraction(9, 10), Fraction(9, 10), Fraction(0)]
    assert lp_value(rows, domain, h) == pytest.approx(0.8, abs=1e-9)
    assert evaluate(rule_env_in_env(3, 1, 3), h) == Fraction(2, 5)
    assert evaluate(rule_cross_in_envelope(3, 1, 3), h) == Fraction(4, 5)
