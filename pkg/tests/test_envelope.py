import itertools
import random
from fractions import Fraction

import pytest

from acrosses.checks import desc_equal, desc_subset
from acrosses.cross_algebra import (
    CrossMatrix, Filter, covers_x_n1, dominates, enumerate_crosses, full_columns, reduce,
    split,
)
from acrosses.envelope import (
    RULES, RULES_BY_ID, Closed, Product, TwoFold, as_closed, build_envelope, close_inner,
    closing_pivots, extremal_dual, flatten, nine_cases, nk_envelope, pivot_parts,
    rule_claim_q6, rule_claim_q7, rule_cross_in_envelope, rule_env_in_env, rule_prop_center,
    simplify_set,
)
from acrosses.errors import (
    DegenerateSetError, PathologicalCrossError, PreconditionError, SizeError,
)
from acrosses.hexpr import evaluate, parse, rename, to_text, var

pytestmark = pytest.mark.invariant

STANDARD = {Filter.ANTICHAIN, Filter.COLUMN_COVERED, Filter.NOT_NK, Filter.NO_FULL_COLUMN}
Q = {c.name: c for c in nine_cases()}


def M(*rows):
    return CrossMatrix.of(rows)


def rand_point(rnd, n, den=64, top=1):
    return [Fraction(rnd.randrange(0, den * top), den) for _ in range(n)]


def same_function(e1, e2, n, samples=300, seed=0):
    rnd = random.Random(seed)
    pts = [list(p) for p in itertools.product([Fraction(i, 4) for i in range(5)], repeat=n)]
    pts += [rand_point(rnd, n, 97, 1) for _ in range(samples)]
    for p in pts:
        if evaluate(e1, p) != evaluate(e2, p):
            return p
    return None


def covering_matrices(n):
    """Every reduced matrix over {0,1}^n covering the classical cross (not canonicalised)."""
    out = set()
    for m in enumerate_crosses(n, {Filter.ANTICHAIN, Filter.COLUMN_COVERED}):
        for perm in itertools.permutations(range(1, n + 1)):
            out.add(m.permuted(perm))
    return sorted(out, key=lambda m: (len(m.rows), m.rows))


@pytest.fixture(scope="module")
def closed_family():
    """(matrix, Closed) for the n = 3 and n = 4 standard enumerations and the nine."""
    fam = []
    mats = enumerate_crosses(3, {Filter.ANTICHAIN, Filter.COLUMN_COVERED}) + \
        enumerate_crosses(4, STANDARD) + [c.matrix for c in nine_cases()]
    for m in mats:
        d = as_closed(build_envelope(m, certified=False))
        if d is not None:
            fam.append((m, d))
    return fam


# --- rules -----------------------------------------------------------------

def test_nk_envelope_examples():
    assert to_text(nk_envelope(2, 1)) == "sum(h1,h2)"
    assert evaluate(nk_envelope(3, 3), [Fraction(99, 100)] * 3) < 1
    assert to_text(nk_envelope(3, 2)) == "scale(1/2,sum(h1,h2,h3))"
    with pytest.raises(SizeError):
        nk_envelope(2, 3)


def test_prop_center_examples():
    assert same_function(rule_prop_center((1, 2), (), 1), parse("sum(h1,h2)"), 2) is None
    assert same_function(rule_prop_center((1, 2, 3), (), 3), parse("max(h1,h2,h3)"), 3) is None
    q7_shape = rule_prop_center((1, 3), (4,), 2)
    assert same_function(q7_shape, parse("max(h1,h3,sum(h1,h3,h4,-1))"), 4) is None
    with pytest.raises(DegenerateSetError):
        rule_prop_center((), (1,), 1)


def test_env_in_env_examples():
    assert to_text(rule_env_in_env(2, 1, 2)) == "max(0,sum(h1,h2,-1))"
    h = [Fraction(1, 2), Fraction(3, 10), Fraction(2, 5)]
    assert evaluate(rule_env_in_env(3, 1, 3), h) == Fraction(1, 10)
    assert evaluate(rule_env_in_env(3, 1, 3), [0, 0, 0]) == 0
    with pytest.raises(SizeError):
        rule_env_in_env(3, 2, 2)


def test_claim_q6_examples():
    e = rule_claim_q6(2, 4)
    assert e == var(2)
    assert evaluate(e, [0, 0, 0, 0]) == 0
    assert evaluate(e, [0, Fraction(3, 5), 0, Fraction(3, 10)]) == Fraction(3, 5)


def test_rule_registry_tags():
    assert {r.origin for r in RULES} <= {"tabulated", "derived, oracle-verified"}
    assert {"prop_center", "env_in_env", "claim_q6", "claim_q7", "convex_dual"} <= set(RULES_BY_ID)


# --- rules against the dual linear program ---------------------------------

@pytest.mark.parametrize("n,k,l", [(n, k, l) for n in range(2, 5) for k in range(1, n)
                                   for l in range(k + 1, n + 1)])
def test_cross_in_envelope_matches_dual(n, k, l):
    from acrosses.cross_algebra import nk_rows
    dual = extremal_dual(nk_rows(n, k), nk_envelope(n, l), n)
    assert same_function(rule_cross_in_envelope(n, k, l), dual, n) is None
    tabulated = rule_env_in_env(n, k, l)
    if l == k + 1:
        assert same_function(tabulated, dual, n) is None
    else:
        assert same_function(tabulated, dual, n) is not None


@pytest.mark.parametrize("a,d,k", [(a, d, k) for a in range(1, 4) for d in range(0, 3)
                                   if a + d <= 4 for k in range(max(d, 1), a + d + 1)])
def test_prop_center_lifted_matches_dual(a, d, k):
    n = a + d
    row = tuple([0] * a + [1] * d)
    dual = extremal_dual([row], nk_envelope(n, k), n)
    rule = rule_prop_center(range(1, a + 1), range(a + 1, n + 1), k)
    assert same_function(rule, dual, n) is None


def test_claims_match_dual():
    assert same_function(rule_claim_q6(1, 2), extremal_dual([(0, 1)], nk_envelope(2, 1), 2), 2) is None
    dual = extremal_dual([(0, 0, 1)], nk_envelope(3, 2), 3)
    assert same_function(rule_claim_q7((1, 2), 3), dual, 3) is None


# --- build_envelope examples and errors ------------------------------------

def test_build_examples():
    assert to_text(build_envelope(M("01", "10")).expr) == "sum(h1,h2)"
    q6 = build_envelope(Q["Q6"].matrix)
    assert desc_equal(q6, Closed(4, parse("max(sum(h1,h3),sum(h2,h4),sum(h2,h3))"))).equal


def test_q9_recursion_is_strictly_smaller_than_tabulated():
    ours = build_envelope(Q["Q9"].matrix, certified=False)
    tabulated = Closed(4, Q["Q9"].expr)
    cmp = desc_equal(ours, tabulated)
    assert not cmp.equal
    assert cmp.witness == (Fraction(1, 32), 0, Fraction(63, 64), Fraction(63, 64))
    assert desc_subset(ours, tabulated) is None
    assert desc_subset(tabulated, ours) is not None
    flagged = build_envelope(Q["Q9"].matrix)
    assert "disagrees" in flagged.note and flagged.expr == ours.expr


def test_tabulated_rule_set_reproduces_q9():
    ours = as_closed(build_envelope(Q["Q9"].matrix, rules="tabulated", certified=False))
    assert ours is not None
    assert desc_equal(ours, Closed(4, Q["Q9"].expr)).equal


def test_build_errors():
    with pytest.raises(PathologicalCrossError):
        build_envelope(M("001", "100"))
    with pytest.raises(PreconditionError):
        build_envelope(M("001", "011", "110"))
    with pytest.raises(PreconditionError):
        build_envelope(M("011", "101"), pivot=3)


def test_structural_nodes():
    d = build_envelope(M("011", "101"))
    assert isinstance(d, Closed) and desc_equal(d, Closed(3, parse("sum(h1,h2)"))).equal
    from acrosses.envelope import _build
    node = _build(M("011", "101"), None, "tabulated")
    assert isinstance(node, (Closed, Product))
    tf = TwoFold(3, 1, (2, 3), M("01", "10"), Closed(2, parse("sum(h1,h2)")), ((1, 1),), None)
    assert flatten(tf) is None


def test_nine_table():
    assert len(nine_cases()) == 9
    assert Q["Q1"].text == "sum(h1,h4,max(h2,h3))"
    assert Q["Q4"].text == "max(sum(h2,h4),sum(h1,h3))"
    assert Q["Q8"].text == "sum(h4,max(scale(1/2,sum(h1,h2,h3)),h1,h2,h3))"


@pytest.mark.parametrize("name", [f"Q{i}" for i in range(1, 10)])
def test_certified_formulas_agree_with_recursion(name):
    d = as_closed(build_envelope(Q[name].matrix, certified=False))
    assert d is not None
    cmp = desc_equal(d, Closed(4, Q[name].expr))
    assert cmp.equal, f"{name}: sets differ at h={tuple(map(str, cmp.witness))}"


# --- invariants over the closed family -------------------------------------

def test_every_expression_is_convex_and_monotone(closed_family):
    rnd = random.Random(1)
    for _, d in closed_family:
        for _ in range(1000):
            h, g = rand_point(rnd, d.n), rand_point(rnd, d.n)
            mid = [(a + b) / 2 for a, b in zip(h, g)]
            assert evaluate(d.expr, mid) <= (evaluate(d.expr, h) + evaluate(d.expr, g)) / 2
            lo = [min(a, b) for a, b in zip(h, g)]
            assert evaluate(d.expr, lo) <= evaluate(d.expr, h)


def test_branch_and_classical_cross_inclusion(closed_family):
    rnd = random.Random(2)
    for m, d in closed_family:
        for row in m.rows:
            for _ in range(200):
                h = [Fraction(rnd.randrange(64), 64) if b else Fraction(0) for b in row]
                assert evaluate(d.expr, h) < 1, (m, row, h)
        for _ in range(300):
            h = rand_point(rnd, d.n)
            if sum(h) < 1:
                assert evaluate(d.expr, h) < 1


def test_monotone_in_branches():
    mats = covering_matrices(3)
    env = {m: build_envelope(m, certified=False) for m in mats}
    pairs = 0
    for m1, m2 in itertools.product(mats, repeat=2):
        if m1 != m2 and all(any(dominates(a, b) for b in m2.rows) for a in m1.rows):
            pairs += 1
            assert desc_subset(env[m1], env[m2], n=3) is None, (m1, m2)
    assert pairs > 20


def test_monotone_in_branches_four_factors():
    rnd = random.Random(3)
    base = enumerate_crosses(4, {Filter.ANTICHAIN, Filter.COLUMN_COVERED})
    checked = 0
    for m1 in rnd.sample(base, min(25, len(base))):
        # enlarge by a random extra row, keep it reduced
        extra = tuple(rnd.randint(0, 1) for _ in range(4))
        if not any(extra):
            continue
        m2 = reduce(CrossMatrix.of(list(m1.rows) + [extra]))
        if m2 == m1:
            continue
        e1, e2 = build_envelope(m1, certified=False), build_envelope(m2, certified=False)
        assert desc_subset(e1, e2, grid_step=Fraction(1, 32), n=4) is None
        checked += 1
    assert checked >= 8


def test_pivot_independence_small(closed_family):
    for m, _ in closed_family:
        found = list(closing_pivots(m).values())
        for other in found[1:]:
            assert desc_equal(found[0], other, grid_step=Fraction(1, 32), n_random=2000).equal, m


def test_permutation_equivariance(closed_family):
    rnd = random.Random(4)
    for m, d in closed_family:
        perm = list(range(1, m.n_factors + 1))
        rnd.shuffle(perm)
        moved = build_envelope(m.permuted(perm))
        # new column i is old column perm[i-1]
        back = rename(d.expr, {old: new for new, old in enumerate(perm, 1)})
        assert desc_equal(moved, Closed(m.n_factors, back), grid_step=Fraction(1, 32),
                          n_random=2000).equal, (m, perm)


# --- internals -------------------------------------------------------------

def test_pivot_parts_keeps_zero_row():
    q1, q2 = pivot_parts(M("0011", "1001", "1100"), 1)
    assert q1 == M("011", "100")
    assert (0, 0, 0) not in q2 and q2 == ((0, 0, 1), (1, 0, 0))
    _, q2 = pivot_parts(M("01", "10"), 1)
    assert q2 == ((0,),)


def test_close_inner_self_and_product():
    q1 = M("01", "10")
    assert close_inner([(0, 1), (1, 0)], q1, nk_envelope(2, 1)) == (parse("0"), ("self_envelope",))
    got, ids = close_inner([(0, 0)], M("11"), parse("0"))
    assert ids[0] == "max_lifting" and same_function(got, parse("max(h1,h2)"), 2) is None


def test_simplify_set_keeps_the_set():
    e = parse("max(sum(h1,h2),h1,scale(1/2,sum(h1,h2)),0)")
    s = simplify_set(e, 2)
    assert to_text(s) == "sum(h1,h2)"
    assert desc_equal(Closed(2, e), Closed(2, s)).equal
