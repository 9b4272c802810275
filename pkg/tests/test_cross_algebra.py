import itertools
import random

import pytest
from hypothesis import given, strategies as st

from acrosses.cross_algebra import (
    CrossMatrix, Filter, Ordering, as_row, canonical_form, check_index, classify,
    contains_point, covers_x_n1, dominates, enumerate_crosses, format_matrix, full_columns,
    lex_compare, nk_rows, parse_matrix, reduce, split,
)
from acrosses.envelope import nine_cases
from acrosses.errors import DimensionError, PreconditionError, SizeError

pytestmark = pytest.mark.invariant


def M(*rows):
    return CrossMatrix.of(rows)


def matrices(max_n=5):
    """Random matrices of nonzero rows over {0,1}^n, 2 <= n <= max_n."""
    def build(n):
        row = st.tuples(*[st.integers(0, 1)] * n).filter(any)
        return st.lists(row, min_size=1, max_size=8).map(CrossMatrix.of)
    return st.integers(2, max_n).flatmap(build)


# --- rows ------------------------------------------------------------------

def test_row_validation():
    assert as_row("0110") == (0, 1, 1, 0)
    with pytest.raises(ValueError):
        as_row("01a")
    with pytest.raises(ValueError):
        check_index("000")
    with pytest.raises(DimensionError):
        check_index("1")


@pytest.mark.parametrize("a,b,want", [
    ("011", "100", Ordering.LT),
    ("011", "011", Ordering.EQ),
    ("100", "011", Ordering.GT),
])
def test_lex_compare(a, b, want):
    assert lex_compare(as_row(a), as_row(b)) == want


def test_lex_compare_rows_of_q5_ascending():
    rows = [as_row(r) for r in ("0111", "1001", "1100")]
    assert all(lex_compare(x, y) == Ordering.LT for x, y in zip(rows, rows[1:]))


def test_lex_compare_length_mismatch():
    with pytest.raises(DimensionError):
        lex_compare((0, 1), (0, 1, 1))
    with pytest.raises(DimensionError):
        dominates((0, 1), (0, 1, 1))


@pytest.mark.parametrize("a,b,want", [("001", "011", True), ("011", "100", False), ("11", "11", True)])
def test_dominates(a, b, want):
    assert dominates(as_row(a), as_row(b)) is want


@pytest.mark.parametrize("rows,want", [
    (("001", "011"), ("011",)),
    (("0011", "0101", "1001"), ("0011", "0101", "1001")),
    (("01", "10", "11"), ("11",)),
])
def test_reduce_examples(rows, want):
    assert reduce(M(*rows)) == M(*want)


@pytest.mark.parametrize("row,d,a", [
    ("0110", (2, 3), (1, 4)),
    ("11", (1, 2), ()),
    ("0001", (4,), (1, 2, 3)),
])
def test_split(row, d, a):
    s = split(as_row(row))
    assert s.d_slots == d and s.a_slots == a


# --- classification --------------------------------------------------------

def test_classify_examples():
    assert classify(M("011", "101", "110")).label == "NKCross(2)"
    c = classify(M("011", "100"))
    assert c.kind == "TwoFoldGrouped" and c.alpha == (0, 1, 1)
    assert classify(M("0011", "0110", "1001", "1100")).kind == "General"
    assert classify(M("11")).kind == "FullProduct"
    assert classify(M("01", "10")).kind == "ClassicalCross"


def test_classify_requires_reduced():
    with pytest.raises(PreconditionError):
        classify(M("001", "011"))


@pytest.mark.parametrize("n", range(2, 6))
def test_classify_all_nk_crosses(n):
    for k in range(1, n + 1):
        c = classify(CrossMatrix(n, nk_rows(n, k)))
        assert c.is_nk and c.k == k


def test_covers_and_full_columns():
    assert not covers_x_n1(M("001", "100"))
    assert covers_x_n1(M("01", "10"))
    q9 = next(c for c in nine_cases() if c.name == "Q9").matrix
    assert covers_x_n1(q9)
    assert full_columns(M("011", "101")) == {3}
    assert full_columns(M("11")) == {1, 2}
    assert full_columns(M("01", "10")) == frozenset()


def test_contains_point_examples():
    q4 = M("0011", "0110", "1001", "1100")
    assert contains_point(q4, (True, False, False, True))
    assert not contains_point(q4, (False,) * 4)
    assert contains_point(q4, (True,) * 4)
    with pytest.raises(DimensionError):
        contains_point(q4, (True,) * 3)


# --- canonical forms -------------------------------------------------------

def test_canonical_form_examples():
    canon, perm = canonical_form(M("10"))
    assert canon == M("01") and perm == (2, 1)
    q1 = next(c for c in nine_cases() if c.name == "Q1").matrix
    assert canonical_form(M("0110", "0001", "1000"))[0] == canonical_form(q1)[0]


def test_canonical_form_is_orbit_minimum_for_q1():
    q1 = next(c for c in nine_cases() if c.name == "Q1").matrix
    orbit = [q1.permuted(p) for p in itertools.permutations(range(1, 5))]
    assert canonical_form(q1)[0] == min(orbit, key=lambda m: m.rows)


@given(matrices(), st.randoms(use_true_random=False))
def test_canonical_form_orbit_invariant(m, rnd):
    perm = list(range(1, m.n_factors + 1))
    rnd.shuffle(perm)
    canon, p = canonical_form(m)
    assert canonical_form(m.permuted(perm))[0] == canon
    assert m.permuted(p) == canon


def test_canonical_form_100_seeded_matrices():
    rnd = random.Random(0)
    for _ in range(100):
        n = rnd.randint(2, 5)
        rows = {tuple(rnd.randint(0, 1) for _ in range(n)) for _ in range(rnd.randint(1, 6))}
        rows = [r for r in rows if any(r)] or [(1,) * n]
        m = CrossMatrix.of(rows)
        perm = list(range(1, n + 1))
        rnd.shuffle(perm)
        assert canonical_form(m.permuted(perm))[0] == canonical_form(m)[0]


# --- reduction invariants --------------------------------------------------

@given(matrices())
def test_reduce_idempotent_antichain_and_same_union(m):
    r = reduce(m)
    assert reduce(r) == r
    assert all(not dominates(a, b) for a in r.rows for b in r.rows if a != b)
    for flags in itertools.product((False, True), repeat=m.n_factors):
        assert contains_point(m, flags) == contains_point(r, flags)


@given(matrices())
def test_covers_is_column_condition(m):
    assert covers_x_n1(m) == all(any(r[k] for r in m.rows) for k in range(m.n_factors))
    # equivalently: every point with exactly one coordinate outside A is in the cross
    for k in range(m.n_factors):
        flags = [True] * m.n_factors
        flags[k] = False
        if covers_x_n1(m):
            assert contains_point(m, flags)


# --- enumeration -----------------------------------------------------------

STANDARD = {Filter.ANTICHAIN, Filter.COLUMN_COVERED, Filter.NOT_NK, Filter.NO_FULL_COLUMN}


def test_enumerate_small_cases_empty():
    assert enumerate_crosses(2, {Filter.ANTICHAIN, Filter.COLUMN_COVERED, Filter.NOT_NK}) == []
    assert enumerate_crosses(3, STANDARD | {Filter.NOT_TWOFOLD_GROUPED}) == []


def test_enumerate_four_contains_nine_and_is_stable():
    out = enumerate_crosses(4, STANDARD)
    canon = {canonical_form(c.matrix)[0] for c in nine_cases()}
    assert canon <= set(out)
    assert len(out) == 12
    assert out == enumerate_crosses(4, STANDARD)
    assert all(canonical_form(m)[0] == m for m in out)


def test_enumerate_matches_brute_force_without_antichain_filter():
    with_anti = set(enumerate_crosses(3, {Filter.ANTICHAIN}))
    brute = {canonical_form(reduce(m))[0] for m in enumerate_crosses(3)}
    assert with_anti == brute


def test_enumerate_size_errors():
    with pytest.raises(SizeError):
        enumerate_crosses(1)
    with pytest.raises(SizeError):
        enumerate_crosses(6, {Filter.ANTICHAIN})


# --- text format -----------------------------------------------------------

def test_parse_and_format_round_trip():
    text = "# Q9\n0111\n\n1001  # comment\n1010\n1100\n"
    m = parse_matrix(text)
    assert parse_matrix(format_matrix(m)) == m
    with pytest.raises(DimensionError):
        parse_matrix("01\n011\n")
    with pytest.raises(ValueError):
        parse_matrix("00\n")
    with pytest.raises(ValueError):
        parse_matrix("# nothing\n")
