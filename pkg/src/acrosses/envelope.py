"""Envelope descriptions of A-crosses as exact piecewise-linear sub-level sets.

The builder follows the pivot recursion: strip columns that are 1 in every
row, stop at (N,k)-crosses, and otherwise pick a pivot column ``m``.  With

    Q'  = reduce(rows with column m dropped)
    Q'' = reduce(rows having a 1 in column m, column m dropped)

the envelope is ``{h_m + u(h') < 1} ∩ env(Q')`` where ``u`` is the relative
extremal function of the ``Q''`` set inside ``env(Q')``.  ``u`` is closed by
a small database of formulas, then by an exact dual linear program.

In the log-radius picture every set involved is a union of boxes in
``[0,1)^n``, and ``u`` is the largest convex, coordinatewise nondecreasing
function that is ``<= 0`` on the ``Q''`` boxes and ``<= 1`` on ``env(Q')``.
Such a function is the maximum of its affine minorants ``c.h + c0`` with
``c >= 0``; those form a polyhedron whose vertices give ``u`` exactly.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .cross_algebra import (
    CrossMatrix, Row, classify, covers_x_n1, full_columns, reduce_rows,
    canonical_form, parse_matrix,
)
from .errors import (
    DegenerateSetError, PathologicalCrossError, PreconditionError, SizeError,
)
from .hexpr import (
    Affine, Const, HExpr, Var, affine_expr, affine_pieces, const, hmax, hsum,
    max_of_affine, parse, rename, scale, var,
)
from .polyhedra import pareto_maximal, vertices

RULE_SETS = ("exact", "tabulated")


# --- closed-form rules -----------------------------------------------------

def nk_envelope(n: int, k: int) -> HExpr:
    """``(h1+...+hn)/k``; its sub-level set is the envelope of the (n,k)-cross."""
    if not 1 <= k <= n:
        raise SizeError(f"need 1 <= k <= n, got n={n}, k={k}")
    return scale(Fraction(1, k), hsum(*(var(j) for j in range(1, n + 1))))


def rule_prop_center(a_slots: Sequence[int], d_slots: Sequence[int], k: int) -> HExpr:
    """Extremal function of ``prod A (a_slots) x prod D (d_slots)`` in the (n,k) envelope.

    ``max{max_a h_a, max_T (sum_a h + sum_T h - |T|)/(k - |T|)}`` over
    subsets ``T`` of the D-slots with ``|T| < k``.  Without D-slots this is
    ``max{sum h / k, max_j h_j}``.
    """
    a_slots, d_slots = tuple(sorted(a_slots)), tuple(sorted(d_slots))
    if not a_slots:
        raise DegenerateSetError("the A-part of the set is empty")
    if set(a_slots) & set(d_slots):
        raise ValueError("a_slots and d_slots overlap")
    p = len(d_slots)
    n = p + len(a_slots)
    if not 1 <= k <= n or p > k:
        raise SizeError(f"need len(d_slots) <= k <= n, got k={k}, n={n}, d={p}")
    terms = [var(a) for a in a_slots]
    for size in range(min(p, k - 1) + 1):
        for T in itertools.combinations(d_slots, size):
            shift = [const(-size)] if size else []
            body = hsum(*(var(j) for j in sorted(a_slots + T)), *shift)
            terms.append(scale(Fraction(1, k - size), body))
    return hmax(*terms)


def rule_env_in_env(n: int, k: int, l: int) -> HExpr:
    """``max{0, (sum h - k)/(l - k)}``.

    This is the extremal function of the (n,k)-cross inside the (n,l)
    envelope only when ``l = k + 1``; for larger gaps it is a strict lower
    bound, see :func:`rule_cross_in_envelope`.
    """
    if not 1 <= k < l <= n:
        raise SizeError(f"need 1 <= k < l <= n, got n={n}, k={k}, l={l}")
    vs = [var(j) for j in range(1, n + 1)]
    return hmax(const(0), scale(Fraction(1, l - k), hsum(*vs, const(-k))))


def rule_cross_in_envelope(n: int, k: int, l: int) -> HExpr:
    """Extremal function of the (n,k)-cross inside the (n,l) envelope, any ``k < l``.

    ``max{0, max_T (sum_T h - k)/(min(|T|, l) - k)}`` over subsets ``T`` with
    ``|T| > k``.  Coincides with :func:`rule_env_in_env` when ``l = k + 1``.
    """
    if not 1 <= k < l <= n:
        raise SizeError(f"need 1 <= k < l <= n, got n={n}, k={k}, l={l}")
    terms = [const(0)]
    for size in range(k + 1, n + 1):
        w = min(size, l) - k
        for T in itertools.combinations(range(1, n + 1), size):
            if size > l and w == l - k and size < n:
                continue  # dominated by the full sum with the same weight
            terms.append(scale(Fraction(1, w), hsum(*(var(j) for j in T), const(-k))))
    return hmax(*terms)


def rule_claim_q6(a_slot: int, d_slot: int) -> HExpr:
    """``A_a x D_d`` inside the two-fold classical cross envelope: just ``h_a``."""
    if a_slot == d_slot:
        raise ValueError("slots must differ")
    return var(a_slot)


def rule_claim_q7(a_slots: Sequence[int] = (1, 2), d_slot: int = 3) -> HExpr:
    """``A x A x D`` inside the (3,2) envelope: ``max{h_a, h_b, h_a+h_b+h_d-1}``."""
    a, b = a_slots
    return hmax(var(a), var(b), hsum(var(a), var(b), var(d_slot), const(-1)))


@dataclass(frozen=True)
class IdentityRule:
    rule_id: str
    set_pattern: str
    domain_pattern: str
    formula: str
    origin: str  # "tabulated" or "derived, oracle-verified"


RULES = (
    IdentityRule("nk_envelope", "(n,k)-cross", "D_1 x ... x D_n",
                 "sum(h)/k", "tabulated"),
    IdentityRule("prop_center", "A_1 x ... x A_n", "(n,k) envelope",
                 "max{sum(h)/k, max h_j}", "tabulated"),
    IdentityRule("prop_center_lifted", "prod A x prod D (p D-factors)", "(n,k) envelope",
                 "max{max_a h_a, (sum(h)-p)/(k-p) if p<k}", "derived, oracle-verified"),
    IdentityRule("claim_q6", "A_a x D_d", "two-fold classical cross envelope",
                 "h_a", "tabulated"),
    IdentityRule("claim_q7", "A x A x D", "(3,2) envelope",
                 "max{h_a, h_b, h_a+h_b+h_d-1}", "tabulated"),
    IdentityRule("env_in_env", "(n,k)-cross", "(n,l) envelope",
                 "max{0, (sum(h)-k)/(l-k)}; exact only for l=k+1", "tabulated"),
    IdentityRule("cross_in_envelope", "(n,k)-cross", "(n,l) envelope",
                 "max{0, max_T (sum_T h - k)/(min(|T|,l)-k)}", "derived, oracle-verified"),
    IdentityRule("self_envelope", "cross Q", "envelope of Q", "0", "derived, oracle-verified"),
    IdentityRule("max_lifting", "S x A_j or S x D_j", "G x D_j",
                 "max{u, h_j} or u", "tabulated"),
    IdentityRule("product", "S_1 x S_2", "G_1 x G_2", "max{u_1, u_2}", "tabulated"),
    IdentityRule("convex_dual", "any union of boxes", "any closed envelope",
                 "max over vertices of the dual affine-minorant polyhedron",
                 "derived, oracle-verified"),
)
RULES_BY_ID = {r.rule_id: r for r in RULES}


# --- descriptions ----------------------------------------------------------

@dataclass(frozen=True)
class Closed:
    """``{h in [0,1)^n : expr(h) < 1}``."""
    n: int
    expr: HExpr
    rules: tuple[str, ...] = field(default=(), compare=False)
    note: str = field(default="", compare=False)


@dataclass(frozen=True)
class Product:
    """Child envelope over ``slots`` times full factors ``D_k``, ``k in full_factors``."""
    n: int
    full_factors: frozenset
    slots: tuple[int, ...]
    child: "EnvelopeDescription"


@dataclass(frozen=True)
class TwoFold:
    """Two-fold cross ``(A_m x env(Q')) u (D_m x Q'')`` whose inner function did not close."""
    n: int
    pivot: int
    slots: tuple[int, ...]
    inner_cross: CrossMatrix
    inner_env: "EnvelopeDescription"
    second_cross: tuple[Row, ...]
    closed_inner: HExpr | None = None


EnvelopeDescription = Closed | Product | TwoFold


def flatten(d: EnvelopeDescription) -> HExpr | None:
    """Single expression for the description, or None if a node is structural."""
    if isinstance(d, Closed):
        return d.expr
    if isinstance(d, Product):
        inner = flatten(d.child)
        if inner is None:
            return None
        return rename(inner, {i + 1: s for i, s in enumerate(d.slots)})
    inner_env = flatten(d.inner_env)
    if d.closed_inner is None or inner_env is None:
        return None
    mapping = {i + 1: s for i, s in enumerate(d.slots)}
    first = hsum(var(d.pivot), rename(d.closed_inner, mapping))
    return hmax(first, rename(inner_env, mapping))


def as_closed(d: EnvelopeDescription) -> Closed | None:
    if isinstance(d, Closed):
        return d
    e = flatten(d)
    return None if e is None else Closed(d.n, e, rules=_rules_of(d))


def _rules_of(d) -> tuple[str, ...]:
    if isinstance(d, Closed):
        return d.rules
    if isinstance(d, Product):
        return _rules_of(d.child)
    return _rules_of(d.inner_env)


def describe(d: EnvelopeDescription, indent: int = 0) -> str:
    """Indented tree rendering; closed leaves print their expression."""
    from .hexpr import to_text
    pad = "  " * indent
    if isinstance(d, Closed):
        return f"{pad}closed {to_text(d.expr)}"
    if isinstance(d, Product):
        full = ",".join(str(k) for k in sorted(d.full_factors))
        return f"{pad}product with full factors {{{full}}} over slots {d.slots}\n" + describe(d.child, indent + 1)
    inner = to_text(d.closed_inner) if d.closed_inner is not None else "open"
    return (f"{pad}two-fold pivot h{d.pivot} over slots {d.slots}, inner {inner}\n"
            + describe(d.inner_env, indent + 1))


# --- polyhedral helpers ----------------------------------------------------

def _box_rows(n):
    A, b = [], []
    for j in range(n):
        lo = [0] * n
        lo[j] = -1
        hi = [0] * n
        hi[j] = 1
        A += [lo, hi]
        b += [0, 1]
    return A, b


def _dense(piece: Affine, n: int):
    coeffs, k = piece
    row = [Fraction(0)] * n
    for j, c in coeffs:
        row[j - 1] = c
    return row, k


def _polytope_vertices(pieces: Sequence[Affine], n: int):
    """Vertices of ``{h in [0,1]^n : piece(h) <= 1 for every piece}``."""
    A, b = _box_rows(n)
    for p in pieces:
        row, k = _dense(p, n)
        A.append(row)
        b.append(1 - k)
    return vertices(A, b)


def _value(piece: Affine, h) -> Fraction:
    coeffs, k = piece
    return k + sum(c * h[j - 1] for j, c in coeffs)


def _dominated_on_cube(p: Affine, q: Affine, n: int) -> bool:
    """``p <= q`` everywhere on ``[0,1]^n``."""
    dp, kp = _dense(p, n)
    dq, kq = _dense(q, n)
    return kp - kq + sum(max(Fraction(0), a - c) for a, c in zip(dp, dq)) <= 0


def _prune_function(pieces: Iterable[Affine], n: int) -> list[Affine]:
    """Drop pieces dominated on the cube by a single other piece.

    Distinct affine functions cannot dominate each other both ways on the
    cube, so the survivor of each comparison is well defined.
    """
    uniq = sorted(set(pieces))
    return [p for p in uniq
            if not any(q != p and _dominated_on_cube(p, q, n) for q in uniq)]


def simplify_set(e: HExpr, n: int) -> HExpr:
    """Irredundant max-of-affine expression with the same sub-level set on ``[0,1)^n``."""
    pieces = []
    for p in affine_pieces(e):
        coeffs, k = p
        if not coeffs and k < 1:
            continue  # constant piece below 1 never excludes a point
        pieces.append(p)
    if not pieces:
        return Const(Fraction(0))
    pieces = _prune_function(pieces, n)
    changed = True
    while changed and len(pieces) > 1:
        changed = False
        for p in sorted(pieces, key=lambda q: (-len(q[0]), q)):
            others = [q for q in pieces if q != p]
            if all(_value(p, v) <= 1 for v in _polytope_vertices(others, n)):
                pieces = others
                changed = True
                break
    return max_of_affine(sorted(pieces))


def _set_redundant(dom: HExpr, main: HExpr, n: int) -> bool:
    """True when ``{main < 1}`` already lies inside ``{dom < 1}`` on ``[0,1)^n``."""
    dom_pieces = [p for p in affine_pieces(dom) if p[0] or p[1] >= 1]
    if not dom_pieces:
        return True
    verts = _polytope_vertices(affine_pieces(main), n)
    return all(_value(p, v) <= 1 for p in dom_pieces for v in verts)


# --- the dual linear program -----------------------------------------------

def extremal_dual(s_rows: Sequence[Row], domain: HExpr, n: int) -> HExpr:
    """Exact extremal function of the boxes ``s_rows`` inside ``{domain < 1}``.

    Each row ``beta`` stands for the box with ``h_j = 0`` where ``beta_j = 0``
    and ``h_j in [0,1)`` otherwise.  Returns ``max(c.h + c0)`` over the
    vertices of ``{c >= 0 : c.beta + c0 <= 0, c.w + c0 <= 1}`` where ``w``
    runs over the Pareto-maximal vertices of the closed domain.
    """
    if not s_rows:
        raise DegenerateSetError("empty set")
    tops = pareto_maximal(_polytope_vertices(affine_pieces(domain), n))
    A, b = [], []
    for j in range(n):
        row = [0] * (n + 1)
        row[j] = -1
        A.append(row)
        b.append(0)
    for beta in s_rows:
        A.append(list(beta) + [1])
        b.append(0)
    for w in tops:
        A.append(list(w) + [1])
        b.append(1)
    pieces = []
    for v in vertices(A, b):
        coeffs = tuple((j + 1, c) for j, c in enumerate(v[:n]) if c)
        pieces.append((coeffs, v[n]))
    pieces = _prune_function(pieces, n)
    return max_of_affine(pieces)


# --- closing the inner function --------------------------------------------

def _nk_level(m: CrossMatrix) -> int | None:
    """``k`` when ``m`` is the (n,k)-cross or the full product (``k = n``)."""
    c = classify(m)
    if c.kind == "FullProduct":
        return m.n_factors
    if c.kind in ("NKCross", "ClassicalCross"):
        return c.k
    return None


def _project(rows: Iterable[Row], cols: Sequence[int]) -> tuple[Row, ...]:
    return tuple(sorted({tuple(r[c] for c in cols) for r in rows}))


def _factors_over(rows: tuple[Row, ...], block: Sequence[int], rest: Sequence[int]) -> bool:
    pb, pr = _project(rows, block), _project(rows, rest)
    return len(pb) * len(pr) == len(set(rows))  # projections multiply iff product


def _product_blocks(row_sets: Sequence[tuple[Row, ...]], n: int) -> list[tuple[int, ...]]:
    """Finest column partition over which every row set is a Cartesian product."""
    cols = range(n)
    sides = []
    for size in range(1, n):
        for block in itertools.combinations(cols, size):
            rest = [c for c in cols if c not in block]
            if all(_factors_over(rs, block, rest) for rs in row_sets):
                sides.append(frozenset(block))
    blocks = []
    seen = set()
    for j in cols:
        if j in seen:
            continue
        atom = frozenset(cols)
        for s in sides:
            atom = atom & (s if j in s else frozenset(cols) - s)
        blocks.append(tuple(sorted(atom)))
        seen |= atom
    return blocks


def close_inner(q2_rows: Iterable[Row], q1: CrossMatrix, q1_env: HExpr | None,
                rules: str = "exact") -> tuple[HExpr, tuple[str, ...]] | None:
    """Extremal function of the ``Q''`` boxes inside the envelope of ``q1``.

    Returns ``(expr, rule ids)`` or None when ``rules="tabulated"`` and no
    listed formula applies.
    """
    if rules not in RULE_SETS:
        raise ValueError(f"rules must be one of {RULE_SETS}")
    n = q1.n_factors
    q2 = reduce_rows(q2_rows)
    if not q2:
        raise DegenerateSetError("empty set")
    ones = tuple([1] * n)
    if ones in q2:
        return const(0), ("self_envelope",)
    if set(q2) == set(q1.rows):
        return const(0), ("self_envelope",)

    blocks = _product_blocks([q2, q1.rows], n)
    if len(blocks) > 1:
        parts, used = [], []
        for block in blocks:
            sub1 = CrossMatrix.of(_project(q1.rows, block))
            sub2 = _project(q2, block)
            sub_env = flatten(_build(sub1, None, rules))
            got = close_inner(sub2, sub1, sub_env, rules)
            if got is None:
                return None
            expr, ids = got
            parts.append(rename(expr, {i + 1: c + 1 for i, c in enumerate(block)}))
            used += ids
        tag = "max_lifting" if any(len(b) == 1 for b in blocks) else "product"
        # extremal functions are >= 0, so a zero part adds nothing
        parts = [q for q in parts if q != const(0)] or [const(0)]
        return hmax(*parts), (tag, *used)

    level = _nk_level(q1)
    if level is not None and len(q2) == 1:
        beta = q2[0]
        a = [j + 1 for j in range(n) if beta[j] == 0]
        d = [j + 1 for j in range(n) if beta[j] == 1]
        if len(d) <= level:
            if (n, level, len(a), len(d)) == (2, 1, 1, 1):
                return rule_claim_q6(a[0], d[0]), ("claim_q6",)
            if (n, level, len(a), len(d)) == (3, 2, 2, 1):
                return rule_claim_q7(a, d[0]), ("claim_q7",)
            tag = "prop_center" if not d else "prop_center_lifted"
            return rule_prop_center(a, d, level), (tag,)

    if level is not None:
        c2 = classify(CrossMatrix.of(q2))
        if c2.kind in ("NKCross", "ClassicalCross") and c2.k < level:
            k = c2.k
            if level == k + 1 or rules == "tabulated":
                return rule_env_in_env(n, k, level), ("env_in_env",)
            return rule_cross_in_envelope(n, k, level), ("cross_in_envelope",)

    if rules == "exact" and q1_env is not None:
        return extremal_dual(q2, q1_env, n), ("convex_dual",)
    return None


# --- the recursive builder -------------------------------------------------

def _check_input(m: CrossMatrix):
    if not m.is_reduced():
        raise PreconditionError("matrix must be reduced (rows form an antichain)")
    if not covers_x_n1(m):
        empty = [j + 1 for j in range(m.n_factors) if all(r[j] == 0 for r in m.rows)]
        raise PathologicalCrossError(
            f"column(s) {empty} carry no 1, so the cross misses the classical "
            f"{m.n_factors}-fold cross and no envelope exists")


def _drop(row: Row, j: int) -> Row:
    return row[:j] + row[j + 1:]


def pivot_parts(m: CrossMatrix, pivot: int) -> tuple[CrossMatrix, tuple[Row, ...]]:
    """``(Q', Q'')`` for a 1-based pivot column; ``Q''`` may contain the zero row."""
    j = pivot - 1
    q1 = CrossMatrix.of(reduce_rows(_drop(r, j) for r in m.rows))
    q2 = reduce_rows(_drop(r, j) for r in m.rows if r[j] == 1)
    return q1, q2


def _assemble(n: int, pivot: int, inner: HExpr, env1: HExpr, simplify: bool) -> HExpr:
    slots = [j for j in range(1, n + 1) if j != pivot]
    mapping = {i + 1: s for i, s in enumerate(slots)}
    main = hsum(var(pivot), rename(inner, mapping))
    dom = rename(env1, mapping)
    if simplify:
        return simplify_set(hmax(main, dom), n)
    if _set_redundant(dom, main, n):
        return main
    return hmax(main, dom)


def _try_pivot(m: CrossMatrix, pivot: int, rules: str):
    n = m.n_factors
    q1, q2 = pivot_parts(m, pivot)
    env1_desc = _build(q1, None, rules)
    env1 = flatten(env1_desc)
    got = close_inner(q2, q1, env1, rules)
    return q1, q2, env1_desc, env1, got


@functools.lru_cache(maxsize=4096)
def _build(m: CrossMatrix, pivot: int | None, rules: str) -> EnvelopeDescription:
    n = m.n_factors
    cls = classify(m)
    if cls.kind == "FullProduct":
        return Closed(n, const(0), rules=("full_product",))
    full = full_columns(m)
    if full:
        slots = tuple(j for j in range(1, n + 1) if j not in full)
        child_m = CrossMatrix.of(_project(m.rows, [s - 1 for s in slots]))
        child_pivot = None
        if pivot is not None and pivot in slots:
            child_pivot = slots.index(pivot) + 1
        child = _build(child_m, child_pivot, rules)
        node = Product(n, frozenset(full), slots, child)
        closed = as_closed(node)
        return closed if closed is not None else node
    if cls.is_nk:
        return Closed(n, nk_envelope(n, cls.k), rules=("nk_envelope",))

    candidates = [pivot] if pivot is not None else list(range(1, n + 1))
    first = None
    for p in candidates:
        q1, q2, env1_desc, env1, got = _try_pivot(m, p, rules)
        if first is None:
            first = (p, q1, q2, env1_desc)
        if got is None or env1 is None:
            continue
        inner, ids = got
        expr = _assemble(n, p, inner, env1, simplify="convex_dual" in ids)
        return Closed(n, expr, rules=(*ids, *_rules_of(env1_desc)), note=f"pivot h{p}")
    p, q1, q2, env1_desc = first
    slots = tuple(j for j in range(1, n + 1) if j != p)
    return TwoFold(n, p, slots, q1, env1_desc, q2, None)


def build_envelope(m: CrossMatrix, pivot: int | None = None, rules: str = "exact",
                   certified: bool = True) -> EnvelopeDescription:
    """Envelope description of a reduced cross covering the classical N-fold cross.

    ``pivot`` forces the first pivot column (1-based); it must not be a
    column that is 1 in every row.  With ``certified`` the nine tabulated
    four-factor cases are matched up to column permutation and their
    tabulated expression is returned when it agrees with the recursion on
    the comparison lattice; on disagreement the recursive result is returned
    with a note naming the witness.
    """
    if rules not in RULE_SETS:
        raise ValueError(f"rules must be one of {RULE_SETS}")
    _check_input(m)
    if pivot is not None:
        if not 1 <= pivot <= m.n_factors:
            raise SizeError(f"pivot {pivot} out of range 1..{m.n_factors}")
        if pivot in full_columns(m):
            raise PreconditionError(f"pivot {pivot} is a column of ones")
    result = _build(m, pivot, rules)
    if not certified:
        return result
    hit = certified_lookup(m)
    if hit is None:
        return result
    name, expr = hit
    mine = flatten(result)
    if mine is None:
        return Closed(m.n_factors, expr, rules=("certified",), note=f"{name}, recursion open")
    from .checks import desc_equal
    cmp = desc_equal(Closed(m.n_factors, expr), Closed(m.n_factors, mine))
    if cmp.equal:
        return Closed(m.n_factors, expr, rules=("certified", *_rules_of(result)),
                      note=f"{name}, agrees with recursion")
    wit = ",".join(str(x) for x in cmp.witness)
    return Closed(m.n_factors, mine, rules=_rules_of(result),
                  note=f"{name}: tabulated formula disagrees with recursion at h=({wit})")


def closing_pivots(m: CrossMatrix, rules: str = "exact") -> dict[int, Closed]:
    """Closed description for every admissible pivot whose inner function closes."""
    _check_input(m)
    out = {}
    full = full_columns(m)
    for p in range(1, m.n_factors + 1):
        if p in full:
            continue
        d = as_closed(_build(m, p, rules))
        if d is not None:
            out[p] = d
    return out


# --- the nine four-factor cases --------------------------------------------

@dataclass(frozen=True)
class NineCase:
    name: str
    matrix: CrossMatrix
    expr: HExpr
    text: str


_NINE = (
    ("Q1", "0001 0110 1000", "sum(h1,h4,max(h2,h3))"),
    ("Q2", "0001 1010 1100", "sum(h4,max(h1,sum(h2,h3)))"),
    ("Q3", "0011 0101 0110 1001 1010", "sum(h1,h2,max(sum(h3,h4,-1),0))"),
    ("Q4", "0011 0110 1001 1100", "max(sum(h2,h4),sum(h1,h3))"),
    ("Q5", "0111 1001 1100", "sum(h1,max(h3,max(sum(h2,h4,-1),0)))"),
    ("Q6", "0011 1001 1100", "max(sum(h1,h3),sum(h2,h4),sum(h2,h3))"),
    ("Q7", "0011 0101 1001 1010", "sum(h2,max(h1,h3,sum(h1,h3,h4,-1)))"),
    ("Q8", "0001 0110 1010 1100", "sum(h4,max(scale(1/2,sum(h1,h2,h3)),h1,h2,h3))"),
    ("Q9", "0111 1001 1010 1100", "sum(h1,scale(1/2,sum(h2,h3,h4,-1)))"),
)


@functools.lru_cache(maxsize=1)
def nine_cases() -> tuple[NineCase, ...]:
    """The nine four-factor crosses with their tabulated envelope expressions."""
    return tuple(NineCase(name, parse_matrix(rows.replace(" ", "\n")), parse(text), text)
                 for name, rows, text in _NINE)


@functools.lru_cache(maxsize=1)
def _nine_index():
    return {canonical_form(c.matrix)[0]: c for c in nine_cases()}


def certified_lookup(m: CrossMatrix) -> tuple[str, HExpr] | None:
    """Tabulated expression for ``m`` if it is one of the nine up to column order."""
    if m.n_factors != 4:
        return None
    canon, perm = canonical_form(m)
    case = _nine_index().get(canon)
    if case is None:
        return None
    _, perm_case = canonical_form(case.matrix)
    # canonical column i is column perm_case[i] of the case and perm[i] of m
    mapping = {pc: pm for pc, pm in zip(perm_case, perm)}
    return case.name, rename(case.expr, mapping)
