"""Exact combinatorics of A-cross defining matrices.

A defining matrix is a set of 0/1 rows of common length N.  Row ``alpha``
stands for the branch whose j-th factor is D_j when ``alpha[j] == 1`` and
A_j when ``alpha[j] == 0``.  Everything here is pure and works on small
tuples of ints; factor indices in the public API are 1-based, matching the
variable names ``h1 ... hN`` used by the expression layer.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

from .errors import DimensionError, PreconditionError, SizeError

Row = tuple[int, ...]

MAX_ENUMERATION_N = 5


class Ordering(enum.IntEnum):
    LT = -1
    EQ = 0
    GT = 1


class FactorSplit(NamedTuple):
    """1-based positions carrying D (``d_slots``) and A (``a_slots``)."""

    d_slots: tuple[int, ...]
    a_slots: tuple[int, ...]


def as_row(bits) -> Row:
    """Coerce ``"0110"``, ``[0, 1, 1, 0]`` or a tuple into a row tuple."""
    if isinstance(bits, str):
        bits = bits.strip()
        if not bits or any(c not in "01" for c in bits):
            raise ValueError(f"not a 0/1 row: {bits!r}")
        return tuple(int(c) for c in bits)
    row = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in row):
        raise ValueError(f"not a 0/1 row: {bits!r}")
    return row


def check_index(bits) -> Row:
    """Validate a binary index: length >= 2 and at least one 1."""
    row = as_row(bits)
    if len(row) < 2:
        raise DimensionError(f"binary index needs N >= 2, got length {len(row)}")
    if not any(row):
        raise ValueError("binary index must contain at least one 1")
    return row


def row_text(row: Sequence[int]) -> str:
    return "".join(str(b) for b in row)


def _same_length(a: Sequence[int], b: Sequence[int]) -> None:
    if len(a) != len(b):
        raise DimensionError(f"length mismatch: {len(a)} vs {len(b)}")


def lex_compare(a, b) -> Ordering:
    a, b = as_row(a), as_row(b)
    _same_length(a, b)
    if a == b:
        return Ordering.EQ
    return Ordering.LT if a < b else Ordering.GT


def dominates(a, b) -> bool:
    """True iff ``a <= b`` componentwise, i.e. branch ``a`` lies inside branch ``b``."""
    a, b = as_row(a), as_row(b)
    _same_length(a, b)
    return all(x <= y for x, y in zip(a, b))


def split(bits) -> FactorSplit:
    row = as_row(bits)
    return FactorSplit(
        d_slots=tuple(j + 1 for j, b in enumerate(row) if b),
        a_slots=tuple(j + 1 for j, b in enumerate(row) if not b),
    )


def reduce_rows(rows: Iterable[Row]) -> tuple[Row, ...]:
    """Drop duplicates and every row dominated by a different row; sorted output.

    Works on raw tuples and tolerates the all-zero row, which appears for
    inner sets such as A_1 x ... x A_n.
    """
    uniq = sorted(set(rows))
    keep = []
    for r in uniq:
        if not any(r != s and all(x <= y for x, y in zip(r, s)) for s in uniq):
            keep.append(r)
    return tuple(keep)


@dataclass(frozen=True)
class CrossMatrix:
    """Sorted, duplicate-free set of nonzero 0/1 rows of a common length.

    One-column matrices are allowed because the envelope recursion produces
    them; user-facing parsing still requires at least two factors.
    """

    n_factors: int
    rows: tuple[Row, ...]

    def __post_init__(self):
        if self.n_factors < 1:
            raise DimensionError(f"need at least one factor, got {self.n_factors}")
        if not self.rows:
            raise ValueError("a defining matrix needs at least one row")
        for r in self.rows:
            if len(r) != self.n_factors:
                raise DimensionError(f"row {row_text(r)} has length {len(r)}, expected {self.n_factors}")
            if not any(r):
                raise ValueError("zero rows are not allowed in a defining matrix")
        if list(self.rows) != sorted(set(self.rows)):
            raise ValueError("rows must be distinct and lexicographically sorted; use CrossMatrix.of")

    @classmethod
    def of(cls, rows: Iterable) -> "CrossMatrix":
        """Build from strings or sequences; sorts and removes duplicates."""
        rows = [as_row(r) for r in rows]
        if not rows:
            raise ValueError("a defining matrix needs at least one row")
        return cls(len(rows[0]), tuple(sorted(set(rows))))

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __str__(self):
        return "\n".join(row_text(r) for r in self.rows)

    def text(self) -> str:
        return format_matrix(self)

    def is_reduced(self) -> bool:
        return reduce_rows(self.rows) == self.rows

    def permuted(self, perm: Sequence[int]) -> "CrossMatrix":
        """Column permutation: new column ``i`` is old column ``perm[i-1]`` (1-based)."""
        return CrossMatrix.of(permute_row(r, perm) for r in self.rows)


def permute_row(row: Row, perm: Sequence[int]) -> Row:
    if sorted(perm) != list(range(1, len(row) + 1)):
        raise DimensionError(f"{tuple(perm)} is not a permutation of 1..{len(row)}")
    return tuple(row[p - 1] for p in perm)


def reduce(m: CrossMatrix) -> CrossMatrix:
    return CrossMatrix(m.n_factors, reduce_rows(m.rows))


@dataclass(frozen=True)
class CrossClass:
    """Result of :func:`classify`.

    ``kind`` is the most specific label: ``FullProduct``, ``ClassicalCross``,
    ``NKCross``, ``TwoFoldGrouped`` or ``General``.  For every (N,k)-cross,
    including the two special cases, ``is_nk`` is set and ``k`` holds k.
    """

    kind: str
    k: int | None = None
    alpha: Row | None = None

    @property
    def split(self) -> FactorSplit | None:
        return None if self.alpha is None else split(self.alpha)

    @property
    def is_nk(self) -> bool:
        return self.k is not None

    @property
    def label(self) -> str:
        if self.kind == "NKCross":
            return f"NKCross({self.k})"
        if self.kind == "TwoFoldGrouped":
            return f"TwoFoldGrouped({row_text(self.alpha)})"
        return self.kind


@lru_cache(maxsize=None)
def nk_rows(n: int, k: int) -> tuple[Row, ...]:
    """All rows of length ``n`` with exactly ``k`` ones, sorted."""
    return tuple(sorted(r for r in itertools.product((0, 1), repeat=n) if sum(r) == k))


def classify(m: CrossMatrix) -> CrossClass:
    if not m.is_reduced():
        raise PreconditionError("classify expects a reduced matrix")
    n = m.n_factors
    weights = {sum(r) for r in m.rows}
    if len(weights) == 1:
        k = weights.pop()
        if m.rows == nk_rows(n, k):
            if k == n:
                return CrossClass("FullProduct", k)
            if k == 1:
                return CrossClass("ClassicalCross", k)
            return CrossClass("NKCross", k)
    if len(m.rows) == 2:
        a, b = m.rows
        if all(x != y for x, y in zip(a, b)):
            return CrossClass("TwoFoldGrouped", alpha=a)
    return CrossClass("General")


def covers_x_n1(m: CrossMatrix) -> bool:
    """True iff every column holds a 1 somewhere (the classical cross is contained)."""
    return all(any(r[j] for r in m.rows) for j in range(m.n_factors))


def full_columns(m: CrossMatrix) -> frozenset[int]:
    """1-based columns that are 1 in every row."""
    return frozenset(j + 1 for j in range(m.n_factors) if all(r[j] for r in m.rows))


def contains_point(m: CrossMatrix, in_a: Sequence[bool]) -> bool:
    """Membership of a point described by which coordinates lie in their A_j."""
    if len(in_a) != m.n_factors:
        raise DimensionError(f"{len(in_a)} flags for a matrix with {m.n_factors} columns")
    return any(all(bool(f) for b, f in zip(r, in_a) if not b) for r in m.rows)


# --- canonical forms -------------------------------------------------------

@lru_cache(maxsize=None)
def _perm_tables(n: int):
    """For each permutation, a lookup table mapping row bitmasks (column 1 = MSB)."""
    perms = list(itertools.permutations(range(n)))
    tables = []
    for p in perms:
        table = []
        for v in range(1 << n):
            bits = [(v >> (n - 1 - j)) & 1 for j in range(n)]
            w = 0
            for i in range(n):
                w = (w << 1) | bits[p[i]]
            table.append(w)
        tables.append(tuple(table))
    return perms, tables


def _mask(row: Row) -> int:
    v = 0
    for b in row:
        v = (v << 1) | b
    return v


def _unmask(v: int, n: int) -> Row:
    return tuple((v >> (n - 1 - j)) & 1 for j in range(n))


def _canonical_masks(masks: Sequence[int], n: int) -> tuple[tuple[int, ...], int]:
    perms, tables = _perm_tables(n)
    best, best_i = None, 0
    for i, t in enumerate(tables):
        key = tuple(sorted(t[v] for v in masks))
        if best is None or key < best:
            best, best_i = key, i
    return best, best_i


def canonical_form(m: CrossMatrix) -> tuple[CrossMatrix, tuple[int, ...]]:
    """Lexicographically least matrix in the column-permutation orbit of ``m``.

    Returns the canonical matrix and the 1-based permutation ``perm`` with
    ``m.permuted(perm) == canonical``.
    """
    n = m.n_factors
    key, i = _canonical_masks([_mask(r) for r in m.rows], n)
    perms, _ = _perm_tables(n)
    perm = tuple(p + 1 for p in perms[i])
    canon = CrossMatrix(n, tuple(_unmask(v, n) for v in key))
    return canon, perm


# --- enumeration -----------------------------------------------------------

class Filter(str, enum.Enum):
    ANTICHAIN = "ANTICHAIN"
    COLUMN_COVERED = "COLUMN_COVERED"
    NO_FULL_COLUMN = "NO_FULL_COLUMN"
    NOT_NK = "NOT_NK"
    NOT_TWOFOLD_GROUPED = "NOT_TWOFOLD_GROUPED"


def _antichains(n: int):
    """All nonempty antichains of nonzero masks, by backtracking."""
    elems = list(range(1, 1 << n))

    def incomparable(a, b):
        return (a & b) != a and (a & b) != b

    def rec(start, chosen):
        for i in range(start, len(elems)):
            v = elems[i]
            if all(incomparable(v, c) for c in chosen):
                chosen.append(v)
                yield tuple(chosen)
                yield from rec(i + 1, chosen)
                chosen.pop()

    yield from rec(0, [])


def _all_row_sets(n: int):
    elems = list(range(1, 1 << n))
    for size in range(1, len(elems) + 1):
        yield from itertools.combinations(elems, size)


def _passes(m: CrossMatrix, filters: frozenset) -> bool:
    if Filter.COLUMN_COVERED in filters and not covers_x_n1(m):
        return False
    if Filter.NO_FULL_COLUMN in filters and full_columns(m):
        return False
    if Filter.NOT_NK in filters or Filter.NOT_TWOFOLD_GROUPED in filters:
        # classify is only defined on reduced matrices; unreduced ones are
        # neither (N,k)-crosses nor grouped two-fold crosses as written.
        c = classify(m) if m.is_reduced() else CrossClass("General")
        if Filter.NOT_NK in filters and c.is_nk:
            return False
        if Filter.NOT_TWOFOLD_GROUPED in filters and c.kind == "TwoFoldGrouped":
            return False
    return True


def enumerate_crosses(n: int, filters: Iterable = ()) -> list[CrossMatrix]:
    """Canonical representatives of all matrices over {0,1}^n passing ``filters``.

    Without ``ANTICHAIN`` every nonempty set of nonzero rows is considered,
    which is only tractable up to n = 4.
    """
    filters = frozenset(Filter(f) for f in filters)
    if not 2 <= n <= MAX_ENUMERATION_N:
        raise SizeError(f"enumeration supports 2 <= n <= {MAX_ENUMERATION_N}, got {n}")
    if Filter.ANTICHAIN not in filters and n > 4:
        raise SizeError("n = 5 enumeration requires the ANTICHAIN filter")
    source = _antichains(n) if Filter.ANTICHAIN in filters else _all_row_sets(n)
    seen = set()
    out = []
    for masks in source:
        key, _ = _canonical_masks(masks, n)
        if key in seen:
            continue
        seen.add(key)
        m = CrossMatrix(n, tuple(_unmask(v, n) for v in key))
        if _passes(m, filters):
            out.append(m)
    out.sort(key=lambda m: (len(m.rows), m.rows))
    return out


# --- text format -----------------------------------------------------------

def parse_matrix(text: str) -> CrossMatrix:
    """Parse one row per line of '0'/'1'; blank lines and '#' comments are ignored."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append(as_row(line))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if not rows:
        raise ValueError("no rows found")
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise DimensionError(f"rows of unequal length: {sorted(lengths)}")
    return CrossMatrix.of(check_index(r) for r in rows)


def format_matrix(m: CrossMatrix) -> str:
    return "".join(row_text(r) + "\n" for r in m.rows)
