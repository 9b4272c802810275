"""Exact piecewise-linear expressions over the values h1, ..., hN.

An envelope description is the sub-level set ``{h in [0,1)^N : e(h) < 1}``
of such an expression.  Nodes are immutable; coefficients are
:class:`fractions.Fraction` so evaluation is exact.  Scale factors are
nonnegative, which keeps every expression convex and nondecreasing in each
variable as long as it is built from these nodes.

Text form (prefix, no spaces)::

    max(sum(h1,h3),sum(h2,h4))
    sum(h1,scale(1/2,sum(h2,h3,h4,-1)))
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import DimensionError, DomainError

__all__ = [
    "Var", "Const", "Scale", "Sum", "Max", "HExpr",
    "var", "const", "scale", "hsum", "hmax",
    "evaluate", "evaluate_array", "lattice_values",
    "to_text", "parse", "variables", "rename",
    "affine_pieces", "affine_expr", "max_of_affine",
]


def _frac(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, float):
        raise TypeError("use Fraction or int for exact coefficients, not float")
    return Fraction(q)


@dataclass(frozen=True)
class Var:
    index: int

    def __post_init__(self):
        if not isinstance(self.index, int) or self.index < 1:
            raise ValueError(f"variable index must be a positive int, got {self.index!r}")

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", _frac(self.value))

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Scale:
    factor: Fraction
    child: "HExpr"

    def __post_init__(self):
        object.__setattr__(self, "factor", _frac(self.factor))
        if self.factor < 0:
            raise ValueError("scale factors must be nonnegative")

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Sum:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 1:
            raise ValueError("sum needs at least one term")

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Max:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ValueError("max needs at least two terms")

    def __str__(self):
        return to_text(self)


HExpr = Union[Var, Const, Scale, Sum, Max]


# --- builders --------------------------------------------------------------

def var(j: int) -> Var:
    return Var(j)


def const(q) -> Const:
    return Const(_frac(q))


def _lift(e) -> HExpr:
    if isinstance(e, (Var, Const, Scale, Sum, Max)):
        return e
    return const(e)


def scale(q, e) -> HExpr:
    q = _frac(q)
    return _lift(e) if q == 1 else Scale(q, _lift(e))


def hsum(*terms) -> HExpr:
    """Sum with nested sums flattened; a single term is returned as is."""
    flat = []
    for t in terms:
        t = _lift(t)
        flat.extend(t.children if isinstance(t, Sum) else (t,))
    return flat[0] if len(flat) == 1 else Sum(tuple(flat))


def hmax(*terms) -> HExpr:
    """Max with nested maxima flattened and exact duplicates removed."""
    flat = []
    for t in terms:
        t = _lift(t)
        for c in (t.children if isinstance(t, Max) else (t,)):
            if c not in flat:
                flat.append(c)
    return flat[0] if len(flat) == 1 else Max(tuple(flat))


# --- evaluation ------------------------------------------------------------

def _check_dim(e: HExpr, n: int):
    top = max(variables(e), default=0)
    if top > n:
        raise DimensionError(f"expression uses h{top} but only {n} values were given")


def evaluate(e: HExpr, h: Sequence) -> Fraction:
    """Exact value at ``h``; every component must lie in [0, 1]."""
    vals = [_frac(x) for x in h]
    for j, x in enumerate(vals, 1):
        if not 0 <= x <= 1:
            raise DomainError(f"h{j} = {x} is outside [0, 1]")
    _check_dim(e, len(vals))
    return _eval_exact(e, vals)


def _eval_exact(e, vals):
    if isinstance(e, Var):
        return vals[e.index - 1]
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Scale):
        return e.factor * _eval_exact(e.child, vals)
    if isinstance(e, Sum):
        return sum((_eval_exact(c, vals) for c in e.children), Fraction(0))
    return max(_eval_exact(c, vals) for c in e.children)


def evaluate_array(e: HExpr, hs: Sequence[np.ndarray]) -> np.ndarray:
    """Floating-point evaluation on broadcastable arrays (one per variable)."""
    _check_dim(e, len(hs))
    out = _eval_float(e, hs)
    return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast_shapes(*(np.shape(x) for x in hs))).copy()


def _eval_float(e, hs):
    if isinstance(e, Var):
        return np.asarray(hs[e.index - 1], dtype=float)
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Scale):
        return float(e.factor) * _eval_float(e.child, hs)
    if isinstance(e, Sum):
        acc = 0.0
        for c in e.children:
            acc = acc + _eval_float(c, hs)
        return acc
    acc = _eval_float(e.children[0], hs)
    for c in e.children[1:]:
        acc = np.maximum(acc, _eval_float(c, hs))
    return acc


def lattice_values(e: HExpr, coords: Sequence[np.ndarray], denom: int):
    """Exact values at ``h_j = coords[j] / denom`` as an integer fraction.

    ``coords`` are broadcastable int64 arrays.  Returns ``(num, den)`` with
    ``num`` an int64 array and ``den`` a positive int, so ``e(h) < 1`` is
    ``num < den``.  Denominators stay small for the expressions built here;
    an overflow guard raises rather than silently wrapping.
    """
    _check_dim(e, len(coords))
    num, den = _eval_int(e, coords, denom)
    return np.asarray(num, dtype=np.int64), den


_INT_LIMIT = 1 << 60


def _rescale(num, den, target):
    f = target // den
    if f != 1:
        if target > _INT_LIMIT:
            raise OverflowError("lattice denominator too large for int64 evaluation")
        num = num * f
    return num


def _eval_int(e, coords, L):
    if isinstance(e, Var):
        return np.asarray(coords[e.index - 1], dtype=np.int64), L
    if isinstance(e, Const):
        return np.int64(e.value.numerator), e.value.denominator
    if isinstance(e, Scale):
        num, den = _eval_int(e.child, coords, L)
        return num * e.factor.numerator, den * e.factor.denominator
    parts = [_eval_int(c, coords, L) for c in e.children]
    den = 1
    for _, d in parts:
        den = den * d // math.gcd(den, d)
    if den > _INT_LIMIT // (1 << 12):
        raise OverflowError("lattice denominator too large for int64 evaluation")
    scaled = [_rescale(n, d, den) for n, d in parts]
    if isinstance(e, Sum):
        acc = scaled[0]
        for s in scaled[1:]:
            acc = acc + s
        return acc, den
    acc = scaled[0]
    for s in scaled[1:]:
        acc = np.maximum(acc, s)
    return acc, den


# --- structure -------------------------------------------------------------

def variables(e: HExpr) -> set[int]:
    if isinstance(e, Var):
        return {e.index}
    if isinstance(e, Const):
        return set()
    if isinstance(e, Scale):
        return variables(e.child)
    out = set()
    for c in e.children:
        out |= variables(c)
    return out


def rename(e: HExpr, mapping: Mapping[int, int]) -> HExpr:
    """Substitute variable indices; indices missing from ``mapping`` are kept."""
    if isinstance(e, Var):
        return Var(mapping.get(e.index, e.index))
    if isinstance(e, Const):
        return e
    if isinstance(e, Scale):
        return Scale(e.factor, rename(e.child, mapping))
    kids = tuple(rename(c, mapping) for c in e.children)
    return Sum(kids) if isinstance(e, Sum) else Max(kids)


Affine = tuple[tuple[tuple[int, Fraction], ...], Fraction]


def affine_pieces(e: HExpr) -> list[Affine]:
    """Write ``e`` as a max of affine functions.

    Each piece is ``(coeffs, const)`` with ``coeffs`` a sorted tuple of
    ``(index, coefficient)`` pairs with nonzero coefficients.  Sums of maxima
    are distributed, so the piece count is the product of branch counts.
    """
    return [(tuple(sorted((j, c) for j, c in d.items() if c)), k) for d, k in _pieces(e)]


def _pieces(e):
    if isinstance(e, Var):
        return [({e.index: Fraction(1)}, Fraction(0))]
    if isinstance(e, Const):
        return [({}, e.value)]
    if isinstance(e, Scale):
        q = e.factor
        return [({j: q * c for j, c in d.items()}, q * k) for d, k in _pieces(e.child)]
    if isinstance(e, Max):
        out = []
        for c in e.children:
            for p in _pieces(c):
                if p not in out:
                    out.append(p)
        return out
    acc = [({}, Fraction(0))]
    for c in e.children:
        nxt = []
        for d1, k1 in acc:
            for d2, k2 in _pieces(c):
                d = dict(d1)
                for j, v in d2.items():
                    d[j] = d.get(j, Fraction(0)) + v
                p = (d, k1 + k2)
                if p not in nxt:
                    nxt.append(p)
        acc = nxt
    return acc


def affine_expr(coeffs: Mapping[int, Fraction] | Iterable[tuple[int, Fraction]], constant=0) -> HExpr:
    """Expression for ``sum_j c_j h_j + constant`` with all ``c_j >= 0``.

    A common denominator is pulled out front, so ``(h2+h3+h4-1)/2`` prints
    as ``scale(1/2,sum(h2,h3,h4,-1))``.
    """
    items = sorted((j, _frac(c)) for j, c in dict(coeffs).items() if c)
    constant = _frac(constant)
    if any(c < 0 for _, c in items):
        raise ValueError("affine pieces must have nonnegative coefficients")
    if not items:
        return Const(constant)
    d = 1
    for q in [c for _, c in items] + [constant]:
        d = d * q.denominator // math.gcd(d, q.denominator)
    g = 0
    for q in [c for _, c in items] + [constant]:
        g = math.gcd(g, (q * d).numerator)
    unit = Fraction(g, d)
    terms = []
    for j, c in items:
        m = c / unit
        terms.append(Var(j) if m == 1 else Scale(m, Var(j)))
    if constant:
        terms.append(Const(constant / unit))
    return scale(unit, hsum(*terms))


def max_of_affine(pieces: Iterable[Affine]) -> HExpr:
    return hmax(*(affine_expr(dict(c), k) for c, k in pieces))


# --- text form -------------------------------------------------------------

def to_text(e: HExpr) -> str:
    if isinstance(e, Var):
        return f"h{e.index}"
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Scale):
        return f"scale({e.factor},{to_text(e.child)})"
    name = "sum" if isinstance(e, Sum) else "max"
    return f"{name}({','.join(to_text(c) for c in e.children)})"


_TOKEN = re.compile(r"\s*(?:(h\d+)|(-?\d+(?:/\d+)?)|(sum|max|scale)|([(),]))")


def parse(text: str) -> HExpr:
    """Inverse of :func:`to_text`; whitespace is ignored."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"unexpected input at {pos}: {text[pos:pos + 12]!r}")
        tokens.append(next(g for g in m.groups() if g is not None))
        pos = m.end()
    expr, i = _parse_at(tokens, 0)
    if i != len(tokens):
        raise ValueError(f"trailing tokens: {''.join(tokens[i:])!r}")
    return expr


def _expect(tokens, i, tok):
    if i >= len(tokens) or tokens[i] != tok:
        raise ValueError(f"expected {tok!r} at token {i}")
    return i + 1


def _parse_at(tokens, i):
    if i >= len(tokens):
        raise ValueError("unexpected end of expression")
    t = tokens[i]
    if t.startswith("h"):
        return Var(int(t[1:])), i + 1
    if t in ("sum", "max"):
        i = _expect(tokens, i + 1, "(")
        kids = []
        while True:
            k, i = _parse_at(tokens, i)
            kids.append(k)
            if i < len(tokens) and tokens[i] == ",":
                i += 1
                continue
            i = _expect(tokens, i, ")")
            break
        return (Sum(tuple(kids)) if t == "sum" else Max(tuple(kids))), i
    if t == "scale":
        i = _expect(tokens, i + 1, "(")
        q = tokens[i]
        if not re.fullmatch(r"-?\d+(?:/\d+)?", q):
            raise ValueError(f"scale factor must be a rational, got {q!r}")
        i = _expect(tokens, i + 1, ",")
        k, i = _parse_at(tokens, i)
        i = _expect(tokens, i, ")")
        return Scale(Fraction(q), k), i
    if re.fullmatch(r"-?\d+(?:/\d+)?", t):
        return Const(Fraction(t)), i + 1
    raise ValueError(f"unexpected token {t!r}")
