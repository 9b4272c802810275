"""Exact vertex enumeration for small rational polyhedra ``{x : A x <= b}``.

Every choice of ``n`` constraints is tried.  A batched floating-point solve
screens the candidate systems; each surviving vertex is then recomputed and
checked for feasibility in exact rational arithmetic, so the returned
vertices are exact.  Intended for dimensions up to about 6 and a few dozen
constraints.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

import numpy as np

_BATCH = 50_000


def _solve_exact(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    n = len(rows)
    m = [list(r) + [v] for r, v in zip(rows, rhs)]
    for col in range(n):
        piv = next((i for i in range(col, n) if m[i][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [v / p for v in m[col]]
        for i in range(n):
            if i != col and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * c for a, c in zip(m[i], m[col])]
    return tuple(m[i][n] for i in range(n))


def vertices(A: Sequence[Sequence], b: Sequence) -> list[tuple[Fraction, ...]]:
    """All vertices of ``{x : A x <= b}``, exact and sorted."""
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    m = len(A)
    if m == 0:
        return []
    n = len(A[0])
    Af = np.array([[float(v) for v in row] for row in A])
    bf = np.array([float(v) for v in b])
    scale = 1.0 + np.abs(Af).max() + np.abs(bf).max()

    candidates = {}
    combos = itertools.combinations(range(m), n)
    while True:
        chunk = list(itertools.islice(combos, _BATCH))
        if not chunk:
            break
        idx = np.array(chunk, dtype=np.intp)
        M = Af[idx]
        rhs = bf[idx]
        det = np.linalg.det(M)
        ok = np.abs(det) > 1e-10
        if not ok.any():
            continue
        idx, M, rhs = idx[ok], M[ok], rhs[ok]
        x = np.linalg.solve(M, rhs[..., None])[..., 0]
        feas = np.all(x @ Af.T <= bf + 1e-7 * scale, axis=1)
        for combo, pt in zip(idx[feas], x[feas]):
            key = tuple(np.round(pt, 7))
            candidates.setdefault(key, tuple(combo))

    out = set()
    for combo in candidates.values():
        x = _solve_exact([A[i] for i in combo], [b[i] for i in combo])
        if x is None:
            continue
        if all(sum(a * v for a, v in zip(row, x)) <= bi for row, bi in zip(A, b)):
            out.add(x)
    return sorted(out)


def pareto_maximal(points):
    """Points not dominated componentwise by a different point."""
    pts = sorted(set(tuple(p) for p in points))
    return [p for p in pts if not any(q != p and all(a <= c for a, c in zip(p, q)) for q in pts)]
