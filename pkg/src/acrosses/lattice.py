"""Exact membership comparison of two sub-level sets on integer lattices.

A set ``{max_p (a_p . h + b_p) < 1}`` with rational ``a_p, b_p`` is turned
into integer half-spaces ``coef_p . i < rhs_p`` for ``h = i / L``.  The
kernels walk the lattice in C order and stop at the first disagreement, so
equal sets cost a full pass and unequal ones usually return early.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from numba import njit

from .hexpr import HExpr, affine_pieces

_LIMIT = 1 << 62


def halfspaces(e: HExpr, n: int, denom: int) -> tuple[np.ndarray, np.ndarray]:
    """Integer ``(coef, rhs)`` with ``e(i/denom) < 1`` iff ``coef @ i < rhs`` rowwise."""
    rows, rhs = [], []
    for coeffs, k in affine_pieces(e):
        d = k.denominator
        for _, c in coeffs:
            d = d * c.denominator // math.gcd(d, c.denominator)
        row = [0] * n
        for j, c in coeffs:
            row[j - 1] = int(c * d)
        rows.append(row)
        r = (1 - k) * d * denom
        rhs.append(int(r))
    coef = np.array(rows, dtype=np.int64).reshape(len(rows), n)
    bound = (np.abs(coef).sum(axis=1) * denom).max(initial=0)
    if bound >= _LIMIT or max((abs(v) for v in rhs), default=0) >= _LIMIT:
        raise OverflowError("lattice too fine for exact int64 comparison")
    return coef, np.array(rhs, dtype=np.int64)


@njit(cache=True)
def _inside(coef, rhs, idx):
    for p in range(coef.shape[0]):
        s = 0
        for j in range(idx.shape[0]):
            s += coef[p, j] * idx[j]
        if s >= rhs[p]:
            return False
    return True


@njit(cache=True)
def first_lattice_mismatch(c1, r1, c2, r2, n, side, subset=False):
    """Index vector of the first point of ``{0..side-1}^n`` where the sets differ, or -1s.

    With ``subset`` only points inside the first set and outside the second
    count as disagreements.
    """
    idx = np.zeros(n, dtype=np.int64)
    while True:
        a = _inside(c1, r1, idx)
        if subset:
            if a and not _inside(c2, r2, idx):
                return idx
        elif a != _inside(c2, r2, idx):
            return idx
        j = n - 1
        while j >= 0:
            idx[j] += 1
            if idx[j] < side:
                break
            idx[j] = 0
            j -= 1
        if j < 0:
            return np.full(n, -1, dtype=np.int64)


@njit(cache=True)
def first_point_mismatch(c1, r1, c2, r2, pts):
    """Row of ``pts`` where the sets first differ, or -1."""
    for t in range(pts.shape[0]):
        if _inside(c1, r1, pts[t]) != _inside(c2, r2, pts[t]):
            return t
    return -1


@njit(cache=True)
def count_lattice_inside(c, r, n, side):
    idx = np.zeros(n, dtype=np.int64)
    total = 0
    while True:
        if _inside(c, r, idx):
            total += 1
        j = n - 1
        while j >= 0:
            idx[j] += 1
            if idx[j] < side:
                break
            idx[j] = 0
            j -= 1
        if j < 0:
            return total


def lattice_side(step: Fraction) -> int:
    step = Fraction(step)
    if step <= 0 or step.numerator != 1:
        raise ValueError("lattice step must be 1/L for a positive integer L")
    return step.denominator
