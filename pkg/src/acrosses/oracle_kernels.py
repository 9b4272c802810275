"""Numba kernels for the convex, nondecreasing obstacle problem on a box grid.

Arrays are flat (C order) with ``shape`` and ``strides`` in elements.  A
direction is an integer offset vector.  All kernels only ever lower values,
so starting from the obstacle they decrease monotonically toward the largest
admissible function.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _unravel(flat, shape, out):
    for k in range(shape.shape[0] - 1, -1, -1):
        out[k] = flat % shape[k]
        flat //= shape[k]


@njit(cache=True)
def _inside_box(idx, shape):
    for k in range(shape.shape[0]):
        if idx[k] < 0 or idx[k] >= shape[k]:
            return False
    return True


@njit(cache=True)
def _ravel(idx, strides):
    s = 0
    for k in range(idx.shape[0]):
        s += idx[k] * strides[k]
    return s


@njit(cache=True)
def _hull_segment(u, line, lo, hi, tb, tf, vb, vf, xs, vals, hull):
    """Lower convex envelope of ``u`` on ``line[lo:hi]``; return the largest decrease.

    ``tb``/``tf`` are distances (in steps) from the first/last point to the
    domain boundary behind/ahead, or NaN when the segment ends at the grid
    edge.  The boundary points enter the hull with values ``vb``/``vf``.
    """
    m = 0
    if not np.isnan(tb):
        xs[m] = -tb
        vals[m] = vb
        m += 1
    first = m
    for i in range(hi - lo):
        xs[m] = i
        vals[m] = u[line[lo + i]]
        m += 1
    last = m
    if not np.isnan(tf):
        xs[m] = hi - lo - 1 + tf
        vals[m] = vf
        m += 1
    top = 0
    for i in range(m):
        while top >= 2:
            a = hull[top - 2]
            b = hull[top - 1]
            # drop b when it lies on or above the chord from a to i
            if (vals[b] - vals[a]) * (xs[i] - xs[a]) >= (vals[i] - vals[a]) * (xs[b] - xs[a]):
                top -= 1
            else:
                break
        hull[top] = i
        top += 1
    change = 0.0
    for t in range(top - 1):
        a = hull[t]
        b = hull[t + 1]
        for i in range(max(a + 1, first), min(b, last)):
            w = (xs[i] - xs[a]) / (xs[b] - xs[a])
            v = vals[a] + w * (vals[b] - vals[a])
            if v < vals[i]:
                d = vals[i] - v
                if d > change:
                    change = d
                u[line[lo + i - first]] = v
    return change


@njit(cache=True)
def project_convex(u, mask, shape, strides, direction, theta_b, theta_f, val_b, val_f):
    """Lower convex envelope along every line with this direction, per masked segment.

    ``theta_b[x]``/``theta_f[x]`` give the boundary distance behind/ahead of
    point ``x`` along the direction (NaN where the neighbour is off the grid
    or still inside the domain); ``val_b``/``val_f`` the value anchored there.
    """
    n = shape.shape[0]
    total = u.shape[0]
    longest = 0
    for k in range(n):
        if shape[k] > longest:
            longest = shape[k]
    line = np.empty(longest, dtype=np.int64)
    hull = np.empty(longest + 2, dtype=np.int64)
    xs = np.empty(longest + 2, dtype=np.float64)
    vals = np.empty(longest + 2, dtype=np.float64)
    idx = np.empty(n, dtype=np.int64)
    prev = np.empty(n, dtype=np.int64)
    change = 0.0
    for flat in range(total):
        _unravel(flat, shape, idx)
        for k in range(n):
            prev[k] = idx[k] - direction[k]
        if _inside_box(prev, shape):
            continue
        length = 0
        while _inside_box(idx, shape):
            line[length] = _ravel(idx, strides)
            length += 1
            for k in range(n):
                idx[k] += direction[k]
        start = 0
        while start < length:
            while start < length and not mask[line[start]]:
                start += 1
            stop = start
            while stop < length and mask[line[stop]]:
                stop += 1
            if stop > start:
                tb = theta_b[line[start]]
                tf = theta_f[line[stop - 1]]
                span = stop - start + (0 if np.isnan(tb) else 1) + (0 if np.isnan(tf) else 1)
                if span >= 3:
                    c = _hull_segment(u, line, start, stop, tb, tf, val_b[line[start]],
                                      val_f[line[stop - 1]], xs, vals, hull)
                    if c > change:
                        change = c
            start = stop
    return change


@njit(cache=True)
def project_monotone(u, mask, shape, strides, axis):
    """``u(x) <= u(x + e_axis)``; a neighbour outside the mask or grid counts as 1."""
    n = shape.shape[0]
    total = u.shape[0]
    idx = np.empty(n, dtype=np.int64)
    change = 0.0
    for flat in range(total):
        _unravel(flat, shape, idx)
        if idx[axis] != shape[axis] - 1:
            continue
        nxt = 1.0
        pos = flat
        for _ in range(shape[axis]):
            if mask[pos]:
                if u[pos] > nxt:
                    d = u[pos] - nxt
                    if d > change:
                        change = d
                    u[pos] = nxt
                nxt = u[pos]
            else:
                nxt = 1.0
            pos -= strides[axis]
    return change


@njit(cache=True)
def pointwise_sweep(u, mask, shape, strides, directions, reverse):
    """One Gauss-Seidel min-sweep over all points with the local constraints."""
    n = shape.shape[0]
    total = u.shape[0]
    idx = np.empty(n, dtype=np.int64)
    nb = np.empty(n, dtype=np.int64)
    change = 0.0
    for step in range(total):
        flat = total - 1 - step if reverse else step
        if not mask[flat]:
            continue
        _unravel(flat, shape, idx)
        best = u[flat]
        for k in range(n):
            for q in range(n):
                nb[q] = idx[q]
            nb[k] += 1
            if _inside_box(nb, shape):
                pos = _ravel(nb, strides)
                if mask[pos] and u[pos] < best:
                    best = u[pos]
        for t in range(directions.shape[0]):
            for q in range(n):
                nb[q] = idx[q] + directions[t, q]
            if not _inside_box(nb, shape):
                continue
            p1 = _ravel(nb, strides)
            for q in range(n):
                nb[q] = idx[q] - directions[t, q]
            if not _inside_box(nb, shape):
                continue
            p2 = _ravel(nb, strides)
            if mask[p1] and mask[p2]:
                v = 0.5 * (u[p1] + u[p2])
                if v < best:
                    best = v
        if best < u[flat]:
            d = u[flat] - best
            if d > change:
                change = d
            u[flat] = best
    return change
