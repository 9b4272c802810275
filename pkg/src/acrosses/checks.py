"""Set-level comparisons of envelope descriptions and the two catalogue checks."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, asdict
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .envelope import Closed, rule_claim_q6, rule_prop_center
from .errors import DimensionError
from .hexpr import HExpr, hsum, lattice_values, parse, rename, to_text, var
from .lattice import first_lattice_mismatch, first_point_mismatch, halfspaces, lattice_side

DEFAULT_STEP = Fraction(1, 64)
DEFAULT_RANDOM = 10_000
RANDOM_DENOM = 1 << 20

QTILDE = parse("max(sum(h2,h4),sum(h1,h2,h3),sum(h1,h3,h4))")


@dataclass(frozen=True)
class Comparison:
    equal: bool
    witness: tuple[Fraction, ...] | None
    samples: int
    step: Fraction
    seed: int

    def to_dict(self, case: str = "") -> dict:
        return {
            "case": case,
            "result": "Equal" if self.equal else "Witness",
            "witness": None if self.witness is None else [str(x) for x in self.witness],
            "samples": self.samples,
            "step": str(self.step),
            "seed": self.seed,
        }


def _expr(d) -> tuple[HExpr, int | None]:
    if isinstance(d, Closed):
        return d.expr, d.n
    return d, None


def desc_equal(d1, d2, grid_step=DEFAULT_STEP, n_random: int = DEFAULT_RANDOM,
               seed: int = 0, n: int | None = None) -> Comparison:
    """Compare ``{e1 < 1}`` and ``{e2 < 1}`` on ``[0,1)^n`` exactly at sample points.

    Samples are the lattice ``{0, step, ..., 1-step}^n`` in C order followed
    by ``n_random`` seeded points with denominator ``2^20``.  The witness is
    the first disagreeing sample in that order.  Accepts :class:`Closed` or
    bare expressions (then pass ``n``).
    """
    e1, n1 = _expr(d1)
    e2, n2 = _expr(d2)
    dims = {x for x in (n1, n2, n) if x is not None}
    if len(dims) != 1:
        raise DimensionError(f"cannot infer a single dimension from {sorted(dims) or 'nothing'}")
    n = dims.pop()
    step = Fraction(grid_step)
    side = lattice_side(step)
    c1, r1 = halfspaces(e1, n, side)
    c2, r2 = halfspaces(e2, n, side)
    total = side ** n + n_random
    idx = first_lattice_mismatch(c1, r1, c2, r2, n, side)
    if idx[0] >= 0:
        return Comparison(False, tuple(Fraction(int(i), side) for i in idx), total, step, seed)
    if n_random:
        rng = np.random.default_rng(seed)
        pts = rng.integers(0, RANDOM_DENOM, size=(n_random, n), dtype=np.int64)
        c1, r1 = halfspaces(e1, n, RANDOM_DENOM)
        c2, r2 = halfspaces(e2, n, RANDOM_DENOM)
        t = first_point_mismatch(c1, r1, c2, r2, pts)
        if t >= 0:
            return Comparison(False, tuple(Fraction(int(i), RANDOM_DENOM) for i in pts[t]),
                              total, step, seed)
    return Comparison(True, None, total, step, seed)


def desc_subset(d1, d2, grid_step=DEFAULT_STEP, n: int | None = None):
    """First lattice point inside ``d1`` but outside ``d2``, or None."""
    e1, n1 = _expr(d1)
    e2, n2 = _expr(d2)
    n = n or n1 or n2
    side = lattice_side(grid_step)
    c1, r1 = halfspaces(e1, n, side)
    c2, r2 = halfspaces(e2, n, side)
    idx = first_lattice_mismatch(c1, r1, c2, r2, n, side, True)
    if idx[0] < 0:
        return None
    return tuple(Fraction(int(i), side) for i in idx)


# --- the negative result ---------------------------------------------------

@dataclass(frozen=True)
class QtildeReport:
    target: str
    candidates: int
    permutations: bool
    matches: tuple[str, ...]

    def to_dict(self) -> dict:
        return asdict(self)


def qtilde_check(candidates: Iterable[tuple[str, HExpr]], permutations: bool = True,
                 grid_step=DEFAULT_STEP, n_random: int = DEFAULT_RANDOM,
                 seed: int = 0, target: HExpr = QTILDE) -> QtildeReport:
    """Compare the target set against each candidate, optionally under all column orders."""
    matches, count = [], 0
    perms = list(itertools.permutations(range(1, 5))) if permutations else [tuple(range(1, 5))]
    for label, expr in candidates:
        count += 1
        for perm in perms:
            moved = rename(expr, {j + 1: perm[j] for j in range(4)})
            if desc_equal(target, moved, grid_step, n_random, seed, n=4).equal:
                tag = label if perm == (1, 2, 3, 4) else f"{label} with columns {perm}"
                matches.append(tag)
                break
    return QtildeReport(to_text(target), count, permutations, tuple(matches))


# --- the two equivalent condition systems ----------------------------------

@dataclass(frozen=True)
class SystemsReport:
    samples: int
    seed: int
    counterexamples: int
    first: tuple[str, ...] | None

    def to_dict(self) -> dict:
        return asdict(self)


def systems_pair() -> tuple[tuple[HExpr, ...], tuple[HExpr, ...]]:
    """The two condition systems with composite extremal functions closed.

    The (2,4) term is ``A_2 x D_4`` in the (2,4) two-fold envelope and the
    (1,3) term is ``D_1 x A_3`` in the (1,3) two-fold envelope.
    """
    term24 = rule_claim_q6(2, 4)
    term13 = rule_prop_center(a_slots=(3,), d_slots=(1,), k=1)
    first = (hsum(var(2), var(4)), hsum(var(1), var(3)), hsum(term13, term24))
    second = (hsum(var(2), var(4)), hsum(var(1), var(3)), hsum(var(2), term13))
    return first, second


def systems_equiv_check(n_samples: int = 100_000, seed: int = 0) -> SystemsReport:
    """Exact comparison of the two systems at seeded points with denominator ``2^20``."""
    rng = np.random.default_rng(seed)
    pts = rng.integers(0, RANDOM_DENOM, size=(n_samples, 4), dtype=np.int64)
    coords = [pts[:, j] for j in range(4)]
    first, second = systems_pair()

    def holds(system):
        ok = np.ones(n_samples, dtype=bool)
        for cond in system:
            num, den = lattice_values(cond, coords, RANDOM_DENOM)
            ok &= np.broadcast_to(num < den, ok.shape)
        return ok

    diff = np.flatnonzero(holds(first) != holds(second))
    first_bad = None
    if diff.size:
        first_bad = tuple(str(Fraction(int(v), RANDOM_DENOM)) for v in pts[diff[0]])
    return SystemsReport(n_samples, seed, int(diff.size), first_bad)
