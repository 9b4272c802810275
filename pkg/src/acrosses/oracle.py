"""Grid oracle for relative extremal functions of rotation-invariant data.

For data invariant under rotations of each factor, an extremal function is
a function of the log-norms ``t_j = log |z_j|``; plurisubharmonicity turns
into convexity plus monotonicity in each ``t_j``.  So ``h*_{A,D}`` is the
largest grid function that is convex along the stencil directions,
nondecreasing along each axis, ``<= 0`` on A and ``<= 1`` on D.

Convexity is imposed along the coordinate axes and the diagonals (the
``planar`` stencil stops at two-axis diagonals).  The solver alternates
exact projections: the lower convex envelope along every stencil line (per
masked segment), then a reverse running minimum along every axis.  The
pointwise Gauss-Seidel sweep is kept as a checker.

Every constraint is satisfied by the true extremal function restricted to
the grid, so the grid solution is an upper bound that tightens as
constraints are added.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from . import oracle_kernels as K
from .cross_algebra import CrossMatrix, nk_rows
from .envelope import (
    nk_envelope, rule_claim_q6, rule_claim_q7, rule_cross_in_envelope,
    rule_env_in_env, rule_prop_center,
)
from .errors import ConvergenceError, DegenerateSetError, DimensionError
from .hexpr import HExpr, const, evaluate_array, to_text, var
from .radial import RadialFactor, RadialModel

DEFAULT_POINTS = {1: 513, 2: 129, 3: 65}
TOLERANCES = {1: 5e-3, 2: 2e-2, 3: 3e-2}
PROFILES = {
    "smoke": {1: 33, 2: 33, 3: 33},
    "desk": dict(DEFAULT_POINTS),
    "deep": {d: 2 * (p - 1) + 1 for d, p in DEFAULT_POINTS.items()},
}
DEFAULT_TOL = 1e-7
DEFAULT_MAX_SWEEPS = 200_000
_EDGE = 1e-9  # relative slack when comparing grid nodes with cuts


# --- grids -----------------------------------------------------------------

@dataclass(frozen=True)
class LogGrid:
    t_min: tuple[float, ...]
    t_max: tuple[float, ...]
    n_pts: tuple[int, ...]

    def __post_init__(self):
        if not (len(self.t_min) == len(self.t_max) == len(self.n_pts)):
            raise DimensionError("t_min, t_max and n_pts must have equal length")
        for a, b, m in zip(self.t_min, self.t_max, self.n_pts):
            if not a < b:
                raise ValueError("need t_min < t_max on every axis")
            if m < 17:
                raise ValueError("need at least 17 points per axis")

    @classmethod
    def for_factors(cls, factors: Sequence[RadialFactor], n_pts: int | Sequence[int],
                    margin: float | Sequence[float] | None = None) -> "LogGrid":
        """Axis ``j`` runs from ``log r_j - margin_j`` to ``log R_j``.

        The default margin is ``log(R_j / r_j)``, one ramp length below the
        inner radius.
        """
        d = len(factors)
        pts = (n_pts,) * d if isinstance(n_pts, int) else tuple(n_pts)
        if margin is None:
            margins = [f.log_R - f.log_r for f in factors]
        elif isinstance(margin, (int, float)):
            margins = [float(margin)] * d
        else:
            margins = list(margin)
        if any(m <= 0 for m in margins):
            raise ValueError("margins must be positive")
        return cls(tuple(f.log_r - m for f, m in zip(factors, margins)),
                   tuple(f.log_R for f in factors), pts)

    @property
    def dim(self) -> int:
        return len(self.n_pts)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.n_pts)

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(a, b, m) for a, b, m in zip(self.t_min, self.t_max, self.n_pts)]

    def steps(self) -> list[float]:
        return [(b - a) / (m - 1) for a, b, m in zip(self.t_min, self.t_max, self.n_pts)]

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def to_dict(self) -> dict:
        return {"t_min": list(self.t_min), "t_max": list(self.t_max), "n_pts": list(self.n_pts)}


@dataclass
class GridFn:
    grid: LogGrid
    values: np.ndarray
    mask: np.ndarray
    sweeps: int = 0
    residual: float = 0.0
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        """Rows ``t_1..t_N,value,mask`` in C order."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        d = self.grid.dim
        w.writerow([f"t_{j + 1}" for j in range(d)] + ["value", "mask"])
        mesh = self.grid.mesh()
        flat = [m.ravel() for m in mesh]
        vals = self.values.ravel()
        msk = self.mask.ravel()
        for i in range(vals.size):
            w.writerow([f"{flat[j][i]:.12g}" for j in range(d)] + [f"{vals[i]:.12g}", int(msk[i])])
        return buf.getvalue()


def h_grid(factors: Sequence[RadialFactor], grid: LogGrid) -> list[np.ndarray]:
    """``h_j(t_j)`` on the mesh, computed in log coordinates."""
    out = []
    for f, t in zip(factors, grid.mesh()):
        out.append(np.clip((t - f.log_r) / (f.log_R - f.log_r), 0.0, None))
    return out


# --- regions ---------------------------------------------------------------

@dataclass(frozen=True)
class ALowerSet:
    """All ``t_j <= cuts_j``; with the cuts at ``log r_j`` this is A_1 x ... x A_N."""
    cuts: tuple[float, ...]


@dataclass(frozen=True)
class CrossRegion:
    """Union over rows: ``t_j <= cuts_j`` where the row has 0, free where it has 1."""
    matrix: CrossMatrix
    cuts: tuple[float, ...]


@dataclass(frozen=True)
class DomainSublevel:
    """``expr(h(t)) < level`` inside the product of the open outer balls."""
    expr: HExpr
    level: float = 1.0


RegionSpec = ALowerSet | CrossRegion | DomainSublevel


def region_mask(region: RegionSpec, factors: Sequence[RadialFactor], grid: LogGrid) -> np.ndarray:
    mesh = grid.mesh()
    steps = grid.steps()
    if isinstance(region, ALowerSet):
        _dim_check(len(region.cuts), grid.dim)
        out = np.ones(grid.shape, dtype=bool)
        for t, c, s in zip(mesh, region.cuts, steps):
            out &= t <= c + _EDGE * s
        return out
    if isinstance(region, CrossRegion):
        _dim_check(region.matrix.n_factors, grid.dim)
        _dim_check(len(region.cuts), grid.dim)
        out = np.zeros(grid.shape, dtype=bool)
        for row in region.matrix.rows:
            branch = np.ones(grid.shape, dtype=bool)
            for t, c, s, bit in zip(mesh, region.cuts, steps, row):
                if not bit:
                    branch &= t <= c + _EDGE * s
            out |= branch
        return out
    if isinstance(region, DomainSublevel):
        out = np.ones(grid.shape, dtype=bool)
        for t, f, s in zip(mesh, factors, steps):
            out &= t < f.log_R - _EDGE * s
        h = h_grid(factors, grid)
        out &= evaluate_array(region.expr, h) < region.level
        return out
    raise TypeError(f"unknown region {region!r}")


def _dim_check(a, b):
    if a != b:
        raise DimensionError(f"region has {a} axes, grid has {b}")


# --- solver ----------------------------------------------------------------

STENCILS = ("planar", "cube", "wide")


def _directions(d: int, stencil: str = "wide") -> np.ndarray:
    """Line directions, one per +/- pair.

    ``planar``: axes and two-axis diagonals.  ``cube``: every nonzero vector
    in ``{-1,0,1}^d``, which adds the three-axis diagonals in 3-D.  ``wide``:
    every primitive vector in ``{-2..2}^d``, adding knight-type moves.
    """
    if stencil not in STENCILS:
        raise ValueError(f"unknown stencil {stencil!r}; use one of {STENCILS}")
    reach = 2 if stencil == "wide" else 1
    dirs = []
    for v in itertools.product(range(-reach, reach + 1), repeat=d):
        nz = [x for x in v if x]
        if not nz or nz[0] < 0 or math.gcd(*nz) != 1:
            continue
        if stencil == "planar" and len(nz) > 2:
            continue
        dirs.append(v)
    dirs.sort(key=lambda v: (sum(map(abs, v)), [-x for x in v]))
    return np.array(dirs, dtype=np.int64).reshape(len(dirs), d)


def _shift(a: np.ndarray, d: Sequence[int], fill) -> np.ndarray:
    """``out[x] = a[x + d]``, ``fill`` where ``x + d`` leaves the grid."""
    out = np.full_like(a, fill)
    src, dst = [], []
    for k, n in zip(d, a.shape):
        src.append(slice(max(k, 0), n + min(k, 0)))
        dst.append(slice(max(-k, 0), n - max(k, 0)))
    out[tuple(dst)] = a[tuple(src)]
    return out


def closure_contains(region: RegionSpec | None, t: np.ndarray,
                     factors: Sequence[RadialFactor] = ()) -> np.ndarray:
    """Rows of ``t`` (points x axes) lying in the closure of a set region.

    Sub-level regions need ``factors`` to map ``t`` to h-values.
    """
    if region is None:
        return np.zeros(t.shape[0], dtype=bool)
    if isinstance(region, ALowerSet):
        return np.all(t <= np.array(region.cuts) + 1e-12, axis=1)
    if isinstance(region, CrossRegion):
        cuts = np.array(region.cuts) + 1e-12
        out = np.zeros(t.shape[0], dtype=bool)
        for row in region.matrix.rows:
            zero = np.array([not b for b in row])
            out |= np.all((t <= cuts) | ~zero, axis=1)
        return out
    if isinstance(region, DomainSublevel) and len(factors) == t.shape[1]:
        lo = np.array([f.log_r for f in factors])
        span = np.array([f.log_R - f.log_r for f in factors])
        h = np.clip((t - lo) / span, 0.0, None)
        g = evaluate_array(region.expr, [h[:, j] for j in range(h.shape[1])])
        return np.broadcast_to(g <= region.level + 1e-12, t.shape[:1])
    raise TypeError(f"closure test not available for {type(region).__name__}")


@dataclass
class BoundaryAnchors:
    """Per direction, where each line segment meets the domain boundary and the value there.

    ``ahead[i][x]`` is the fraction of a step from ``x`` to the boundary
    along ``+d_i`` when ``x`` is masked and ``x + d_i`` is a grid node
    outside the mask (NaN otherwise); ``behind`` is the same along
    ``-d_i``.  The anchored value is 0 where the crossing lies in the
    closure of the set and 1 elsewhere; both are bounds every admissible
    upper semicontinuous function obeys.
    """
    ahead: list[np.ndarray]
    behind: list[np.ndarray]
    value_ahead: list[np.ndarray]
    value_behind: list[np.ndarray]


def boundary_anchors(domain: DomainSublevel, factors: Sequence[RadialFactor], grid: LogGrid,
                     mask: np.ndarray, dirs: np.ndarray, a_region: RegionSpec | None = None,
                     iters: int = 60) -> BoundaryAnchors:
    """Locate boundary crossings by bisection on the domain's defining function."""
    axes = grid.axes()
    steps = np.array(grid.steps())
    lo = np.array([f.log_r for f in factors])
    span = np.array([f.log_R - f.log_r for f in factors])

    def phi(t):  # < 0 exactly inside the domain
        h = np.clip((t - lo) / span, 0.0, None)
        g = evaluate_array(domain.expr, [h[:, j] for j in range(h.shape[1])])
        return np.maximum(np.broadcast_to(g, h.shape[:1]) - domain.level, (h - 1.0).max(axis=1))

    res = {1: ([], []), -1: ([], [])}
    for d in dirs:
        for sign in (1, -1):
            nxt = _shift(mask, sign * d, True)
            on_grid = _shift(np.ones_like(mask), sign * d, False)
            idx = np.nonzero(mask & ~nxt & on_grid)
            theta = np.full(grid.shape, np.nan)
            value = np.ones(grid.shape)
            if idx[0].size:
                t0 = np.stack([axes[j][idx[j]] for j in range(grid.dim)], axis=1)
                dt = sign * d * steps
                a = np.zeros(idx[0].size)
                b = np.ones(idx[0].size)
                for _ in range(iters):
                    mid = 0.5 * (a + b)
                    ok = phi(t0 + mid[:, None] * dt) < 0
                    a = np.where(ok, mid, a)
                    b = np.where(ok, b, mid)
                theta[idx] = b
                value[idx] = np.where(closure_contains(a_region, t0 + b[:, None] * dt, factors), 0.0, 1.0)
            res[sign][0].append(theta.ravel())
            res[sign][1].append(value.ravel())
    return BoundaryAnchors(res[1][0], res[-1][0], res[1][1], res[-1][1])


def convex_monotone_envelope(obstacle: GridFn, tol: float = DEFAULT_TOL,
                             max_sweeps: int = DEFAULT_MAX_SWEEPS,
                             method: str = "lines", stencil: str = "wide",
                             boundary=None) -> GridFn:
    """Largest grid function below the obstacle that is convex and nondecreasing.

    ``method="lines"`` alternates exact line projections; ``"pointwise"``
    runs forward/reverse Gauss-Seidel min-sweeps.  Both stop when the
    largest update in a sweep drops below ``tol``.  Values off the mask are
    set to 1 and never read.

    ``boundary`` is an optional :class:`BoundaryAnchors`; line projections
    then also pass through the anchored value at the exact boundary
    crossing.  Without it a segment only sees its own nodes.
    """
    mask = np.ascontiguousarray(obstacle.mask, dtype=np.bool_)
    if not mask.any():
        raise DegenerateSetError("empty domain mask")
    shape = np.array(obstacle.grid.shape, dtype=np.int64)
    strides = np.array([int(np.prod(obstacle.grid.shape[k + 1:])) for k in range(len(shape))],
                       dtype=np.int64)
    u = np.where(mask, np.clip(obstacle.values, 0.0, 1.0), 1.0).astype(np.float64).ravel()
    m = mask.ravel()
    dirs = _directions(len(shape), stencil)
    if boundary is None:
        none, ones = np.full(u.size, np.nan), np.ones(u.size)
        boundary = BoundaryAnchors([none] * len(dirs), [none] * len(dirs),
                                   [ones] * len(dirs), [ones] * len(dirs))
        fitted = False
    else:
        fitted = True
    anchors = list(zip(dirs, boundary.ahead, boundary.behind,
                       boundary.value_ahead, boundary.value_behind))
    residual = math.inf
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        if method == "lines":
            residual = 0.0
            for d, tf, tb, vf, vb in anchors:
                residual = max(residual, K.project_convex(u, m, shape, strides, d, tb, tf, vb, vf))
            for axis in range(len(shape)):
                residual = max(residual, K.project_monotone(u, m, shape, strides, axis))
        elif method == "pointwise":
            residual = K.pointwise_sweep(u, m, shape, strides, dirs, sweeps % 2 == 0)
        else:
            raise ValueError(f"unknown method {method!r}")
        if residual < tol:
            break
    else:
        raise ConvergenceError(f"no convergence in {max_sweeps} sweeps (last update {residual:.3g})",
                               residual, sweeps)
    return GridFn(obstacle.grid, u.reshape(obstacle.grid.shape), mask, sweeps, residual,
                  {"method": method, "tol": tol, "stencil": stencil,
                   "boundary_fitted": fitted})


def compute_h_star(model: RadialModel | Sequence[RadialFactor], a_region: RegionSpec,
                   domain: RegionSpec, n_pts: int | Sequence[int] | None = None,
                   margin=None, tol: float = DEFAULT_TOL,
                   max_sweeps: int = DEFAULT_MAX_SWEEPS, method: str = "lines",
                   stencil: str = "wide", fit_boundary: bool = True) -> GridFn:
    """Grid approximation of the extremal function of ``a_region`` inside ``domain``.

    ``fit_boundary`` (line method, sub-level domains only) anchors each
    line at the exact boundary crossing instead of the last grid node, with
    value 0 where the crossing touches the closure of the set.
    """
    factors = tuple(model.factors if isinstance(model, RadialModel) else model)
    pts = n_pts if n_pts is not None else DEFAULT_POINTS.get(len(factors), 33)
    grid = LogGrid.for_factors(factors, pts, margin)
    mask = region_mask(domain, factors, grid)
    a = region_mask(a_region, factors, grid) & mask
    if not a.any():
        raise DegenerateSetError("the set has no grid points inside the domain")
    obstacle = GridFn(grid, np.where(a, 0.0, 1.0), mask)
    boundary = None
    if fit_boundary and method == "lines" and isinstance(domain, DomainSublevel):
        boundary = boundary_anchors(domain, factors, grid, mask, _directions(grid.dim, stencil),
                                    a_region)
    return convex_monotone_envelope(obstacle, tol, max_sweeps, method, stencil, boundary)


def interior(mask: np.ndarray, cells: int = 2) -> np.ndarray:
    """Masked points at least ``cells`` grid cells away from the unmasked region."""
    structure = ndimage.generate_binary_structure(mask.ndim, mask.ndim)
    return ndimage.binary_erosion(mask, structure, iterations=cells, border_value=1)


# --- identity catalogue ----------------------------------------------------

@dataclass(frozen=True)
class IdentityCase:
    """A closed-form extremal function to test against the grid solver.

    ``a_rows`` describes the set as rows over the case factors (0 = inner
    ball, 1 = whole outer ball); ``domain`` is a sub-level expression.
    """
    name: str
    dim: int
    a_rows: tuple[tuple[int, ...], ...]
    domain: HExpr
    expected: HExpr

    def regions(self, factors: Sequence[RadialFactor]):
        cuts = tuple(f.log_r for f in factors)
        if self.a_rows == (tuple([0] * self.dim),):
            a = ALowerSet(cuts)
        else:
            a = CrossRegion(CrossMatrix.of(self.a_rows), cuts)
        return a, DomainSublevel(self.domain)


def disc_formula() -> IdentityCase:
    return IdentityCase("DISC_FORMULA", 1, ((0,),), const(0), var(1))


def prop_center(n: int, k: int) -> IdentityCase:
    return IdentityCase(f"PROP_CENTER({n},{k})", n, (tuple([0] * n),), nk_envelope(n, k),
                        rule_prop_center(range(1, n + 1), (), k))


def env_in_env(n: int, k: int, l: int) -> IdentityCase:
    return IdentityCase(f"ENV_IN_ENV({n},{k},{l})", n, nk_rows(n, k), nk_envelope(n, l),
                        rule_env_in_env(n, k, l))


def cross_in_envelope(n: int, k: int, l: int) -> IdentityCase:
    return IdentityCase(f"CROSS_IN_ENVELOPE({n},{k},{l})", n, nk_rows(n, k), nk_envelope(n, l),
                        rule_cross_in_envelope(n, k, l))


def claim_q6() -> IdentityCase:
    """``A x D`` inside the two-fold classical cross envelope."""
    return IdentityCase("CLAIM_Q6", 2, ((0, 1),), nk_envelope(2, 1), rule_claim_q6(1, 2))


def claim_q7() -> IdentityCase:
    """``A x A x D`` inside the (3,2) envelope."""
    return IdentityCase("CLAIM_Q7", 3, ((0, 0, 1),), nk_envelope(3, 2), rule_claim_q7((1, 2), 3))


def lifted_center(a: int, d: int, k: int) -> IdentityCase:
    n = a + d
    return IdentityCase(f"LIFTED_CENTER({a},{d},{k})", n, (tuple([0] * a + [1] * d),),
                        nk_envelope(n, k),
                        rule_prop_center(range(1, a + 1), range(a + 1, n + 1), k))


CATALOG = {
    "DISC_FORMULA": disc_formula,
    "PROP_CENTER(2,1)": lambda: prop_center(2, 1),
    "PROP_CENTER(2,2)": lambda: prop_center(2, 2),
    "PROP_CENTER(3,2)": lambda: prop_center(3, 2),
    "ENV_IN_ENV(2,1,2)": lambda: env_in_env(2, 1, 2),
    "ENV_IN_ENV(3,1,2)": lambda: env_in_env(3, 1, 2),
    "ENV_IN_ENV(3,2,3)": lambda: env_in_env(3, 2, 3),
    "CLAIM_Q6": claim_q6,
    "CLAIM_Q7": claim_q7,
}
"""Cases whose closed form is expected to pass; ``verify-all`` runs these."""

EXTRA_CASES = {
    "ENV_IN_ENV(3,1,3)": lambda: env_in_env(3, 1, 3),
    "CROSS_IN_ENVELOPE(3,1,3)": lambda: cross_in_envelope(3, 1, 3),
    "LIFTED_CENTER(2,1,1)": lambda: lifted_center(2, 1, 1),
    "LIFTED_CENTER(1,1,1)": lambda: lifted_center(1, 1, 1),
}


def get_case(name: str) -> IdentityCase:
    table = {**CATALOG, **EXTRA_CASES}
    key = name.upper().replace(" ", "")
    if key not in table:
        raise KeyError(f"unknown case {name!r}; known: {', '.join(table)}")
    return table[key]()


@dataclass
class VerifyReport:
    case: str
    params: dict
    grid: dict
    max_dev: float
    tolerance: float
    passed: bool
    sweeps: int
    residual: float
    seconds: float
    argmax_h: list | None = None
    signed_dev: tuple[float, float] = (0.0, 0.0)

    def to_dict(self) -> dict:
        return {"case": self.case, "params": self.params, "grid": self.grid,
                "max_dev": self.max_dev, "tolerance": self.tolerance, "pass": self.passed,
                "sweeps": self.sweeps, "residual": self.residual, "seconds": self.seconds,
                "argmax_h": self.argmax_h, "signed_dev": list(self.signed_dev)}


def verify_identity(case: IdentityCase, model: RadialModel | None = None,
                    n_pts: int | None = None, tolerance: float | None = None,
                    margin=None, tol: float = DEFAULT_TOL,
                    max_sweeps: int = DEFAULT_MAX_SWEEPS, method: str = "lines",
                    seed: int = 0, stencil: str = "wide",
                    fit_boundary: bool = True) -> tuple[VerifyReport, GridFn]:
    """Solve on the grid and compare with the closed form on interior points.

    The model's first ``case.dim`` factors are used (default: all r=0.5,
    R=1).  ``seed`` is recorded only; the solver is deterministic.
    """
    if case.dim > 3:
        raise DimensionError("grid cases are limited to three factors")
    model = model or RadialModel.uniform(max(case.dim, 2))
    if model.n < case.dim:
        raise DimensionError(f"case needs {case.dim} factors, model has {model.n}")
    factors = model.factors[:case.dim]
    pts = n_pts or DEFAULT_POINTS[case.dim]
    tolerance = TOLERANCES[case.dim] if tolerance is None else tolerance
    a, dom = case.regions(factors)
    t0 = time.perf_counter()
    sol = compute_h_star(factors, a, dom, pts, margin, tol, max_sweeps, method,
                         stencil, fit_boundary)
    seconds = time.perf_counter() - t0
    h = h_grid(factors, sol.grid)
    expected = evaluate_array(case.expected, h)
    inner = interior(sol.mask)
    signed = np.where(inner, sol.values - expected, 0.0)
    dev = np.abs(signed)
    k = int(np.argmax(dev))
    max_dev = float(dev.ravel()[k])
    at = [float(x.ravel()[k]) for x in h] if inner.any() else None
    report = VerifyReport(
        case=case.name,
        params={"expected": to_text(case.expected), "domain": to_text(case.domain),
                "set_rows": ["".join(map(str, r)) for r in case.a_rows],
                "factors": [{"r": f.r, "R": f.R, "dim": f.dim} for f in factors],
                "tol": tol, "max_sweeps": max_sweeps, "method": method, "seed": seed,
                "stencil": stencil, "boundary_fitted": sol.meta.get("boundary_fitted", False)},
        grid=sol.grid.to_dict(), max_dev=max_dev, tolerance=tolerance,
        passed=bool(max_dev <= tolerance), sweeps=sol.sweeps, residual=float(sol.residual),
        seconds=round(seconds, 3), argmax_h=at,
        signed_dev=(float(signed.min()), float(signed.max())))
    return report, sol


def profile_points(profile: str, dim: int) -> int:
    try:
        return PROFILES[profile][dim]
    except KeyError:
        raise KeyError(f"unknown profile {profile!r}; use one of {sorted(PROFILES)}") from None
