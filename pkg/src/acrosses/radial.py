"""Concentric ball models: A_j is the closed ball of radius r, D_j the open ball of radius R.

For such a pair the relative extremal function depends on the norm only:
``h(rho) = max{0, log(rho/r) / log(R/r)}``.  Points are handled through
their per-factor norms, so every map here is rotation invariant.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .envelope import Closed
from .errors import DimensionError, OutsideDomainError
from .hexpr import evaluate_array


@dataclass(frozen=True)
class RadialFactor:
    r: float
    R: float
    dim: int = 1

    def __post_init__(self):
        if not (0 < self.r < self.R) or not math.isfinite(self.R):
            raise ValueError(f"need 0 < r < R < inf, got r={self.r}, R={self.R}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")

    @property
    def log_r(self) -> float:
        return math.log(self.r)

    @property
    def log_R(self) -> float:
        return math.log(self.R)


@dataclass(frozen=True)
class RadialModel:
    factors: tuple[RadialFactor, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) < 2:
            raise DimensionError("a model needs at least two factors")

    @classmethod
    def uniform(cls, n: int, r: float = 0.5, R: float = 1.0, dim: int = 1) -> "RadialModel":
        return cls(tuple(RadialFactor(r, R, dim) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.factors)

    def to_dict(self) -> dict:
        return {"factors": [{"r": f.r, "R": f.R, "dim": f.dim} for f in self.factors]}


def h_disc(rho, f: RadialFactor):
    """Extremal function of the inner ball at norm ``rho``; scalar or array."""
    arr = np.asarray(rho, dtype=float)
    if np.any(arr < 0) or np.any(~np.isfinite(arr)):
        raise ValueError("norms must be finite and nonnegative")
    if np.any(arr >= f.R):
        raise OutsideDomainError(f"norm {float(arr.max())} is not below R={f.R}")
    with np.errstate(divide="ignore"):
        out = np.maximum(0.0, np.log(arr / f.r) / math.log(f.R / f.r))
    return float(out) if out.ndim == 0 else out


def h_vector(model: RadialModel, radii: Sequence[float]) -> np.ndarray:
    """Componentwise :func:`h_disc`; the error names the first offending factor."""
    if len(radii) != model.n:
        raise DimensionError(f"{len(radii)} radii for a model with {model.n} factors")
    out = np.empty(model.n)
    for j, (rho, f) in enumerate(zip(radii, model.factors)):
        try:
            out[j] = h_disc(rho, f)
        except OutsideDomainError as exc:
            raise OutsideDomainError(f"factor {j + 1}: {exc}", index=j + 1) from None
    return out


def membership(model: RadialModel, radii: Sequence[float], d: Closed) -> bool:
    """Whether the point with these norms lies in the described envelope."""
    if d.n != model.n:
        raise DimensionError(f"description has {d.n} factors, model {model.n}")
    h = h_vector(model, radii)
    return bool(evaluate_array(d.expr, [np.array(v) for v in h]) < 1.0)


# --- files -----------------------------------------------------------------

def model_from_dict(doc: dict) -> RadialModel:
    try:
        items = doc["factors"]
        return RadialModel(tuple(
            RadialFactor(float(it["r"]), float(it["R"]), int(it.get("dim", 1))) for it in items))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed model document: {exc}") from None


def load_model(path: str | Path) -> RadialModel:
    """Read a JSON or YAML document ``{factors: [{r, R, dim}, ...]}``."""
    text = Path(path).read_text()
    doc = yaml.safe_load(text)  # JSON is a subset of YAML
    if not isinstance(doc, dict):
        raise ValueError("model document must be a mapping with a 'factors' list")
    return model_from_dict(doc)


def dump_model(model: RadialModel) -> str:
    return json.dumps(model.to_dict(), indent=2)


def read_radii_csv(text: str) -> list[list[float]]:
    """Rows ``rho_1,...,rho_N``; blank lines and ``#`` comments are skipped."""
    rows = []
    for rec in csv.reader(io.StringIO(text)):
        if not rec or rec[0].strip().startswith("#"):
            continue
        rows.append([float(x) for x in rec])
    return rows
