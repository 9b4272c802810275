import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from acrosses.envelope import Closed, nine_cases
from acrosses.errors import DimensionError, OutsideDomainError
from acrosses.hexpr import hsum, parse, var
from acrosses.radial import (
    RadialFactor, RadialModel, dump_model, h_disc, h_vector, load_model, membership,
    read_radii_csv,
)

F = RadialFactor(0.5, 1.0)
S = math.sqrt(0.5)


def test_h_disc_examples():
    assert h_disc(0.5, F) == 0
    assert h_disc(S, F) == pytest.approx(0.5, abs=1e-15)
    assert h_disc(0.25, F) == 0
    assert h_disc(0.0, F) == 0
    with pytest.raises(OutsideDomainError):
        h_disc(1.0, F)


def test_factor_validation():
    for r, R in ((0.0, 1.0), (1.0, 0.5), (0.5, math.inf)):
        with pytest.raises(ValueError):
            RadialFactor(r, R)
    with pytest.raises(DimensionError):
        RadialModel((F,))


@pytest.mark.parametrize("r,R", [(0.5, 1.0), (0.1, 3.0), (2.0, 2.5)])
def test_log_linearity(r, R):
    f = RadialFactor(r, R)
    for s in np.linspace(0, 1, 11)[:-1]:
        assert abs(h_disc(r * (R / r) ** s, f) - s) < 1e-12


@given(st.floats(0, 0.999), st.floats(0, 0.999))
def test_h_disc_monotone(a, b):
    lo, hi = sorted((a, b))
    assert 0 <= h_disc(lo, F) <= h_disc(hi, F) < 1


def test_h_vector_examples():
    m = RadialModel.uniform(2)
    assert list(h_vector(m, [0.1, 0.5])) == [0, 0]
    assert h_vector(m, [S, 0.5]) == pytest.approx([0.5, 0])
    assert h_vector(m, [1 - 1e-12, 0])[0] == pytest.approx(1, abs=1e-10)
    with pytest.raises(OutsideDomainError) as err:
        h_vector(m, [0.2, 1.5])
    assert err.value.index == 2
    with pytest.raises(DimensionError):
        h_vector(m, [0.2])


def test_membership_examples():
    m = RadialModel.uniform(4)
    for case in nine_cases():
        assert membership(m, [0.5] * 4, Closed(4, case.expr))
    q9 = next(c for c in nine_cases() if c.name == "Q9")
    assert membership(m, [S] * 4, Closed(4, q9.expr))
    q4 = Closed(4, parse("max(sum(h2,h4),sum(h1,h3))"))
    rho = 0.5 * 2 ** 0.6
    assert not membership(m, [rho, 0.5, rho, 0.5], q4)


@given(st.lists(st.floats(0, 0.99), min_size=3, max_size=3))
def test_classical_cross_consistency(radii):
    m = RadialModel.uniform(3)
    d = Closed(3, hsum(var(1), var(2), var(3)))
    assert membership(m, radii, d) == (sum(h_vector(m, radii)) < 1)


def test_model_files(tmp_path):
    m = RadialModel((RadialFactor(0.5, 1.0), RadialFactor(0.2, 2.0, dim=3)))
    p = tmp_path / "m.json"
    p.write_text(dump_model(m))
    assert load_model(p) == m
    y = tmp_path / "m.yaml"
    y.write_text("factors:\n  - {r: 0.5, R: 1.0}\n  - {r: 0.2, R: 2.0, dim: 3}\n")
    assert load_model(y) == m
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"factors": [{"r": 1}]}))
    with pytest.raises(ValueError):
        load_model(bad)


def test_radii_csv():
    assert read_radii_csv("# rho\n0.1,0.2\n\n0.3,0.4\n") == [[0.1, 0.2], [0.3, 0.4]]
