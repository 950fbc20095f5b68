import mpmath
import numpy as np
import pytest

from relu_landscape.families import FamilyId
from relu_landscape.highprec import chebyshev_nodes, mp_newton, rational_taylor, refine_points
from relu_landscape.symmetry import field_mp

from conftest import solved


def test_mp_newton_polishes_double_solution():
    pt = solved("II_p1_m1", 1e5)
    x = mp_newton(list(pt.xi), 1e5, 1, 1, dps=50)
    with mpmath.workdps(50):
        res = max(abs(v) for v in field_mp(x, mpmath.mpf(1e5), 1, 1))
    assert res < mpmath.mpf(10) ** -35
    assert np.allclose([float(v) for v in x], pt.xi, atol=1e-9)


def test_refine_points_shape():
    fam = FamilyId("I", 0, 1)
    ds = [100.0, 200.0]
    out = refine_points(fam, ds, [solved(fam.label, d).xi for d in ds], dps=30)
    assert len(out) == 2 and len(out[0]) == fam.N


def test_chebyshev_nodes_inside_interval():
    s = chebyshev_nodes(9, 0.0, 2.0)
    assert len(s) == 9 and min(s) > 0 and max(s) < 2


def test_rational_taylor_recovers_series():
    with mpmath.workdps(50):
        s = [mpmath.mpf(v) for v in np.linspace(0.01, 0.3, 30)]
        y = [(1 + 2 * v) / (1 - v) for v in s]
    coeffs = rational_taylor(s, y, 4, 5, dps=50)
    # (1 + 2s) / (1 - s) = 1 + 3 s + 3 s^2 + ...
    assert [float(c) for c in coeffs] == pytest.approx([1, 3, 3, 3, 3], abs=1e-20)
