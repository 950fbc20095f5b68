import numpy as np
import pytest

from relu_landscape.errors import ConvergenceError, DomainError, SingularJacobianError, StructureError
from relu_landscape.families import FamilyId, catalog
from relu_landscape.kernel import gradient
from relu_landscape.solver import (
    attainable_tolerance,
    canonical_order,
    classify_type,
    continue_family,
    equilibrated_condition,
    newton_solve,
    seed_point,
    solve_family,
)
from relu_landscape.symmetry import IsotropyDescriptor, ReducedPoint, embed, reduced_field

from conftest import solved


@pytest.mark.parametrize("fam", catalog(), ids=lambda f: f.label)
@pytest.mark.parametrize("d", [10, 1e3, 1e6])
def test_every_family_solves(fam, d):
    pt = solved(fam.label, d)
    assert np.abs(reduced_field(pt)).max() <= attainable_tolerance(d, 1e-12)
    assert classify_type(pt) == fam.family_type


@pytest.mark.parametrize("label", ["II_p1_m2", "I_p1_m1", "I_p0_m1"])
def test_matrix_gradient_vanishes_at_integer_d(label):
    W = embed(solved(label, 20)).W
    assert np.abs(gradient(W)).max() < 1e-11


def test_newton_records_history():
    fam = FamilyId("II", 1, 0)
    seed = seed_point(fam, 5e3)
    pt = newton_solve(seed.descriptor, seed.xi)
    hist = pt.info["history"]
    assert hist[-1] <= pt.info["tol"] and len(hist) == pt.info["iterations"] + 1


def test_tolerance_floor_scales_with_d():
    assert attainable_tolerance(10, 1e-12) == 1e-12
    assert attainable_tolerance(1e6, 1e-12) > 1e-10


def test_singular_jacobian_detected(monkeypatch):
    import relu_landscape.solver as solver

    real = solver.jacobian_at

    def rank_deficient(xi, d, p, m):
        J, extra = real(xi, d, p, m)
        J = J.copy()
        J[:, -1] = J[:, 0]
        return J, extra

    monkeypatch.setattr(solver, "jacobian_at", rank_deficient)
    seed = seed_point(FamilyId("II", 1, 0), 100)
    with pytest.raises(SingularJacobianError) as err:
        newton_solve(seed.descriptor, seed.xi + 1e-3)
    assert err.value.history


def test_newton_reports_non_convergence():
    desc = IsotropyDescriptor(1, 1, 50)
    with pytest.raises(ConvergenceError) as err:
        newton_solve(desc, [0.3, 0.9, -0.8, 1.2, -0.4, -0.9, 0.7], max_iter=2)
    assert err.value.history


def test_domain_error_for_bad_start():
    desc = IsotropyDescriptor(0, 0, 8)
    with pytest.raises(DomainError):
        newton_solve(desc, [0.0, 0.0])


def test_equilibrated_condition_ignores_scaling():
    J = np.diag([1e8, 1e-8, 1.0])
    assert equilibrated_condition(J) == pytest.approx(1.0)
    assert equilibrated_condition(np.zeros((2, 2))) == np.inf


def test_seed_confidence_flag():
    fam = FamilyId("I", 1, 1)
    assert seed_point(fam, 100).info["low_confidence"]
    assert not seed_point(fam, 1e4).info["low_confidence"]
    with pytest.raises(StructureError):
        seed_point("I_p1_m1", 100)


def test_classify_rejects_ambiguous_point():
    pt = ReducedPoint(IsotropyDescriptor(0, 0, 10), [0.1, 0.2])
    with pytest.raises(StructureError):
        classify_type(pt)


def test_canonical_order_permutes_single_rows():
    fam = FamilyId("II", 1, 2)
    xi = solved("II_p1_m2", 100).xi
    shuffled = np.concatenate([xi[:3], xi[7:9], xi[3:5], xi[5:7]])
    assert np.allclose(canonical_order(fam, shuffled), xi)
    assert canonical_order(fam, list(shuffled))[3] == xi[3]


def test_continuation_is_smooth_and_agrees_with_direct_solves():
    fam = FamilyId("I", 1, 1)
    path = continue_family(fam, 1e3, 30, samples_per_decade=20)
    assert path.terminated is None
    assert path.ds[-1] == pytest.approx(30)
    assert np.allclose(path.xis[-1], solve_family(fam, 30).xi, atol=1e-9)
    steps = np.abs(np.diff(path.xis, axis=0)).max(axis=1)
    assert steps.max() < 0.05
    assert min(s.jacobian_min_abs_eig for s in path.samples) > 0
    assert len(path.to_rows()) == len(path.samples)


def test_continuation_rejects_range_below_minimum_dimension():
    with pytest.raises(DomainError):
        continue_family(FamilyId("II", 1, 0), 20, 2.5)
    with pytest.raises(DomainError):
        continue_family(FamilyId("I", 0, 1), 1.5, 20)
