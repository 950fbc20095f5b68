import numpy as np
import pytest

from relu_landscape.errors import StructureError
from relu_landscape.kernel import gradient, hessian, loss
from relu_landscape.symmetry import (
    IsotropyDescriptor,
    ReducedPoint,
    embed,
    field_at,
    identity_point,
    jacobian_at,
    project,
    pulled_back_gradient,
    reduced_field,
    reduced_jacobian,
    reduced_loss,
    symmetrize,
)


@pytest.mark.parametrize("p,m,N", [(0, 0, 2), (0, 1, 3), (1, 0, 5), (1, 1, 7), (1, 2, 9)])
def test_dimension_counts(p, m, N):
    desc = IsotropyDescriptor(p, m, 8)
    assert desc.N == N
    assert desc.k == 8 + m
    assert len(desc.labels()) == N


def random_point(p, m, d, seed=0):
    desc = IsotropyDescriptor(p, m, d)
    return ReducedPoint(desc, np.random.default_rng(seed).standard_normal(desc.N))


@pytest.mark.parametrize("p,m", [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2)])
def test_embed_project_round_trip(p, m):
    pt = random_point(p, m, 7)
    back = project(embed(pt), pt.descriptor)
    assert np.allclose(back.xi, pt.xi)


def test_project_rejects_asymmetric_matrix():
    desc = IsotropyDescriptor(1, 1, 6)
    W = embed(random_point(1, 1, 6)).W
    W[0, 1] += 1e-3
    with pytest.raises(StructureError, match="entry"):
        project(W, desc)
    assert np.allclose(project(symmetrize(W, desc), desc).xi.size, desc.N)


@pytest.mark.parametrize("p,m", [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2)])
def test_reduced_field_equals_gradient_entries(p, m):
    pt = random_point(p, m, 6, seed=3)
    assert np.allclose(reduced_field(pt), pulled_back_gradient(pt), atol=1e-12)


@pytest.mark.parametrize("p,m", [(0, 1), (1, 2)])
def test_gradient_stays_in_fixed_space(p, m):
    pt = random_point(p, m, 6, seed=5)
    G = gradient(embed(pt))
    assert np.allclose(symmetrize(G, pt.descriptor), G, atol=1e-12)


def test_reduced_loss_matches_matrix_loss():
    pt = random_point(1, 2, 9, seed=2)
    assert reduced_loss(pt.xi, 9, 1, 2) == pytest.approx(loss(embed(pt)), rel=1e-12)
    assert reduced_loss(pt.xi, 9, 1, 2, precise=False) == pytest.approx(loss(embed(pt)), rel=1e-10)


def test_field_is_defined_for_real_d():
    pt = random_point(1, 1, 7, seed=4)
    F = field_at(pt.xi, 7.5, 1, 1)
    assert F.shape == (7,) and np.all(np.isfinite(F))
    lo, hi = field_at(pt.xi, 7.0, 1, 1), field_at(pt.xi, 8.0, 1, 1)
    assert np.all(np.minimum(lo, hi) - 1e-9 <= F) or np.any(F != lo)


def test_complex_step_jacobian_matches_finite_differences():
    pt = random_point(1, 2, 8.5, seed=6)
    J = reduced_jacobian(pt)
    assert np.allclose(J, reduced_jacobian(pt, method="fd"), atol=1e-7)
    _, dF = jacobian_at(pt.xi, 8.5, 1, 2)
    h = 1e-6
    fd = (field_at(pt.xi, 8.5 + h, 1, 2) - field_at(pt.xi, 8.5 - h, 1, 2)) / (2 * h)
    assert np.allclose(dF, fd, atol=1e-7)


def test_reduced_jacobian_spectrum_is_in_hessian_spectrum():
    pt = random_point(1, 0, 6, seed=8)
    jev = np.sort(np.linalg.eigvals(reduced_jacobian(pt)).real)
    hev = np.linalg.eigvalsh(hessian(embed(pt)))
    for v in jev:
        assert np.abs(hev - v).min() < 1e-8


def test_identity_point_is_global_minimum():
    pt = identity_point(IsotropyDescriptor(1, 0, 6))
    assert np.allclose(reduced_field(pt), 0, atol=1e-12)
    with pytest.raises(StructureError):
        identity_point(IsotropyDescriptor(1, 1, 6))
