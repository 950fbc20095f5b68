import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relu_landscape.errors import DomainError
from relu_landscape.kernel import (
    HessianOperator,
    RowBlockOperator,
    WeightConfig,
    gradient,
    hessian,
    hessian_vector_product,
    loss,
    monte_carlo_loss,
    pair_energy,
    target_matrix,
)


def fd_gradient(W, h=1e-6):
    G = np.zeros_like(W)
    for idx in np.ndindex(W.shape):
        E = np.zeros_like(W)
        E[idx] = h
        G[idx] = (loss(W + E) - loss(W - E)) / (2 * h)
    return G


def fd_hessian(W, h=1e-6):
    n = W.size
    H = np.zeros((n, n))
    for j in range(n):
        E = np.zeros(n)
        E[j] = h
        E = E.reshape(W.shape)
        H[:, j] = ((gradient(W + E) - gradient(W - E)) / (2 * h)).ravel()
    return H


shapes = st.tuples(st.integers(1, 5), st.integers(0, 2)).map(lambda t: (t[0] + t[1], t[0]))


@st.composite
def matrices(draw, min_d=1):
    k, d = draw(shapes.filter(lambda kd: kd[1] >= min_d))
    seed = draw(st.integers(0, 2**31 - 1))
    return np.random.default_rng(seed).standard_normal((k, d))


def test_pair_energy_special_values():
    e = np.array([1.0, 0.0])
    assert pair_energy(e, e) == pytest.approx(0.5)
    assert pair_energy(e, -e) == pytest.approx(0.0, abs=1e-15)
    assert pair_energy(e, np.array([0.0, 1.0])) == pytest.approx(1 / (2 * np.pi))
    assert pair_energy(np.zeros(2), e) == 0.0


def test_loss_zero_at_target():
    for k, d in [(3, 3), (5, 3)]:
        assert loss(target_matrix(k, d)) == pytest.approx(0.0, abs=1e-14)


def test_weight_config_validates_shape():
    with pytest.raises(ValueError):
        WeightConfig(np.zeros((2, 3)))
    assert WeightConfig(np.zeros((3, 2))).k == 3


@settings(max_examples=25, deadline=None)
@given(matrices())
def test_loss_is_row_permutation_invariant(W):
    perm = np.random.default_rng(0).permutation(W.shape[0])
    assert loss(W[perm]) == pytest.approx(loss(W), rel=1e-12, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(matrices())
def test_gradient_matches_finite_differences(W):
    G = gradient(W)
    assert np.allclose(G, fd_gradient(W), rtol=1e-6, atol=1e-7)


@settings(max_examples=10, deadline=None)
@given(matrices(min_d=2))
def test_hessian_matches_finite_differences(W):
    H = hessian(W)
    Hf = fd_hessian(W)
    assert np.abs(H - Hf).max() <= 1e-5 * max(1.0, np.abs(Hf).max())


def test_hessian_vector_product_matches_dense(rng):
    W = rng.standard_normal((6, 4))
    H = hessian(W)
    X = rng.standard_normal(W.shape)
    assert np.allclose(hessian_vector_product(W, X).ravel(), H @ X.ravel(), atol=1e-12)
    op = HessianOperator(W)
    assert op.quadratic_form(X) == pytest.approx(X.ravel() @ H @ X.ravel())


def test_row_block_operator_is_principal_submatrix(rng):
    W = rng.standard_normal((7, 5))
    H = hessian(W)
    rows = [1, 4, 6]
    idx = np.concatenate([np.arange(r * 5, (r + 1) * 5) for r in rows])
    assert np.allclose(RowBlockOperator(W, rows).dense(), H[np.ix_(idx, idx)], atol=1e-13)


def test_hessian_rejects_parallel_rows(rng):
    W = rng.standard_normal((4, 3))
    W[3] = 2 * W[0]
    with pytest.raises(DomainError, match="parallel"):
        hessian(W)
    with pytest.raises(DomainError):
        RowBlockOperator(W, [0])


def test_hessian_rejects_antiparallel_rows_even_when_parallel_allowed(rng):
    W = rng.standard_normal((4, 3))
    W[3] = -W[0]
    with pytest.raises(DomainError):
        hessian(W)
    with pytest.raises(DomainError):
        hessian(W, allow_parallel=True)


def test_parallel_limit_matches_finite_differences(rng):
    W = rng.standard_normal((4, 3))
    W[3] = 0.4 * W[0]
    H = hessian(W, allow_parallel=True)
    assert np.abs(H - fd_hessian(W)).max() < 1e-5


def test_gradient_rejects_zero_row():
    W = np.array([[1.0, 0.2], [0.0, 0.0], [0.3, 1.0]])
    assert np.isfinite(loss(W))
    with pytest.raises(DomainError, match="zero"):
        gradient(W)


def test_monte_carlo_agrees_with_closed_form(rng):
    W = rng.standard_normal((4, 3))
    est, se = monte_carlo_loss(W, 200_000, seed=3)
    assert abs(est - loss(W)) < 4 * se
