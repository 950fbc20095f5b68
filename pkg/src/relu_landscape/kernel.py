"""Closed-form population loss of a two-layer ReLU student/teacher network.

The student is ``x -> 1^T relu(W x)`` with ``W`` of shape ``(k, d)`` and the
teacher is ``x -> 1^T relu(V x)`` where ``V`` is the ``d x d`` identity padded
with ``k - d`` zero rows.  Inputs are standard Gaussian, so every expectation
reduces to the pairwise arc-cosine kernel

    f(w, v) = |w| |v| (sin t + (pi - t) cos t) / (2 pi),   t = angle(w, v).

All functions are pure; nothing here keeps state between calls.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * np.pi

# rows whose pairwise angle is within this of 0 or pi are treated as
# (anti)parallel, where the Hessian formulas break down; arccos roundoff alone
# leaves angles near 1e-8 for exactly parallel rows
PARALLEL_TOL = 1e-7


@dataclass(frozen=True)
class WeightConfig:
    """A ``k x d`` student weight matrix; the target is implied by the shape."""

    W: np.ndarray

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        if W.ndim != 2:
            raise ValueError(f"W must be a matrix, got shape {W.shape}")
        k, d = W.shape
        if d < 1 or k < d:
            raise ValueError(f"need k >= d >= 1, got k={k}, d={d}")
        object.__setattr__(self, "W", W)

    @property
    def k(self):
        return self.W.shape[0]

    @property
    def d(self):
        return self.W.shape[1]

    @property
    def V(self):
        return target_matrix(self.k, self.d)


def target_matrix(k, d):
    """Identity target in ``M(k, d)``: ``I_d`` stacked over ``k - d`` zero rows."""
    V = np.zeros((k, d))
    V[:d, :d] = np.eye(d)
    return V


def _as_matrix(W):
    if isinstance(W, WeightConfig):
        return W.W
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] < W.shape[1]:
        raise ValueError(f"expected a k x d matrix with k >= d, got shape {W.shape}")
    return W


def _angle(cos):
    return np.arccos(np.clip(cos, -1.0, 1.0))


def pair_energy(w, v):
    """Arc-cosine kernel ``f(w, v)``; zero if either argument vanishes."""
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    nw, nv = np.linalg.norm(w), np.linalg.norm(v)
    if nw == 0.0 or nv == 0.0:
        return 0.0
    t = _angle(np.dot(w, v) / (nw * nv))
    return nw * nv * (np.sin(t) + (np.pi - t) * np.cos(t)) / TWO_PI


def _kernel_matrix(A, B):
    """``f(a_i, b_j)`` for all row pairs; zero rows give zero entries."""
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    outer = np.outer(na, nb)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = np.where(outer > 0, (A @ B.T) / outer, 1.0)
    t = _angle(cos)
    return outer * (np.sin(t) + (np.pi - t) * np.cos(t)) / TWO_PI


def loss(W):
    """Expected squared loss ``L(W)`` (defined everywhere, zero rows allowed)."""
    W = _as_matrix(W)
    k, d = W.shape
    V = np.eye(d)
    # f(w, w) = |w|^2 / 2 exactly; avoid the arccos roundoff on the diagonal
    Kww = _kernel_matrix(W, W)
    np.fill_diagonal(Kww, 0.5 * np.sum(W * W, axis=1))
    value = 0.5 * Kww.sum() - _kernel_matrix(W, V).sum() + 0.5 * _kernel_matrix(V, V).sum()
    return max(float(value), 0.0)


class _Geometry:
    """Norms, unit rows and pairwise angles of ``W`` and against the target."""

    def __init__(self, W, check_parallel):
        k, d = W.shape
        r = np.linalg.norm(W, axis=1)
        zero = np.flatnonzero(r == 0.0)
        if zero.size:
            raise DomainError(f"row {int(zero[0])} of W is zero; the loss is not differentiable there")
        U = W / r[:, None]
        C = np.clip(U @ U.T, -1.0, 1.0)
        np.fill_diagonal(C, 1.0)
        T = np.arccos(C)
        np.fill_diagonal(T, 0.0)
        S = np.sin(T)
        np.fill_diagonal(S, 0.0)
        CV = np.clip(U, -1.0, 1.0)
        TV = np.arccos(CV)
        SV = np.sin(TV)
        if check_parallel:
            off = ~np.eye(k, dtype=bool)
            bad = np.argwhere(off & (np.abs(S) < PARALLEL_TOL))
            if bad.size:
                i, j = bad[0]
                kind = "parallel" if C[i, j] > 0 else "antiparallel"
                raise DomainError(f"rows {int(i)} and {int(j)} of W are {kind}; Hessian undefined")
            bad = np.argwhere(SV < PARALLEL_TOL)
            if bad.size:
                i, j = bad[0]
                kind = "parallel" if CV[i, j] > 0 else "antiparallel"
                raise DomainError(f"row {int(i)} of W is {kind} to target row {int(j)}; Hessian undefined")
        self.k, self.d = k, d
        self.r, self.U, self.C, self.T, self.S = r, U, C, T, S
        self.CV, self.TV, self.SV = CV, TV, SV


def gradient(W):
    """Gradient of ``L`` as a ``k x d`` matrix.

    Row ``i`` is ``(1/2pi) [ sum_j (|w_j| sin t_ij u_i - t_ij w_j)
    - sum_j (sin t_ij^V u_i - t_ij^V v_j) + pi (W - V)^Sigma ]``.
    """
    W = _as_matrix(W)
    g = _Geometry(W, check_parallel=False)
    coef = g.S @ g.r - g.SV.sum(axis=1)
    colsum = W.sum(axis=0) - 1.0
    G = coef[:, None] * g.U - g.T @ W + g.TV + np.pi * colsum[None, :]
    return G / TWO_PI


def hessian(W, allow_parallel=False):
    """Dense symmetric Hessian of ``L``, indexed by row-major ``vec(W)``.

    With ``allow_parallel`` two student rows pointing the same way are
    accepted: every ``1/sin t`` term there is multiplied by something of
    order ``sin^2 t``, so the Hessian is the continuous limit with those
    terms dropped.  Antiparallel pairs and rows parallel to a target row are
    still rejected.
    """
    W = _as_matrix(W)
    g = _Geometry(W, check_parallel=not allow_parallel)
    k, d = W.shape
    U, C, S, T, r = g.U, g.C, g.S, g.T, g.r
    eye = np.eye(d)
    off = ~np.eye(k, dtype=bool)
    par = np.zeros((k, k), dtype=bool)
    if allow_parallel:
        par = off & (np.abs(S) < PARALLEL_TOL)
        if np.any(par & (C < 0)):
            raise DomainError("W has antiparallel rows; Hessian undefined")
        if np.any(g.SV < PARALLEL_TOL):
            raise DomainError("a row of W is (anti)parallel to a target row; Hessian undefined")
    Ssafe = np.where(off & ~par, S, 1.0)

    # cross blocks: (pi - t) I + s u_i u_j^T + (u_j - c u_i)(u_i - c u_j)^T / s
    Nij = U[None, :, :] - C[:, :, None] * U[:, None, :]  # u_j - c_ij u_i
    Nij[par] = 0.0
    H = (np.pi - T)[:, :, None, None] * eye
    H += S[:, :, None, None] * np.einsum("ia,jb->ijab", U, U)
    H += np.einsum("ija,jib->ijab", Nij, Nij) / Ssafe[:, :, None, None]

    # diagonal blocks
    alpha = np.where(off, (r[None, :] * S) / r[:, None], 0.0)
    Nn = Nij / Ssafe[:, :, None]
    NV = (eye[None, :, :] - g.CV[:, :, None] * U[:, None, :]) / g.SV[:, :, None]  # (k, t, d)
    proj = eye[None] - np.einsum("ia,ib->iab", U, U)
    diag = alpha.sum(axis=1)[:, None, None] * proj
    diag += np.einsum("ij,ija,ijb->iab", alpha, Nn, Nn)
    sv = g.SV / r[:, None]
    diag -= sv.sum(axis=1)[:, None, None] * proj
    diag -= np.einsum("it,ita,itb->iab", sv, NV, NV)
    diag += np.pi * eye[None]
    idx = np.arange(k)
    H[idx, idx] = diag

    H = H.transpose(0, 2, 1, 3).reshape(k * d, k * d) / TWO_PI
    return 0.5 * (H + H.T)


class HessianOperator:
    """Matrix-free Hessian at a fixed ``W``; ``matvec`` costs ``O(k^2 d)``.

    Angle data is computed once, so repeated products are cheap.
    """

    def __init__(self, W):
        W = _as_matrix(W)
        self.W = W
        g = _Geometry(W, check_parallel=True)
        k = W.shape[0]
        self.g = g
        off = ~np.eye(k, dtype=bool)
        self._off = off
        self._Sinv = np.where(off, 1.0 / np.where(off, g.S, 1.0), 0.0)
        self._alpha_sum = np.where(off, g.r[None, :] * g.S, 0.0).sum(axis=1) / g.r
        self._pi_minus_T = np.where(off, np.pi - g.T, 0.0)
        self._S_off = np.where(off, g.S, 0.0)
        self._C_off = np.where(off, g.C, 0.0)
        self._sv_sum = g.SV.sum(axis=1) / g.r

    @property
    def shape(self):
        n = self.W.size
        return (n, n)

    def matvec(self, X):
        """Return ``H X`` with ``X`` and the result shaped like ``W``."""
        g = self.g
        X = np.asarray(X, dtype=float).reshape(self.W.shape)
        U, r = g.U, g.r
        a = np.einsum("ij,ij->i", U, X)
        Q = X @ U.T  # Q_ij = x_i . u_j
        Cc = self._C_off
        # same-row terms from the other student rows
        beta = (r[None, :] / r[:, None]) * (Q - Cc * a[:, None]) * self._Sinv**2 * self._S_off
        out = self._alpha_sum[:, None] * (X - U * a[:, None])
        out += beta @ U - (beta * Cc).sum(axis=1)[:, None] * U
        # cross-row terms
        gamma = (Q.T - Cc * a[None, :]) * self._Sinv
        out += self._pi_minus_T @ X
        out += (self._S_off @ a)[:, None] * U
        out += gamma @ U - (gamma * Cc).sum(axis=1)[:, None] * U
        out += np.pi * X
        # target terms
        delta = (X - g.CV * a[:, None]) / g.SV
        out -= self._sv_sum[:, None] * (X - U * a[:, None])
        out -= (delta - (delta * g.CV).sum(axis=1)[:, None] * U) / r[:, None]
        return out / TWO_PI

    def quadratic_form(self, X, Y=None):
        """``<Y, H X>`` (``Y`` defaults to ``X``)."""
        Y = X if Y is None else Y
        return float(np.sum(np.asarray(Y).reshape(self.W.shape) * self.matvec(X)))


class RowBlockOperator:
    """Principal sub-block of the Hessian for a subset of student rows.

    ``matvec`` takes an ``len(rows) x d`` array (a perturbation supported on
    ``rows``) and returns the same rows of ``H X``.  Only angles between the
    selected rows and all other rows are formed, so the cost is
    ``O(len(rows) k d)`` rather than ``O(k^2 d)``.
    """

    def __init__(self, W, rows):
        W = _as_matrix(W)
        rows = np.asarray(rows, dtype=int)
        if rows.size == 0 or len(set(rows.tolist())) != rows.size:
            raise ValueError("rows must be a non-empty list of distinct indices")
        k, d = W.shape
        r = np.linalg.norm(W, axis=1)
        if np.any(r == 0.0):
            raise DomainError("W has a zero row; the Hessian is not defined")
        U = W / r[:, None]
        Us = U[rows]
        C = np.clip(Us @ U.T, -1.0, 1.0)  # (|S|, k)
        self_mask = rows[:, None] == np.arange(k)[None, :]
        C[self_mask] = 1.0
        T = np.arccos(C)
        S = np.sin(T)
        T[self_mask] = 0.0
        S[self_mask] = 0.0
        off = ~self_mask
        if np.any(off & (np.abs(S) < PARALLEL_TOL)):
            raise DomainError("selected rows are (anti)parallel to another row; Hessian undefined")
        CV = np.clip(Us, -1.0, 1.0)
        SV = np.sin(np.arccos(CV))
        if np.any(SV < PARALLEL_TOL):
            raise DomainError("a selected row is (anti)parallel to a target row; Hessian undefined")
        self.W, self.rows, self.U, self.r = W, rows, U, r
        self.Us, self.rs = Us, r[rows]
        self.C, self.S, self.T, self.off = C, S, T, off
        self.Sinv = np.where(off, 1.0 / np.where(off, S, 1.0), 0.0)
        self.alpha_sum = np.where(off, r[None, :] * S, 0.0).sum(axis=1) / self.rs
        self.CV, self.SV = CV, SV
        self.sv_sum = SV.sum(axis=1) / self.rs
        # pairwise data within the selected rows
        self.Css = C[:, rows]
        self.Sss = S[:, rows]
        self.Tss = T[:, rows]
        self.Sinv_ss = self.Sinv[:, rows]
        self.off_ss = off[:, rows]

    @property
    def shape(self):
        n = self.rows.size * self.W.shape[1]
        return (n, n)

    def matvec(self, X):
        X = np.asarray(X, dtype=float).reshape(self.rows.size, self.W.shape[1])
        U, Us, rs = self.U, self.Us, self.rs
        a = np.einsum("ij,ij->i", Us, X)
        Q = X @ U.T  # (|S|, k): x_i . u_j
        C = np.where(self.off, self.C, 0.0)
        beta = (self.r[None, :] / rs[:, None]) * (Q - C * a[:, None]) * self.Sinv
        out = self.alpha_sum[:, None] * (X - Us * a[:, None])
        out += beta @ U - (beta * C).sum(axis=1)[:, None] * Us
        # cross terms among the selected rows
        Css = np.where(self.off_ss, self.Css, 0.0)
        Qss = X @ Us.T  # x_i . u_j for i, j selected
        gamma = (Qss.T - Css * a[None, :]) * self.Sinv_ss
        pmt = np.where(self.off_ss, np.pi - self.Tss, 0.0)
        out += pmt @ X
        out += (np.where(self.off_ss, self.Sss, 0.0) @ a)[:, None] * Us
        out += gamma @ Us - (gamma * Css).sum(axis=1)[:, None] * Us
        out += np.pi * X
        delta = (X - self.CV * a[:, None]) / self.SV
        out -= self.sv_sum[:, None] * (X - Us * a[:, None])
        out -= (delta - (delta * self.CV).sum(axis=1)[:, None] * Us) / rs[:, None]
        return out / TWO_PI

    def dense(self):
        """The ``len(rows) d`` square principal submatrix."""
        n = self.shape[0]
        H = np.empty((n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = 1.0
            H[:, j] = self.matvec(e).ravel()
        return 0.5 * (H + H.T)


def hessian_vector_product(W, U):
    """``H(W) vec(U)`` reshaped to ``k x d``."""
    return HessianOperator(W).matvec(U)


def monte_carlo_loss(W, n, seed, chunk=200_000):
    """Sampled estimate of the loss; returns ``(estimate, standard_error)``."""
    W = _as_matrix(W)
    if n < 1:
        raise ValueError("n must be positive")
    k, d = W.shape
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n:
        m = min(chunk, n - done)
        x = rng.standard_normal((m, d))
        y = np.maximum(x @ W.T, 0.0).sum(axis=1) - np.maximum(x, 0.0).sum(axis=1)
        z = 0.5 * y * y
        total += z.sum()
        total_sq += (z * z).sum()
        done += m
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    stderr = np.sqrt(var / n) if n > 1 else float("inf")
    return float(mean), float(stderr)
