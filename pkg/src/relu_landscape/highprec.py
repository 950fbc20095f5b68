"""Extended-precision solves and series-coefficient extraction.

Double precision loses about ``log10(d)`` digits in the reduced field, and for
the ``d^(-1/4)`` families the solution is further ill-determined at large
``d``.  Here the field is evaluated with mpmath, critical points are polished
to many digits, and series coefficients are read off a least-squares
polynomial in ``s = d^(-1/kappa)`` sampled close to ``s = 0``.
"""

from functools import lru_cache

import mpmath
import numpy as np

from .errors import ConvergenceError
from .solver import canonical_order
from .symmetry import field_mp


def _jacobian_mp(x, d, p, m, h):
    n = len(x)
    J = mpmath.matrix(n, n)
    for j in range(n):
        xp, xm = list(x), list(x)
        xp[j] += h
        xm[j] -= h
        Fp, Fm = field_mp(xp, d, p, m), field_mp(xm, d, p, m)
        for i in range(n):
            J[i, j] = (Fp[i] - Fm[i]) / (2 * h)
    return J


def mp_newton(xi0, d, p, m, dps=60, tol=None, max_iter=40):
    """Newton in ``dps``-digit arithmetic; returns a list of ``mpf``.

    The Jacobian is a central difference with step ``10^(-dps/3)``; steps
    are halved until the residual decreases.
    """
    with mpmath.workdps(dps):
        d = mpmath.mpf(d)
        x = [mpmath.mpf(v) for v in xi0]
        if tol is None:
            tol = mpmath.mpf(10) ** (-(dps - 8)) * max(1, d)
        h = mpmath.mpf(10) ** (-(dps // 3))
        F = field_mp(x, d, p, m)
        res = max(abs(v) for v in F)
        history = [float(res)]
        for _ in range(max_iter):
            if res <= tol:
                return x
            J = _jacobian_mp(x, d, p, m, h)
            dx = mpmath.lu_solve(J, mpmath.matrix(F))
            t = 1
            for _ in range(20):
                trial = [x[i] - t * dx[i] for i in range(len(x))]
                F_new = field_mp(trial, d, p, m)
                res_new = max(abs(v) for v in F_new)
                if res_new < res:
                    break
                t /= 2
            else:
                break
            x, F, res = trial, F_new, res_new
            history.append(float(res))
        if res <= tol:
            return x
        raise ConvergenceError(f"extended-precision Newton stalled at d={mpmath.nstr(d, 6)}", history, x)


def chebyshev_nodes(n, lo, hi):
    """First-kind Chebyshev points on ``(lo, hi)``, decreasing."""
    k = np.arange(n)
    t = np.cos((2 * k + 1) * np.pi / (2 * n))
    return [lo + (hi - lo) * (1 + v) / 2 for v in t]


def _lagrange_extrapolate(ss, xs, s):
    n = len(ss)
    out = [0] * len(xs[0])
    for a in range(n):
        w = 1
        for b in range(n):
            if b != a:
                w *= (s - ss[b]) / (ss[a] - ss[b])
        out = [o + w * v for o, v in zip(out, xs[a])]
    return out


def solve_on_nodes(family, s_nodes, seed, dps):
    """Polished critical points at ``d = s^(-kappa)`` for each node.

    Nodes are visited from large to small ``s``; after the first three the
    start point is a polynomial extrapolation of the previous solutions.
    """
    kappa = family.kappa
    order = sorted(range(len(s_nodes)), key=lambda i: -float(s_nodes[i]))
    out = [None] * len(s_nodes)
    done_s, done_x = [], []
    with mpmath.workdps(dps):
        for i in order:
            s = mpmath.mpf(s_nodes[i])
            d = s ** (-kappa)
            if len(done_s) >= 3:
                guess = _lagrange_extrapolate(done_s[-10:], done_x[-10:], s)
            else:
                guess = [mpmath.mpf(v) for v in seed(float(d))]
            x = canonical_order(family, mp_newton(guess, d, family.p, family.m, dps=dps))
            out[i] = x
            done_s.append(s)
            done_x.append(x)
    return out


def polynomial_coefficients(s, X, degree, dps):
    """Least-squares fit ``X[:, i] ~ sum_j C[j, i] s^j`` in ``dps`` digits.

    Works in the scaled variable ``s / max(s)``; returns an mpmath matrix of
    shape ``(degree + 1, N)``.
    """
    with mpmath.workdps(dps):
        smax = max(mpmath.mpf(v) for v in s)
        M, N = len(s), len(X[0])
        V = mpmath.matrix(M, degree + 1)
        for r in range(M):
            t = mpmath.mpf(s[r]) / smax
            v = mpmath.mpf(1)
            for j in range(degree + 1):
                V[r, j] = v
                v *= t
        C = mpmath.matrix(degree + 1, N)
        for i in range(N):
            y = mpmath.matrix([mpmath.mpf(X[r][i]) for r in range(M)])
            c, _ = mpmath.qr_solve(V, y)
            for j in range(degree + 1):
                C[j, i] = c[j] / smax**j
        return C


@lru_cache(maxsize=None)
def extract_expansion(family, J=14, nodes=32, s_max=None, dps=100):
    """Series coefficients of ``family`` up to order ``J`` from solves near ``s = 0``.

    Returns ``(coeffs, stderr)`` as float arrays of shape ``(N, J + 1)``; the
    error estimate is the change when the fitted degree is raised by four.
    """
    from .fps import seed_expansion

    if s_max is None:
        s_max = 1e-2 if family.kappa == 4 else 1e-4
    seed = seed_expansion(family).evaluate
    s_nodes = chebyshev_nodes(nodes, 0.0, s_max)
    X = solve_on_nodes(family, s_nodes, seed, dps)
    lo = polynomial_coefficients(s_nodes, X, J + 4, dps)
    hi = polynomial_coefficients(s_nodes, X, J + 8, dps)
    N = len(X[0])
    coeffs = np.array([[float(lo[j, i]) for j in range(J + 1)] for i in range(N)])
    err = np.array([[float(abs(lo[j, i] - hi[j, i])) for j in range(J + 1)] for i in range(N)])
    return coeffs, err


def refine_points(family, ds, xis, dps=40):
    """Polish double-precision critical points in extended precision."""
    out = []
    for d, xi in zip(ds, xis):
        out.append(mp_newton(list(xi), d, family.p, family.m, dps=dps))
    return out


def rational_taylor(s, y, degree, K, dps=80):
    """Taylor coefficients at ``s = 0`` of a least-squares rational fit.

    Fits ``y ~ P(t) / Q(t)`` with ``t = s / max(s)``, ``deg P = deg Q =
    degree`` and ``Q(0) = 1`` (linearized), then expands ``P / Q`` to ``K``
    terms.  A rational form follows the data through the singularities of
    the solution branch at moderate ``d`` far better than a polynomial.
    Data that is exactly rational of lower degree makes the system
    singular; the degree is then lowered until it is not.
    """
    with mpmath.workdps(dps):
        s = [mpmath.mpf(v) for v in s]
        y = [mpmath.mpf(v) for v in y]
        smax = max(s)
        t = [v / smax for v in s]
        for deg in range(degree, -1, -1):
            try:
                P, Q = _rational_lsq(t, y, deg)
                break
            except ValueError:
                continue
        T = []
        for k in range(K):
            v = P[k] if k < len(P) else mpmath.mpf(0)
            v -= sum(Q[j] * T[k - j] for j in range(1, min(k, len(Q) - 1) + 1))
            T.append(v)
        return [T[k] / smax**k for k in range(K)]


def _rational_lsq(t, y, deg):
    M = len(t)
    A = mpmath.matrix(M, 2 * deg + 1)
    for r in range(M):
        v = mpmath.mpf(1)
        for j in range(deg + 1):
            A[r, j] = v
            if j:
                A[r, deg + j] = -y[r] * v
            v *= t[r]
    c, _ = mpmath.qr_solve(A, mpmath.matrix(y))
    P = [c[j] for j in range(deg + 1)]
    Q = [mpmath.mpf(1)] + [c[deg + j] for j in range(1, deg + 1)]
    return P, Q
