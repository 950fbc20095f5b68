"""Fixed-point spaces of the isotropy groups ``Delta(S_{d-p} x S_p)``, p in {0, 1}.

A matrix fixed by ``Delta(S_q x S_p)`` (``q = d - p``) with ``k = d + m`` rows
has a small number of row types:

* ``q`` "diagonal" rows ``w_i = alpha e_i + beta (1 - e_i) + gamma e_d`` on the
  first ``q`` columns (the ``gamma`` entry only exists when ``p = 1``);
* ``m + p`` single rows, each constant (``x_a``) on the first ``q`` columns and
  equal to ``y_a`` on the last column when ``p = 1``.

Coordinates are ordered ``(alpha, beta, x_1, ..., x_m)`` for ``p = 0`` and
``(alpha, beta, gamma, x_1, y_1, ..., x_{m+1}, y_{m+1})`` for ``p = 1``, so
``N = 2 + m`` and ``N = 5 + 2m`` respectively.

The pulled-back gradient ``F_d`` is written in terms of row norms and angles
whose multiplicities depend on ``d`` only through ``q``; it therefore makes
sense for real ``d``, which is what the continuation code relies on.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, StructureError
from .kernel import WeightConfig, gradient, target_matrix

PROJECT_TOL = 1e-8


@dataclass(frozen=True)
class IsotropyDescriptor:
    """Isotropy ``Delta(S_{d-p} x S_p)`` with ``m`` extra student rows."""

    p: int
    m: int
    d: float

    def __post_init__(self):
        if self.p not in (0, 1):
            raise ValueError(f"p must be 0 or 1, got {self.p}")
        if self.m < 0:
            raise ValueError(f"m must be non-negative, got {self.m}")
        d_min = 3 if self.p == 1 else 2
        if not self.d >= d_min:
            raise ValueError(f"d must be at least {d_min} for p={self.p}, got {self.d}")

    @property
    def N(self):
        return 2 + self.m if self.p == 0 else 5 + 2 * self.m

    @property
    def q(self):
        return self.d - self.p

    @property
    def n_single(self):
        """Number of single (non-diagonal) row types."""
        return self.m + self.p

    @property
    def is_integral(self):
        return float(self.d).is_integer()

    @property
    def k(self):
        return self.int_d + self.m

    @property
    def int_d(self):
        if not self.is_integral:
            raise StructureError(f"d={self.d} is not an integer; no matrix realisation")
        return int(self.d)

    def with_d(self, d):
        return IsotropyDescriptor(self.p, self.m, d)

    def labels(self):
        """Human-readable coordinate names."""
        names = ["alpha", "beta"] + (["gamma"] if self.p else [])
        for a in range(1, self.n_single + 1):
            names.append(f"x{a}")
            if self.p:
                names.append(f"y{a}")
        return names


@dataclass
class ReducedPoint:
    descriptor: IsotropyDescriptor
    xi: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.xi = np.asarray(self.xi, dtype=float).copy()
        if self.xi.shape != (self.descriptor.N,):
            raise ValueError(f"xi must have length {self.descriptor.N}, got {self.xi.shape}")


def _split(xi, desc):
    """Return ``(alpha, beta, gamma, xs, ys)``; ``gamma``/``ys`` are 0 when p=0."""
    alpha, beta = xi[0], xi[1]
    if desc.p == 0:
        xs = list(xi[2:])
        return alpha, beta, 0.0, xs, [0.0] * len(xs)
    gamma = xi[2]
    rest = list(xi[3:])
    return alpha, beta, gamma, rest[0::2], rest[1::2]


def embed(pt):
    """Matrix ``Xi(xi)`` in ``M(k, d)`` fixed by ``Delta(S_{d-p} x S_p)``."""
    desc = pt.descriptor
    d = desc.int_d
    q = d - desc.p
    alpha, beta, gamma, xs, ys = _split(pt.xi, desc)
    W = np.zeros((desc.k, d))
    W[:q, :q] = beta
    W[np.arange(q), np.arange(q)] = alpha
    if desc.p:
        W[:q, q] = gamma
    for a, (x, y) in enumerate(zip(xs, ys)):
        W[q + a, :q] = x
        if desc.p:
            W[q + a, q] = y
    return WeightConfig(W)


def _coordinate_slices(desc):
    """For each coordinate, a boolean mask of the matrix entries it controls."""
    d = desc.int_d
    q = d - desc.p
    masks = []
    diag = np.zeros((desc.k, d), dtype=bool)
    diag[np.arange(q), np.arange(q)] = True
    off = np.zeros_like(diag)
    off[:q, :q] = True
    off &= ~diag
    masks += [diag, off]
    if desc.p:
        col = np.zeros_like(diag)
        col[:q, q] = True
        masks.append(col)
    for a in range(desc.n_single):
        row = np.zeros_like(diag)
        row[q + a, :q] = True
        masks.append(row)
        if desc.p:
            last = np.zeros_like(diag)
            last[q + a, q] = True
            masks.append(last)
    return masks


def project(cfg, descriptor, tol=PROJECT_TOL):
    """Left inverse of :func:`embed`; raises if ``cfg`` is not in the fixed space."""
    W = cfg.W if isinstance(cfg, WeightConfig) else np.asarray(cfg, dtype=float)
    desc = descriptor
    if W.shape != (desc.k, desc.int_d):
        raise StructureError(f"matrix shape {W.shape} does not match k={desc.k}, d={desc.int_d}")
    xi = np.array([W[mask].mean() for mask in _coordinate_slices(desc)])
    pt = ReducedPoint(desc, xi)
    dev = np.abs(embed(pt).W - W)
    worst = float(dev.max())
    if worst > tol:
        i, j = np.unravel_index(int(dev.argmax()), dev.shape)
        raise StructureError(
            f"matrix is not fixed by Delta(S_{{d-{desc.p}}} x S_{desc.p}): "
            f"entry ({i}, {j}) deviates by {worst:.3e}"
        )
    return pt


def symmetrize(W, descriptor):
    """Orthogonal projection (group average) of ``W`` onto the fixed space."""
    desc = descriptor
    W = np.asarray(W, dtype=float)
    xi = np.array([W[mask].mean() for mask in _coordinate_slices(desc)])
    return embed(ReducedPoint(desc, xi)).W


# --- reduced field -----------------------------------------------------------


class _RealOps:
    pi = math.pi
    sqrt = staticmethod(math.sqrt)
    sin = staticmethod(math.sin)
    cos = staticmethod(math.cos)

    @staticmethod
    def acos(x):
        return math.acos(min(1.0, max(-1.0, x)))


class _ComplexOps:
    pi = math.pi
    sqrt = staticmethod(cmath.sqrt)
    sin = staticmethod(cmath.sin)
    cos = staticmethod(cmath.cos)
    acos = staticmethod(cmath.acos)


def _mp_ops():
    import mpmath

    class _MpOps:
        pi = mpmath.pi
        sqrt = staticmethod(mpmath.sqrt)
        sin = staticmethod(mpmath.sin)
        cos = staticmethod(mpmath.cos)
        acos = staticmethod(mpmath.acos)

    return _MpOps


def angle_data(xi, d, p, m, ops=_RealOps):
    """Row norms, pairwise/target angles and column-sum residuals.

    Single-row types are indexed from 0 here; in matrix terms single row ``a``
    is row ``d - p + a``.
    """
    n = m + p
    q = d - p
    if p == 0:
        alpha, beta, xs = xi[0], xi[1], list(xi[2:2 + n])
        gamma, ys = 0 * alpha, [0 * alpha] * n
    else:
        alpha, beta, gamma = xi[0], xi[1], xi[2]
        xs, ys = list(xi[3::2]), list(xi[4::2])
    sq1 = alpha * alpha + (q - 1) * beta * beta + p * gamma * gamma
    tau1 = ops.sqrt(sq1)
    taus = [ops.sqrt(q * x * x + p * y * y) for x, y in zip(xs, ys)]
    if _is_zero(tau1) or any(_is_zero(t) for t in taus):
        raise DomainError("a row type has zero norm; the reduced field is not defined")
    Theta1 = ops.acos((2 * alpha * beta + (q - 2) * beta * beta + p * gamma * gamma) / sq1)
    colsum1 = alpha + (q - 1) * beta
    Lam1 = [ops.acos((x * colsum1 + p * gamma * y) / (tau1 * t)) for x, y, t in zip(xs, ys, taus)]
    Lam = [[None] * n for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            c = (q * xs[a] * xs[b] + p * ys[a] * ys[b]) / (taus[a] * taus[b])
            Lam[a][b] = Lam[b][a] = ops.acos(c)
    return {
        "q": q,
        "alpha": alpha, "beta": beta, "gamma": gamma, "xs": xs, "ys": ys,
        "tau1": tau1, "taus": taus,
        "Theta1": Theta1, "Lambda1": Lam1, "Lambda": Lam,
        "beta1": ops.acos(alpha / tau1),
        "theta1": ops.acos(beta / tau1),
        "lambda12": ops.acos(gamma / tau1) if p else None,
        "lambda_a1": [ops.acos(x / t) for x, t in zip(xs, taus)],
        "lambda_a2": [ops.acos(y / t) for y, t in zip(ys, taus)] if p else None,
        "Omega1": ops.pi * (colsum1 + sum(xs) - 1),
        "Omega2": ops.pi * (q * gamma + sum(ys) - 1) if p else None,
    }


def _is_zero(x):
    try:
        return abs(x) == 0
    except TypeError:
        return False


def _field_components(xi, d, p, m, ops):
    A = angle_data(xi, d, p, m, ops)
    n = m + p
    q = A["q"]
    alpha, beta, gamma, xs, ys = A["alpha"], A["beta"], A["gamma"], A["xs"], A["ys"]
    tau1, taus = A["tau1"], A["taus"]
    Th, L1, L = A["Theta1"], A["Lambda1"], A["Lambda"]
    sin = ops.sin

    G1 = (q - 1) * tau1 * sin(Th) + sum(t * sin(l) for t, l in zip(taus, L1))
    G1 = G1 - sin(A["beta1"]) - (q - 1) * sin(A["theta1"])
    if p:
        G1 = G1 - sin(A["lambda12"])
    G1 = G1 / tau1
    lam_x = sum(l * x for l, x in zip(L1, xs))
    out = [
        G1 * alpha - ((q - 1) * Th * beta + lam_x - A["beta1"]) + A["Omega1"],
        G1 * beta - (Th * (alpha + (q - 2) * beta) + lam_x - A["theta1"]) + A["Omega1"],
    ]
    if p:
        lam_y = sum(l * y for l, y in zip(L1, ys))
        out.append(G1 * gamma - ((q - 1) * Th * gamma + lam_y - A["lambda12"]) + A["Omega2"])
    colsum1 = alpha + (q - 1) * beta
    for a in range(n):
        others = [b for b in range(n) if b != a]
        Ga = q * tau1 * sin(L1[a]) + sum(taus[b] * sin(L[a][b]) for b in others)
        Ga = Ga - q * sin(A["lambda_a1"][a])
        if p:
            Ga = Ga - sin(A["lambda_a2"][a])
        Ga = Ga / taus[a]
        out.append(
            Ga * xs[a]
            - (L1[a] * colsum1 + sum(L[a][b] * xs[b] for b in others) - A["lambda_a1"][a])
            + A["Omega1"]
        )
        if p:
            out.append(
                Ga * ys[a]
                - (L1[a] * q * gamma + sum(L[a][b] * ys[b] for b in others) - A["lambda_a2"][a])
                + A["Omega2"]
            )
    return [v / (2 * ops.pi) for v in out]


def _loss_value(xi, d, p, m, ops):
    A = angle_data(xi, d, p, m, ops)
    q, pi = A["q"], ops.pi

    def f(r1, r2, t):
        return r1 * r2 * (ops.sin(t) + (pi - t) * ops.cos(t)) / (2 * pi)

    tau1, taus, n = A["tau1"], A["taus"], m + p
    ww = q * tau1 * tau1 / 2 + q * (q - 1) * f(tau1, tau1, A["Theta1"])
    ww += sum(t * t / 2 for t in taus)
    for a in range(n):
        ww += 2 * q * f(tau1, taus[a], A["Lambda1"][a])
        for b in range(n):
            if a != b:
                ww += f(taus[a], taus[b], A["Lambda"][a][b])
    wv = q * (f(tau1, 1, A["beta1"]) + (q - 1) * f(tau1, 1, A["theta1"]))
    if p:
        wv += q * f(tau1, 1, A["lambda12"])
    for a in range(n):
        wv += q * f(taus[a], 1, A["lambda_a1"][a])
        if p:
            wv += f(taus[a], 1, A["lambda_a2"][a])
    vv = d / 2 + d * (d - 1) / (2 * pi)
    return ww / 2 - wv + vv / 2


def reduced_loss(xi, d, p, m, precise=True):
    """``L(Xi(xi))`` for real ``d``.

    The three sums cancel to ``O(1/d)`` at type II points, so by default the
    value is accumulated in 50-digit arithmetic.
    """
    if not precise:
        return float(_loss_value([float(v) for v in xi], float(d), p, m, _RealOps))
    import mpmath

    with mpmath.workdps(50):
        mpx = [mpmath.mpf(float(v)) for v in xi]
        return float(_loss_value(mpx, mpmath.mpf(d), p, m, _mp_ops()))


def reduced_loss_mp(xi, d, p, m):
    """Loss in mpmath arithmetic at the current ``mpmath.mp`` precision."""
    import mpmath

    return _loss_value([mpmath.mpf(v) for v in xi], mpmath.mpf(d), p, m, _mp_ops())


def field_at(xi, d, p, m):
    """Reduced field for raw arguments (real, float64)."""
    return np.array(_field_components([float(v) for v in xi], float(d), p, m, _RealOps))


def reduced_field(pt):
    """``F_d(xi)``: the gradient of ``L`` at ``Xi(xi)`` read in ``xi`` coordinates."""
    desc = pt.descriptor
    return field_at(pt.xi, desc.d, desc.p, desc.m)


def field_mp(xi, d, p, m):
    """Reduced field in mpmath arithmetic (precision set by ``mpmath.mp``)."""
    return _field_components(list(xi), d, p, m, _mp_ops())


_CS_STEP = 1e-30


def jacobian_at(xi, d, p, m):
    """Complex-step Jacobian ``dF/dxi`` and derivative ``dF/dd``."""
    xi = [complex(v) for v in xi]
    n = len(xi)
    J = np.empty((n, n))
    for j in range(n):
        z = list(xi)
        z[j] += 1j * _CS_STEP
        J[:, j] = [v.imag / _CS_STEP for v in _field_components(z, d, p, m, _ComplexOps)]
    dd = _field_components(xi, complex(d, _CS_STEP), p, m, _ComplexOps)
    return J, np.array([v.imag / _CS_STEP for v in dd])


def reduced_jacobian(pt, method="complex-step", step=1e-6):
    """Jacobian of ``F_d`` at ``pt``.

    ``complex-step`` differentiates the analytic formulas to machine precision;
    ``fd`` is a central-difference fallback.
    """
    desc = pt.descriptor
    if method == "complex-step":
        return jacobian_at(pt.xi, desc.d, desc.p, desc.m)[0]
    if method != "fd":
        raise ValueError(f"unknown method {method!r}")
    n = desc.N
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        J[:, j] = (field_at(pt.xi + e, desc.d, desc.p, desc.m) - field_at(pt.xi - e, desc.d, desc.p, desc.m)) / (2 * step)
    return J


def pulled_back_gradient(pt):
    """``project(gradient(embed(pt)))`` for integer ``d`` (the matrix route)."""
    desc = pt.descriptor
    G = gradient(embed(pt))
    return np.array([G[mask].mean() for mask in _coordinate_slices(desc)])


def identity_point(desc):
    """The reduced coordinates of the target ``V`` when ``k = d`` (p=1) or p=0."""
    if desc.m != 0:
        raise StructureError("V has zero rows when m > 0 and is not in the smooth domain")
    if desc.p == 0:
        return ReducedPoint(desc, [1.0, 0.0])
    return ReducedPoint(desc, [1.0, 0.0, 0.0, 0.0, 1.0])


__all__ = [
    "IsotropyDescriptor", "ReducedPoint", "embed", "project", "symmetrize",
    "angle_data", "reduced_field", "reduced_jacobian", "field_at", "field_mp",
    "jacobian_at", "reduced_loss",
    "reduced_loss_mp", "pulled_back_gradient", "identity_point", "target_matrix",
]
