"""Fractional power series for the cataloged families.

Each coordinate of a family is expanded as ``sum_j c[i][j] d^(-j/kappa)``.
Leading coefficients come from three sources:

* small nonlinear coefficient systems whose solutions fix the first
  non-trivial term of every coordinate (type II, ``k = d+1`` and ``d+2``);
* closed forms (type I, ``k = d+1``);
* high-precision extraction from solutions at very large ``d``
  (:mod:`relu_landscape.highprec`), used wherever no system is available.

Path fits (:func:`fit_coeffs_from_path`) work from ordinary double precision
continuation data and serve as an independent cross-check.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize

from .errors import ConvergenceError, StructureError
from .families import FamilyId

PI = math.pi

# (coordinate index, order) slots of the first free coefficient of each
# coordinate, in the order the coefficient systems use them.
TYPE2_KD2_SLOTS = ((0, 3), (1, 4), (2, 3), (3, 2), (4, 1), (5, 2), (6, 1), (7, 2), (8, 1))
TYPE2_KD1_SLOTS = ((0, 3), (1, 4), (2, 3), (3, 2), (4, 1), (5, 2), (6, 1))
TYPE1_KD2_SLOTS = ((0, 6), (1, 7), (2, 5), (3, 3), (4, 1), (5, 3), (6, 1), (7, 4), (8, 2))

# terms fixed by the family structure before any system is solved
_FIXED_TERMS = {
    ("II", 1, 0): {(0, 0): 1.0, (2, 2): 2.0, (4, 0): -1.0},
    ("II", 1, 1): {(0, 0): 1.0, (2, 2): 2.0, (6, 0): -1.0},
    ("II", 1, 2): {(0, 0): 1.0, (2, 2): 2.0, (8, 0): -1.0},
    ("I", 0, 0): {(0, 0): -1.0, (0, 2): 2.0, (1, 2): 2.0},
    ("I", 0, 1): {(0, 0): -1.0, (0, 2): 2.0, (1, 2): 2.0, (2, 2): 2.0},
    ("I", 1, 0): {(0, 0): -1.0, (0, 2): 2.0, (1, 2): 2.0, (2, 2): 2.0, (3, 2): 2.0, (4, 0): -1.0, (4, 2): 2.0},
    ("I", 1, 1): {(0, 0): -1.0, (0, 4): 2.0, (1, 4): 2.0, (2, 4): 1.0, (4, 0): 0.5, (6, 0): -0.5},
    ("I", 1, 2): {(0, 0): -1.0, (0, 4): 2.0, (1, 4): 2.0, (2, 4): 1.0, (4, 0): 0.5, (6, 0): -0.5},
}

# Rough values for the first free terms of the type II k = d family; located
# by a multistart Newton search at d = 1e4 and only used to start Newton.
_TYPE2_KD0_GUESS = {(0, 4): 2.5, (3, 2): 1.3, (4, 2): 5.3}


@dataclass
class FPSExpansion:
    """Truncated series ``xi_i(d) = sum_j coeffs[i, j] d^(-j/kappa)``."""

    family: FamilyId
    kappa: int
    coeffs: np.ndarray
    stderr: np.ndarray = None
    source: str = ""
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        if self.kappa not in (2, 4):
            raise ValueError(f"kappa must be 2 or 4, got {self.kappa}")
        if self.coeffs.shape[0] != self.family.N:
            raise ValueError(f"expected {self.family.N} coordinates, got {self.coeffs.shape[0]}")

    @property
    def J(self):
        return self.coeffs.shape[1] - 1

    def evaluate(self, d):
        if not d > 0:
            raise ValueError("d must be positive")
        s = float(d) ** (-1.0 / self.kappa)
        return self.coeffs @ (s ** np.arange(self.J + 1))

    def limit(self):
        return self.coeffs[:, 0].copy()

    def coefficient(self, index, order):
        return float(self.coeffs[index, order]) if order <= self.J else 0.0

    def to_json(self):
        from .symmetry import IsotropyDescriptor

        labels = IsotropyDescriptor(self.family.p, self.family.m, 10).labels()
        rows = []
        for i in range(self.coeffs.shape[0]):
            for j in range(self.J + 1):
                entry = {
                    "family_type": self.family.family_type,
                    "p": self.family.p,
                    "m": self.family.m,
                    "coordinate": labels[i],
                    "index": i,
                    "order": j,
                    "value": float(self.coeffs[i, j]),
                }
                if self.stderr is not None:
                    entry["stderr"] = float(self.stderr[i, j])
                rows.append(entry)
        return {
            "family": self.family.as_dict(),
            "kappa": self.kappa,
            "J": self.J,
            "source": self.source,
            "coefficients": rows,
        }


def _table(family, terms, J=None):
    J = max([o for _, o in terms] + [0]) if J is None else J
    c = np.zeros((family.N, J + 1))
    for (i, j), v in terms.items():
        if j <= J:
            c[i, j] = v
    return c


@dataclass
class DirectCoefficients:
    """Solution of a coefficient system: values on ``slots`` plus diagnostics."""

    family: FamilyId
    slots: tuple
    values: np.ndarray
    residual: float
    info: dict = field(default_factory=dict)

    def as_dict(self):
        return dict(zip(self.slots, (float(v) for v in self.values)))

    def expansion(self):
        terms = dict(_FIXED_TERMS[(self.family.family_type, self.family.p, self.family.m)])
        terms.update(self.as_dict())
        return FPSExpansion(self.family, self.family.kappa, _table(self.family, terms), source="direct")


# --- type II, k = d + 2: nine equations ---------------------------------------


def _polar_angles(x1, y1, x2, y2):
    r2, r3 = math.hypot(x1, y1), math.hypot(x2, y2)
    lam24 = math.asin(x1 / r2)
    lam23 = math.asin((y1 * x2 - x1 * y2) / (r2 * r3))
    lam34 = math.asin(x2 / r3)
    return r2, r3, lam23, lam24, lam34


def type2_kd2_system(u):
    """Residuals of the nine leading-order equations for type II, ``k = d+2``.

    ``u`` holds, in order, the first free coefficients of alpha (order 3),
    beta (4), gamma (3), x1 (2), y1 (1), x2 (2), y2 (1), x3 (2), y3 (1).
    """
    al, be, ga, x1, y1, x2, y2, x3, y3 = u
    r2, r3, lam23, lam24, lam34 = _polar_angles(x1, y1, x2, y2)
    k2 = (al * r2**2 - 2 * x1 * y1) / r2**3 + (-y3 * x1 + y1 * x3 - x1 * y2 + y1 * x2) / r2**2
    k3 = (al * r3**2 - 2 * x2 * y2) / r3**3 + (-y3 * x2 + y2 * x3 + x2 * y1 - y2 * x1) / r3**2
    return np.array([
        al - y3 + r2 + r3,
        be + x1 + x2 + x3,
        ga + y1 + y2 + y3,
        x1 * k2 - (lam23 * x2 + lam24 * x3 + PI / 2 * be - 2 * y1 / r2),
        y1 * k2 - (lam23 * y2 + lam24 * y3 + PI / 2 * ga - 2 * x1 / r2 + x3),
        x2 * k3 - (lam23 * x1 + lam34 * x3 + PI / 2 * be - 2 * y2 / r3),
        y2 * k3 - (lam23 * y1 + lam34 * y3 + PI / 2 * ga - 2 * x2 / r3 + x3),
        2 - PI / 2 * be - ((PI - lam24) * x1 + (PI - lam34) * x2 + PI * x3),
        al - PI / 2 * ga + x1 + x2 - ((PI - lam24) * y1 + (PI - lam34) * y2 + PI * y3),
    ])


def type2_kd2_angles(u):
    """Limit angles between the three extra rows and the ordering condition."""
    _, _, _, x1, y1, x2, y2, _, _ = u
    r2, r3, lam23, lam24, lam34 = _polar_angles(x1, y1, x2, y2)
    return {
        "R2": r2, "R3": r3,
        "Lambda23": lam23, "Lambda24": lam24, "Lambda34": lam34,
        "angle_sum_defect": lam23 + lam34 - lam24,
        "ordering_ok": bool(y1 * x2 > x1 * y2),
    }


def _solve_system(fun, starts, tol):
    tried = []
    for u0 in starts:
        sol = optimize.root(fun, u0, method="hybr", options={"xtol": 1e-15})
        res = float(np.abs(fun(sol.x)).max())
        tried.append((list(map(float, u0)), res))
        if res < tol:
            # polish with a couple of Newton steps on a central-difference Jacobian
            u = sol.x
            for _ in range(3):
                F = fun(u)
                J = _fd_jac(fun, u)
                u = u - np.linalg.solve(J, F)
            if np.abs(fun(u)).max() <= res:
                sol_x, res = u, float(np.abs(fun(u)).max())
            else:
                sol_x = sol.x
            return sol_x, res, tried
    raise ConvergenceError(
        "coefficient system did not converge from any start",
        history=[r for _, r in tried],
        last_good=tried,
    )


def _fd_jac(fun, u, h=1e-7):
    n = len(u)
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        J[:, j] = (fun(u + e) - fun(u - e)) / (2 * h)
    return J


@lru_cache(maxsize=None)
def _type2_kd2_cached():
    kd1 = type2_kd1_coeffs().values
    al, be, ga, x1, y1, x2, y2 = kd1
    # the k = d+1 solution with a small extra row is a good start; the grid
    # is a fallback that is rarely needed
    starts = [np.array([al, be, ga, x1, y1, 0.1, -0.4, x2, y2])]
    for a in (0.05, 0.2):
        for b in (-0.2, -0.6):
            starts.append(np.array([al, be, ga, x1, y1, a, b, x2, y2]))
    return _solve_system(type2_kd2_system, starts, 1e-10)


def type2_kd2_coeffs():
    """First free coefficients of the type II ``k = d+2`` family."""
    u, res, tried = _type2_kd2_cached()
    fam = FamilyId("II", 1, 2)
    info = type2_kd2_angles(u)
    info["starts_tried"] = len(tried)
    return DirectCoefficients(fam, TYPE2_KD2_SLOTS, np.array(u), res, info)


# --- type II, k = d + 1: one scalar equation ----------------------------------


def _theta_parts(t, sin=np.sin, cos=np.cos):
    st, ct = sin(t), cos(t)
    s2 = sin(2 * t)
    A = 2 / (2 - PI) * (s2 / 2 * (1 - st) * (t - PI / 2) + st * (1 - st) ** 2)
    A = A + st * (2 * t - 2 * t**2 / PI - 1 - s2 / 2 * (2 * t / PI - 1))
    B = 2 / (2 - PI) * (
        -ct * (PI / 2 - t) ** 2 + (PI / 2 - t) * (1 - st) * (2 - st**2) - ct * (1 - st) ** 2
    )
    B = B + (ct * (1 - PI / 2) - st**3 * (2 * t / PI - 1))
    P = 2 - 4 * t / PI - 2 * s2 / PI - 2 * ct**3
    Q = 2 * st**3 - 4 / PI * st**2
    return A, B, P, Q


def theta_polynomial(t):
    """The scalar function ``A Q - B P`` whose root fixes the k = d+1 family."""
    A, B, P, Q = _theta_parts(t)
    return A * Q - B * P


def theta_polynomial_derivative(t):
    h = 1e-30
    return float(np.imag(theta_polynomial(complex(t, h))) / h)


def solve_theta(t0=0.6, tol=1e-15, max_iter=50):
    """Root of :func:`theta_polynomial` in ``(0, pi/2)``.

    Newton from ``t0``; if an iterate leaves the interval, fall back to a
    sign-change scan followed by Brent's method.
    """
    t = float(t0)
    for _ in range(max_iter):
        step = theta_polynomial(t) / theta_polynomial_derivative(t)
        t -= step
        if not 0.0 < t < PI / 2:
            break
        if abs(step) < tol:
            return t, "newton"
    grid = np.linspace(1e-3, PI / 2 - 1e-3, 400)
    vals = np.array([theta_polynomial(g) for g in grid])
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa * fb < 0:
            roots.append(optimize.brentq(theta_polynomial, a, b, xtol=1e-16, rtol=4 * np.finfo(float).eps))
    if not roots:
        raise ConvergenceError("no root of the k=d+1 scalar equation in (0, pi/2)")
    return min(roots, key=lambda r: abs(r - t0)), "bisection"


def type2_kd1_residuals(u, theta):
    """The seven leading-order equations for type II ``k = d+1``."""
    al, be, ga, x1, y1, x2, y2 = u
    r2 = math.hypot(x1, y1)
    k2 = (al * r2**2 - 2 * x1 * y1) / r2**3 + (-y2 * x1 + y1 * x2) / r2**2
    return np.array([
        al - y2 + r2,
        be + x1 + x2,
        ga + y1 + y2,
        x1 * k2 - (theta * x2 + PI / 2 * be - 2 * y1 / r2),
        y1 * k2 - (PI / 2 * ga - 2 * x1 / r2 + theta * y2 + x2),
        PI / 2 * be + 2 + theta * x1,
        al + PI / 2 * ga + x1 + theta * y1,
    ])


@lru_cache(maxsize=None)
def _type2_kd1_cached():
    theta, method = solve_theta()
    A, B, P, Q = _theta_parts(theta)
    r2 = -P / A
    x1, y1 = r2 * math.sin(theta), -r2 * math.cos(theta)
    be = -(2 + theta * x1) * 2 / PI
    x2 = -be - x1
    # the remaining three equations are linear in (alpha, gamma, y2)
    y2 = (r2 + (PI / 2 - theta) * y1 - x1) / (1 - PI / 2)
    al = y2 - r2
    ga = -y1 - y2
    return theta, method, (al, be, ga, x1, y1, x2, y2)


def type2_kd1_coeffs():
    """Root ``theta`` and the seven first free coefficients (type II, k = d+1)."""
    theta, method, u = _type2_kd1_cached()
    u = np.array(u)
    res = float(np.abs(type2_kd1_residuals(u, theta)).max())
    info = {
        "theta": theta,
        "p_theta": float(theta_polynomial(theta)),
        "dp_theta": theta_polynomial_derivative(theta),
        "root_method": method,
        "angle_from_coeffs": math.asin(u[3] / math.hypot(u[3], u[4])),
    }
    return DirectCoefficients(FamilyId("II", 1, 1), TYPE2_KD1_SLOTS, u, res, info)


# --- type I, k = d + 1: closed forms --------------------------------------------


def type1_kd1_closed_forms():
    """Closed-form leading coefficients of the type I ``k = d+1`` family."""
    root = math.sqrt(PI - 2)
    h = (6 + 3 * PI) / (8 * PI * root)
    return {
        (0, 4): 2.0, (0, 6): PI / 2,
        (1, 4): 2.0, (1, 7): -root,
        (2, 4): 1.0, (2, 5): -2 * h,
        (3, 3): root / 2,
        (4, 0): 0.5, (4, 1): h,
        (5, 3): root / 2,
        (6, 0): -0.5, (6, 1): h,
    }


def type1_kd1_order_residuals(x_coeff=None, y_coeff=None):
    """The two scalar order equations that pin the closed forms.

    ``x_coeff`` is the order-3 coefficient shared by both extra rows' first
    columns and ``y_coeff`` the order-1 correction to their last column.
    """
    forms = type1_kd1_closed_forms()
    x = forms[(3, 3)] if x_coeff is None else x_coeff
    y = forms[(4, 1)] if y_coeff is None else y_coeff
    return np.array([
        4 * x * abs(x) / PI - 1 + 2 / PI,
        4 * y * math.sqrt(PI - 2) * (1 / 3 - 2 / (3 * PI)) - 0.5 + 2 / PI**2,
    ])


def type1_kd1_coeffs():
    fam = FamilyId("I", 1, 1)
    forms = type1_kd1_closed_forms()
    slots = tuple(forms)
    res = float(np.abs(type1_kd1_order_residuals()).max())
    return DirectCoefficients(fam, slots, np.array([forms[s] for s in slots]), res, {"closed_form": True})


# --- type I, k = d + 2 -----------------------------------------------------------


def type1_kd2_coeffs():
    """First free coefficients of the type I ``k = d+2`` family.

    No closed system is available, so the values are read off a
    high-precision solution branch (see :mod:`relu_landscape.highprec`);
    ``residual`` is the extraction error estimate.
    """
    from .highprec import extract_expansion

    fam = FamilyId("I", 1, 2)
    coeffs, stderr = extract_expansion(fam)
    vals = np.array([coeffs[i, j] for i, j in TYPE1_KD2_SLOTS])
    err = float(max(stderr[i, j] for i, j in TYPE1_KD2_SLOTS))
    return DirectCoefficients(fam, TYPE1_KD2_SLOTS, vals, err, {"method": "high-precision extraction"})


def direct_coeffs(family):
    """Coefficient-system (or closed-form) solution, if the family has one."""
    key = (family.family_type, family.p, family.m)
    if key == ("II", 1, 2):
        return type2_kd2_coeffs()
    if key == ("II", 1, 1):
        return type2_kd1_coeffs()
    if key == ("I", 1, 1):
        return type1_kd1_coeffs()
    if key == ("I", 1, 2):
        return type1_kd2_coeffs()
    raise StructureError(f"family {family.label} has no coefficient system; use extraction or a path fit")


# --- seeds -------------------------------------------------------------------------


def seed_expansion(family):
    """Truncated series used to start Newton; never needs high precision."""
    key = (family.family_type, family.p, family.m)
    terms = dict(_FIXED_TERMS[key])
    if key in (("II", 1, 1), ("II", 1, 2)):
        terms.update(direct_coeffs(family).as_dict())
    elif key == ("II", 1, 0):
        terms.update(_TYPE2_KD0_GUESS)
    elif key == ("I", 1, 1):
        terms.update(type1_kd1_closed_forms())
    elif key == ("I", 1, 2):
        # the k = d+1 closed forms for the shared rows, rough guesses for the
        # third extra row
        terms.update(type1_kd1_closed_forms())
        terms[(7, 4)] = 1.0
        terms[(8, 2)] = -1.0
    return FPSExpansion(family, family.kappa, _table(family, terms), source="seed")


# --- reference expansions and path fits ------------------------------------------


def reference_expansion(family, J=12):
    """Coefficients up to order ``J`` extracted from extended-precision solves."""
    from .highprec import extract_expansion

    coeffs, err = extract_expansion(family, J=max(J, 14))
    return FPSExpansion(family, family.kappa, coeffs[:, :J + 1], err[:, :J + 1], source="extraction")


def leading_free_slots(expansion, tol=1e-8):
    """First order of each coordinate that is neither structural nor zero."""
    fixed = _FIXED_TERMS[(expansion.family.family_type, expansion.family.p, expansion.family.m)]
    slots = []
    for i in range(expansion.coeffs.shape[0]):
        for j in range(expansion.J + 1):
            if (i, j) not in fixed and abs(expansion.coeffs[i, j]) > tol:
                slots.append((i, j))
                break
    return tuple(slots)


def evaluate_fps(expansion, d):
    """``sum_j c[i][j] d^(-j/kappa)`` for every coordinate."""
    return expansion.evaluate(d)


def _check_span(ds):
    ds = np.asarray(ds, dtype=float)
    if ds.size < 4 or np.log10(ds.max() / ds.min()) < 2 - 1e-9:
        raise ValueError("a path fit needs samples spanning at least two decades of d")
    return ds


def _polynomial_fit(s, Y, J, cond_limit=1e10):
    """Double-precision least squares in powers of ``s``; lowers ``J`` if ill-conditioned."""
    smax = s.max()
    while True:
        V = np.vander(s / smax, J + 1, increasing=True)
        cond = np.linalg.cond(V)
        if cond <= cond_limit or J <= 1:
            break
        J -= 1
    C, *_ = np.linalg.lstsq(V, Y, rcond=None)
    resid = Y - V @ C
    dof = max(len(s) - (J + 1), 1)
    sigma2 = (resid**2).sum(axis=0) / dof
    cov_diag = np.diag(np.linalg.pinv(V.T @ V))
    scale = smax ** np.arange(J + 1)
    C = C / scale[:, None]
    err = np.sqrt(np.outer(cov_diag, sigma2)) / scale[:, None]
    return C.T, err.T, J, cond, resid


def fit_coeffs_from_path(path, kappa=None, J=8, method="rational", degree=20, dps=60):
    """Fit series coefficients to a continuation path.

    ``method="rational"`` polishes every sample in ``dps``-digit arithmetic
    and expands a rational least-squares fit in ``s = d^(-1/kappa)``; the
    reported error is the change against a fit of degree ``degree - 4``.
    ``method="polynomial"`` is a plain double-precision least-squares fit
    whose order is lowered (with a warning) while the scaled Vandermonde
    condition number exceeds ``1e10``.
    """
    import warnings

    family = path.family
    kappa = family.kappa if kappa is None else kappa
    ds = _check_span(path.ds)
    if method == "polynomial":
        s = ds ** (-1.0 / kappa)
        C, err, J_used, cond, _ = _polynomial_fit(s, path.xis, J)
        if J_used < J:
            warnings.warn(
                f"Vandermonde condition above 1e10: fit order lowered from {J} to {J_used}", RuntimeWarning
            )
        info = {"method": method, "J_requested": J, "J": J_used, "condition": cond}
        return FPSExpansion(family, kappa, C, err, source="path-fit", info=info)
    if method != "rational":
        raise ValueError(f"unknown fit method {method!r}")
    import mpmath

    from .highprec import rational_taylor, refine_points

    X = refine_points(family, ds, path.xis, dps=dps)
    with mpmath.workdps(dps):
        s = [mpmath.mpf(float(d)) ** (-mpmath.mpf(1) / kappa) for d in ds]
    C = np.zeros((family.N, J + 1))
    err = np.zeros_like(C)
    for i in range(family.N):
        y = [x[i] for x in X]
        hi = rational_taylor(s, y, degree, J + 1, dps=dps + 20)
        lo = rational_taylor(s, y, degree - 4, J + 1, dps=dps + 20)
        C[i] = [float(v) for v in hi]
        err[i] = [float(abs(a - b)) for a, b in zip(hi, lo)]
    info = {"method": method, "degree": degree, "J": J, "samples": len(ds)}
    return FPSExpansion(family, kappa, C, err, source="path-fit", info=info)


def detect_base(path, J=6):
    """Compare double-precision fits in ``d^(-1/2)`` and ``d^(-1/4)`` with equal term counts.

    Returns ``(kappa, {2: rms_residual, 4: rms_residual})``.
    """
    ds = _check_span(path.ds)
    out = {}
    for kappa in (2, 4):
        *_, resid = _polynomial_fit(ds ** (-1.0 / kappa), path.xis, J, cond_limit=np.inf)
        out[kappa] = float(np.sqrt(np.mean(resid**2)))
    return (2 if out[2] <= out[4] else 4), out


@dataclass
class LossAsymptotics:
    """Fitted expansion of the loss along a family.

    For type II the fitted quantity is ``d * L`` in powers of ``d^(-1/2)``,
    for type I it is ``L`` in powers of ``d^(-1/kappa)``.
    """

    family: FamilyId
    scaled_by_d: bool
    kappa: int
    coeffs: np.ndarray
    stderr: np.ndarray
    ds: np.ndarray
    values: np.ndarray
    info: dict = field(default_factory=dict)

    @property
    def constant(self):
        return float(self.coeffs[0])

    def as_dict(self):
        return {
            "family": self.family.as_dict(),
            "quantity": "d*L" if self.scaled_by_d else "L",
            "kappa": self.kappa,
            "coefficients": [float(v) for v in self.coeffs],
            "stderr": [float(v) for v in self.stderr],
            **self.info,
        }


# two readings of the reference type II constant: its decimal value and its
# closed form, which differ by a factor of ten
TYPE2_ALPHA0_DECIMAL = 2.97357632715
TYPE2_ALPHA0_CLOSED_FORM = 0.5 - 2 / PI**2


def loss_asymptotics(family, path, K=6, degree=16, dps=60):
    """Loss expansion along ``path`` (extended precision, rational fit)."""
    import mpmath

    from .highprec import rational_taylor, refine_points
    from .symmetry import reduced_loss_mp

    ds = _check_span(path.ds)
    X = refine_points(family, ds, path.xis, dps=dps)
    scaled = family.family_type == "II"
    kappa = family.kappa
    with mpmath.workdps(dps):
        vals = []
        for d, x in zip(ds, X):
            L = reduced_loss_mp(x, d, family.p, family.m)
            vals.append(L * d if scaled else L)
        s = [mpmath.mpf(float(d)) ** (-mpmath.mpf(1) / kappa) for d in ds]
    hi = rational_taylor(s, vals, degree, K, dps=dps + 20)
    lo = rational_taylor(s, vals, degree - 4, K, dps=dps + 20)
    coeffs = np.array([float(v) for v in hi])
    err = np.array([float(abs(a - b)) for a, b in zip(hi, lo)])
    info = {}
    if scaled:
        info["alpha_vs_decimal"] = coeffs[0] / TYPE2_ALPHA0_DECIMAL
        info["alpha_vs_closed_form"] = coeffs[0] / TYPE2_ALPHA0_CLOSED_FORM
    else:
        info["constant_minus_limit"] = coeffs[0] - (0.5 - 1 / PI)
    return LossAsymptotics(family, scaled, kappa, coeffs, err, ds, np.array([float(v) for v in vals]), info)


def decay_exponent(ds, residuals):
    """Slope ``a`` of ``log|r| ~ -a log d`` (least squares)."""
    ds = np.asarray(ds, dtype=float)
    r = np.abs(np.asarray(residuals, dtype=float))
    keep = r > 0
    slope = np.polyfit(np.log(ds[keep]), np.log(r[keep]), 1)[0]
    return float(-slope)


def order_residual_decay(expansion, ds, dps=50):
    """``max|F_d|`` of the truncated series on ``ds`` and its decay exponent.

    The field is evaluated in ``dps``-digit arithmetic so that the double
    precision floor ``d * eps`` does not mask the decay.
    """
    import mpmath

    from .symmetry import field_mp

    fam = expansion.family
    norms = []
    with mpmath.workdps(dps):
        for d in ds:
            d_mp = mpmath.mpf(float(d))
            s = d_mp ** (-mpmath.mpf(1) / expansion.kappa)
            xi = [sum(mpmath.mpf(float(c)) * s**j for j, c in enumerate(row)) for row in expansion.coeffs]
            norms.append(float(max(abs(v) for v in field_mp(xi, d_mp, fam.p, fam.m))))
    norms = np.array(norms)
    return norms, decay_exponent(ds, norms)
